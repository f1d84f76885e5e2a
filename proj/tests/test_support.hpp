#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "hypobench/jsonl.hpp"
#include "hypobench/vectorindex.hpp"

namespace hypobench::testing {

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("hypobench_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct TempDir {
    explicit TempDir(const std::string& tag) : path(make_temp_dir(tag)) {}
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path path;
};

// Independent reference for k-nearest-neighbor queries: full scan, plain
// sort of (squared distance, page id) pairs. Kept free of any code shared
// with the index's own query path.
inline std::vector<Neighbor> brute_force_knn(const VectorIndex& index,
                                             const EmbeddingVector& query, size_t k) {
    std::vector<std::pair<double, std::string>> all;
    all.reserve(index.count());
    for (size_t i = 0; i < index.count(); ++i) {
        const float* v = index.vector(i);
        double acc = 0.0;
        for (size_t j = 0; j < index.dimension(); ++j) {
            double d = static_cast<double>(v[j]) - static_cast<double>(query.values[j]);
            acc += d * d;
        }
        all.emplace_back(acc, index.page_ids()[i]);
    }
    std::sort(all.begin(), all.end());
    std::vector<Neighbor> out;
    for (size_t r = 0; r < k && r < all.size(); ++r) {
        out.push_back(Neighbor{all[r].second, std::sqrt(all[r].first), static_cast<int>(r + 1)});
    }
    return out;
}

inline void expect_same_neighbors(const std::vector<Neighbor>& got,
                                  const std::vector<Neighbor>& want, std::string* error) {
    if (got.size() != want.size()) {
        *error = "size mismatch: " + std::to_string(got.size()) + " vs " +
                 std::to_string(want.size());
        return;
    }
    for (size_t i = 0; i < got.size(); ++i) {
        if (got[i].page_id != want[i].page_id || got[i].distance != want[i].distance ||
            got[i].rank != want[i].rank) {
            *error = "mismatch at rank " + std::to_string(i + 1) + ": " + got[i].page_id + "/" +
                     std::to_string(got[i].distance) + " vs " + want[i].page_id + "/" +
                     std::to_string(want[i].distance);
            return;
        }
    }
}

}  // namespace hypobench::testing
