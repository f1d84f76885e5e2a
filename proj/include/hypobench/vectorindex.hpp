#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hypobench/corpus.hpp"
#include "hypobench/providers.hpp"

namespace hypobench {

enum class IndexKind : uint8_t { title = 0, definition = 1 };

const char* to_string(IndexKind kind);

struct Neighbor {
    std::string page_id;
    double distance = 0.0;  // Euclidean
    int rank = 0;           // 1-based, non-decreasing distance
};

// Exhaustive flat index: every corpus page, one float32 vector each. Queries
// scan all entries, so results are exact by construction.
//
// On disk: magic "HBVX", u32 version, u8 kind, u32 dimension, u64 count
// (little-endian), then count*dimension float32 (little-endian), then the
// page-id table (u32 length + bytes per id, in entry order).
class VectorIndex {
public:
    IndexKind kind() const { return kind_; }
    size_t dimension() const { return dimension_; }
    size_t count() const { return ids_.size(); }
    const std::vector<std::string>& page_ids() const { return ids_; }
    const float* vector(size_t i) const { return data_.data() + i * dimension_; }

    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

    static VectorIndex from_entries(IndexKind kind, size_t dimension,
                                    std::vector<std::string> ids, std::vector<float> flat);

private:
    IndexKind kind_ = IndexKind::title;
    size_t dimension_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;  // count * dimension, row-major
};

// Embeds every page (titles or definitions, per kind) in store order. The
// build appends finished batches to checkpoint_path and records progress in a
// sidecar, so a failed embedder can be resumed without re-embedding; the
// finished index is identical either way. Checkpoint files are removed on
// success.
VectorIndex build_index(const CorpusStore& store, IndexKind kind, EmbeddingProvider& embedder,
                        const std::filesystem::path& checkpoint_path, size_t batch_size = 64);

// k nearest entries by L2 distance, ties broken by ascending page_id.
// Throws DataError when k exceeds the entry count.
std::vector<Neighbor> knn(const VectorIndex& index, const std::string& query_text, size_t k,
                          EmbeddingProvider& embedder);
std::vector<Neighbor> knn_vector(const VectorIndex& index, const EmbeddingVector& query, size_t k);

}  // namespace hypobench
