#include "hypobench/vectorindex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace hypobench {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'H', 'B', 'V', 'X'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out += static_cast<char>((v >> (8 * i)) & 0xff);
    }
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out += static_cast<char>((v >> (8 * i)) & 0xff);
    }
}

uint32_t get_u32(const char* p) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(p[i]);
    }
    return v;
}

uint64_t get_u64(const char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(p[i]);
    }
    return v;
}

void put_f32(std::string& out, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

float get_f32(const char* p) {
    uint32_t bits = get_u32(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace

const char* to_string(IndexKind kind) {
    return kind == IndexKind::title ? "title" : "definition";
}

VectorIndex VectorIndex::from_entries(IndexKind kind, size_t dimension,
                                      std::vector<std::string> ids, std::vector<float> flat) {
    if (flat.size() != ids.size() * dimension) {
        throw DataError("vector block size does not match entry count");
    }
    VectorIndex index;
    index.kind_ = kind;
    index.dimension_ = dimension;
    index.ids_ = std::move(ids);
    index.data_ = std::move(flat);
    return index;
}

void VectorIndex::save(const fs::path& path) const {
    std::string buf;
    buf.reserve(32 + data_.size() * 4);
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    buf += static_cast<char>(kind_);
    put_u32(buf, static_cast<uint32_t>(dimension_));
    put_u64(buf, ids_.size());
    for (float f : data_) {
        put_f32(buf, f);
    }
    for (const auto& id : ids_) {
        put_u32(buf, static_cast<uint32_t>(id.size()));
        buf += id;
    }
    write_file_atomic(path, buf);
}

VectorIndex VectorIndex::load(const fs::path& path) {
    std::string buf = read_file(path);
    if (buf.size() < 21 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw DataError("not a vector index file: " + path.string());
    }
    size_t at = 4;
    uint32_t version = get_u32(buf.data() + at);
    at += 4;
    if (version != kVersion) {
        throw DataError("unsupported index version " + std::to_string(version));
    }
    VectorIndex index;
    index.kind_ = static_cast<IndexKind>(buf[at]);
    at += 1;
    index.dimension_ = get_u32(buf.data() + at);
    at += 4;
    uint64_t count = get_u64(buf.data() + at);
    at += 8;
    size_t vec_bytes = static_cast<size_t>(count) * index.dimension_ * 4;
    if (buf.size() < at + vec_bytes) {
        throw DataError("truncated index file: " + path.string());
    }
    index.data_.resize(static_cast<size_t>(count) * index.dimension_);
    for (size_t i = 0; i < index.data_.size(); ++i) {
        index.data_[i] = get_f32(buf.data() + at + i * 4);
    }
    at += vec_bytes;
    index.ids_.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        if (buf.size() < at + 4) {
            throw DataError("truncated id table: " + path.string());
        }
        uint32_t len = get_u32(buf.data() + at);
        at += 4;
        if (buf.size() < at + len) {
            throw DataError("truncated id table: " + path.string());
        }
        index.ids_.emplace_back(buf.data() + at, len);
        at += len;
    }
    return index;
}

VectorIndex build_index(const CorpusStore& store, IndexKind kind, EmbeddingProvider& embedder,
                        const fs::path& checkpoint_path, size_t batch_size) {
    std::vector<std::string> ids;
    std::vector<std::string> texts;
    ids.reserve(store.size());
    texts.reserve(store.size());
    store.for_each([&](const WikiPage& page) {
        ids.push_back(page.page_id);
        texts.push_back(kind == IndexKind::title ? page.title : page.definition);
    });

    fs::path meta_path = checkpoint_path;
    meta_path += ".meta";

    size_t done = 0;
    size_t dimension = 0;
    if (fs::exists(checkpoint_path) && fs::exists(meta_path)) {
        json meta = json::parse(read_file(meta_path), nullptr, false);
        if (!meta.is_discarded()) {
            done = meta.value("count", size_t{0});
            dimension = meta.value("dimension", size_t{0});
        }
    }

    std::ofstream data(checkpoint_path, std::ios::binary | std::ios::app);
    if (!data) {
        throw DataError("cannot write index checkpoint " + checkpoint_path.string());
    }
    for (size_t begin = done; begin < texts.size(); begin += batch_size) {
        size_t end = std::min(begin + batch_size, texts.size());
        std::vector<std::string> batch(texts.begin() + static_cast<ptrdiff_t>(begin),
                                       texts.begin() + static_cast<ptrdiff_t>(end));
        auto vectors = embedder.embed(batch);
        validate_embeddings(vectors, batch.size(), dimension);
        if (dimension == 0) {
            dimension = vectors[0].dimension();
        }
        std::string chunk;
        chunk.reserve(vectors.size() * dimension * 4);
        for (const auto& v : vectors) {
            for (float f : v.values) {
                put_f32(chunk, f);
            }
        }
        data.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        data.flush();
        write_file_atomic(meta_path, json{{"count", end}, {"dimension", dimension}}.dump());
    }
    data.close();

    std::string raw = read_file(checkpoint_path);
    size_t expected = ids.size() * dimension * 4;
    if (raw.size() < expected) {
        throw DataError("index checkpoint shorter than expected");
    }
    std::vector<float> flat(ids.size() * dimension);
    for (size_t i = 0; i < flat.size(); ++i) {
        flat[i] = get_f32(raw.data() + i * 4);
    }
    VectorIndex index = VectorIndex::from_entries(kind, dimension, std::move(ids), std::move(flat));

    std::error_code ec;
    fs::remove(checkpoint_path, ec);
    fs::remove(meta_path, ec);
    return index;
}

std::vector<Neighbor> knn_vector(const VectorIndex& index, const EmbeddingVector& query, size_t k) {
    if (k > index.count()) {
        throw DataError("knn k=" + std::to_string(k) + " exceeds entry count " +
                        std::to_string(index.count()));
    }
    if (query.dimension() != index.dimension()) {
        throw DataError("query dimension does not match index");
    }
    struct Scored {
        double dist2;
        size_t entry;
    };
    std::vector<Scored> scored;
    scored.reserve(index.count());
    const size_t dim = index.dimension();
    for (size_t i = 0; i < index.count(); ++i) {
        const float* v = index.vector(i);
        double acc = 0.0;
        for (size_t j = 0; j < dim; ++j) {
            double d = static_cast<double>(v[j]) - static_cast<double>(query.values[j]);
            acc += d * d;
        }
        scored.push_back({acc, i});
    }
    auto by_distance_then_id = [&](const Scored& a, const Scored& b) {
        if (a.dist2 != b.dist2) {
            return a.dist2 < b.dist2;
        }
        return index.page_ids()[a.entry] < index.page_ids()[b.entry];
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<ptrdiff_t>(k), scored.end(),
                      by_distance_then_id);
    std::vector<Neighbor> out;
    out.reserve(k);
    for (size_t r = 0; r < k; ++r) {
        out.push_back(Neighbor{index.page_ids()[scored[r].entry], std::sqrt(scored[r].dist2),
                               static_cast<int>(r + 1)});
    }
    return out;
}

std::vector<Neighbor> knn(const VectorIndex& index, const std::string& query_text, size_t k,
                          EmbeddingProvider& embedder) {
    auto vectors = embedder.embed({query_text});
    validate_embeddings(vectors, 1, index.dimension());
    return knn_vector(index, vectors[0], k);
}

}  // namespace hypobench
