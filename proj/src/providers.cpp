#include "hypobench/providers.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include "hypobench/digest.hpp"

namespace hypobench {

namespace fs = std::filesystem;

void ChatRequest::validate() const {
    if (user_turns.empty()) {
        throw DataError("chat request needs at least one user turn");
    }
    if (assistant_turns.size() + 1 != user_turns.size()) {
        throw DataError("chat request transcript out of shape: " +
                        std::to_string(user_turns.size()) + " user turns vs " +
                        std::to_string(assistant_turns.size()) + " assistant turns");
    }
    if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
        throw DataError("chat temperature must be finite and within [0, 2]");
    }
}

const char* to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::chat: return "chat";
        case ProviderKind::embed: return "embed";
        case ProviderKind::search: return "search";
    }
    return "unknown";
}

json canonical_chat_request(const ChatRequest& req) {
    // nlohmann::json objects keep insertion order for ordered_json; use a
    // fixed field order so the digest is stable.
    return json{{"kind", "chat"},
                {"model", req.model_id},
                {"system", req.system_prompt},
                {"user_turns", req.user_turns},
                {"assistant_turns", req.assistant_turns},
                {"temperature", req.temperature}};
}

json canonical_embed_request(const std::vector<std::string>& texts, const std::string& backend_id) {
    return json{{"kind", "embed"}, {"model", backend_id}, {"texts", texts}};
}

json canonical_search_request(const std::string& phrase, const std::string& backend_id) {
    return json{{"kind", "search"}, {"backend", backend_id}, {"phrase", phrase}};
}

std::string CacheKey::relative_path() const {
    return std::string(to_string(provider_kind)) + "/" + request_digest.substr(0, 2) + "/" +
           request_digest + ".json";
}

CacheKey make_cache_key(ProviderKind kind, const json& canonical_request) {
    return CacheKey{kind, sha256_hex(canonical_request.dump())};
}

bool CallCache::load(const CacheKey& key, json* response_out) const {
    fs::path path = dir_ / key.relative_path();
    std::lock_guard<std::mutex> lock(mutex_);
    if (!fs::exists(path)) {
        return false;
    }
    json record = json::parse(read_file(path), nullptr, false);
    if (record.is_discarded() || !record.contains("response")) {
        return false;
    }
    *response_out = record["response"];
    return true;
}

void CallCache::store(const CacheKey& key, const json& request, const json& response) {
    fs::path path = dir_ / key.relative_path();
    json record{{"key",
                 {{"provider_kind", to_string(key.provider_kind)},
                  {"request_digest", key.request_digest}}},
                {"request", request},
                {"response", response},
                {"timestamp", std::time(nullptr)}};
    std::lock_guard<std::mutex> lock(mutex_);
    write_file_atomic(path, record.dump());
}

std::string CachingChatProvider::chat(const ChatRequest& req) {
    CacheKey key = make_cache_key(ProviderKind::chat, canonical_chat_request(req));
    json cached;
    if (cache_->load(key, &cached) && cached.is_string()) {
        return cached.get<std::string>();
    }
    std::string text = inner_->chat(req);
    cache_->store(key, canonical_chat_request(req), json(text));
    return text;
}

std::vector<EmbeddingVector> CachingEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    CacheKey key = make_cache_key(ProviderKind::embed, canonical_embed_request(texts, inner_->id()));
    json cached;
    if (cache_->load(key, &cached) && cached.is_array()) {
        std::vector<EmbeddingVector> out;
        out.reserve(cached.size());
        for (const auto& row : cached) {
            EmbeddingVector v;
            v.values = row.get<std::vector<float>>();
            out.push_back(std::move(v));
        }
        return out;
    }
    std::vector<EmbeddingVector> out = inner_->embed(texts);
    json rows = json::array();
    for (const auto& v : out) {
        rows.push_back(v.values);
    }
    cache_->store(key, canonical_embed_request(texts, inner_->id()), rows);
    return out;
}

SearchResult CachingSearchProvider::web_search_exact(const std::string& phrase) {
    CacheKey key =
        make_cache_key(ProviderKind::search, canonical_search_request(phrase, inner_->id()));
    json cached;
    if (cache_->load(key, &cached) && cached.is_object()) {
        return SearchResult{cached.value("query", phrase),
                            cached.value("total_results", uint64_t{0})};
    }
    SearchResult result = inner_->web_search_exact(phrase);
    cache_->store(key, canonical_search_request(phrase, inner_->id()),
                  json{{"query", result.query}, {"total_results", result.total_results}});
    return result;
}

void validate_embeddings(const std::vector<EmbeddingVector>& vectors, size_t expected_count,
                         size_t expected_dimension) {
    if (vectors.size() != expected_count) {
        throw ProviderError(ProviderErrorKind::protocol,
                            "embedding backend returned " + std::to_string(vectors.size()) +
                                " vectors for " + std::to_string(expected_count) + " texts");
    }
    size_t dim = expected_dimension;
    for (const auto& v : vectors) {
        if (dim == 0) {
            dim = v.dimension();
        }
        if (v.dimension() != dim || v.dimension() == 0) {
            throw ProviderError(ProviderErrorKind::protocol, "embedding dimension mismatch");
        }
        for (float x : v.values) {
            if (!std::isfinite(x)) {
                throw ProviderError(ProviderErrorKind::protocol, "non-finite embedding component");
            }
        }
    }
}

}  // namespace hypobench
