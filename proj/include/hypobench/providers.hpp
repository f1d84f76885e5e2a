#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hypobench/common.hpp"
#include "hypobench/jsonl.hpp"

namespace hypobench {

// One chat call. user_turns carries the user side of the conversation in
// order; assistant_turns carries the model replies already exchanged, so
// assistant_turns.size() == user_turns.size() - 1 on a well-formed request.
struct ChatRequest {
    std::string system_prompt;
    std::vector<std::string> user_turns;
    std::vector<std::string> assistant_turns;
    double temperature = 0.0;
    std::string model_id;

    // Throws DataError when the invariants above are violated.
    void validate() const;
};

struct EmbeddingVector {
    std::vector<float> values;

    size_t dimension() const { return values.size(); }
};

struct SearchResult {
    std::string query;
    uint64_t total_results = 0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string chat(const ChatRequest& req) = 0;
    virtual std::string id() const = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // Output has one vector per input text, all with the same dimension.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string id() const = 0;
};

class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    // The phrase is sent quoted; total_results comes from the engine's count.
    virtual SearchResult web_search_exact(const std::string& phrase) = 0;
    virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// Cache

enum class ProviderKind { chat, embed, search };

const char* to_string(ProviderKind kind);

// Canonical JSON forms: identical requests canonicalize identically, whatever
// the call site, so cache keys are stable across runs.
json canonical_chat_request(const ChatRequest& req);
json canonical_embed_request(const std::vector<std::string>& texts, const std::string& backend_id);
json canonical_search_request(const std::string& phrase, const std::string& backend_id);

struct CacheKey {
    ProviderKind provider_kind;
    std::string request_digest;  // sha256 of the canonical request

    std::string relative_path() const;
};

CacheKey make_cache_key(ProviderKind kind, const json& canonical_request);

// Content-addressed directory of JSON records {key, request, response,
// timestamp}. Writes go through a temp file + rename and are serialized
// in-process, so concurrent callers never observe torn records.
class CallCache {
public:
    explicit CallCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    bool load(const CacheKey& key, json* response_out) const;
    void store(const CacheKey& key, const json& request, const json& response);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Retry

struct RetryPolicy {
    int attempts = 3;
    int initial_backoff_ms = 250;
    // Tests set this to skip real sleeps.
    bool sleep = true;
};

// Runs op up to policy.attempts times, backing off exponentially. Retries
// only retryable ProviderErrors (transport / 5xx / rate-limit); after the
// budget is exhausted rethrows as provider-unavailable, preserving the
// rate-limit kind so callers can checkpoint and resume.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& op) -> decltype(op()) {
    int backoff_ms = policy.initial_backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return op();
        } catch (const ProviderError& e) {
            if (!e.retryable()) {
                throw;
            }
            if (attempt >= policy.attempts) {
                if (e.kind() == ProviderErrorKind::rate_limit) {
                    throw;
                }
                throw ProviderError(ProviderErrorKind::unavailable,
                                    std::string("retries exhausted: ") + e.what());
            }
            if (policy.sleep && backoff_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            }
            backoff_ms *= 2;
        }
    }
}

// ---------------------------------------------------------------------------
// Caching wrappers

class CachingChatProvider : public ChatProvider {
public:
    CachingChatProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<CallCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}

    std::string chat(const ChatRequest& req) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<ChatProvider> inner_;
    std::shared_ptr<CallCache> cache_;
};

class CachingEmbeddingProvider : public EmbeddingProvider {
public:
    CachingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                             std::shared_ptr<CallCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<CallCache> cache_;
};

class CachingSearchProvider : public SearchProvider {
public:
    CachingSearchProvider(std::shared_ptr<SearchProvider> inner, std::shared_ptr<CallCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}

    SearchResult web_search_exact(const std::string& phrase) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<SearchProvider> inner_;
    std::shared_ptr<CallCache> cache_;
};

// Validates that a batch of vectors is non-empty, finite and of uniform
// dimension; throws a protocol ProviderError otherwise. expected_dimension 0
// means "take whatever the backend returns".
void validate_embeddings(const std::vector<EmbeddingVector>& vectors, size_t expected_count,
                         size_t expected_dimension);

}  // namespace hypobench
