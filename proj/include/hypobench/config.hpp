#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "hypobench/providers.hpp"

namespace hypobench {

struct BackendConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env;
};

struct SearchConfig {
    std::string base_url;
    std::string path = "/customsearch/v1";
    std::string api_key_env = "SEARCH_API_KEY";
    std::string cx_env = "SEARCH_ENGINE_ID";
    std::string total_results_field = "searchInformation.totalResults";
    std::map<std::string, std::string> params;
};

struct EmbedConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env;
    size_t dimension = 0;  // 0 = accept backend dimension
};

struct MockConfig {
    uint64_t seed = 4;
    size_t dimension = 64;
    int pages = 1200;
    int terms_per_topic = 50;
};

// Run configuration. Every key has a default so a missing file (or {}) still
// drives a full mock run; live runs set the backend sections.
struct Config {
    std::filesystem::path cache_dir = ".hypobench-cache";
    bool cache_enabled = true;
    RetryPolicy retry{3, 250, true};
    int parallelism = 4;
    int list_retries = 2;
    bool drop_hyphenated_terms = false;
    int knn_k = 50;

    BackendConfig generator;
    BackendConfig responder;
    BackendConfig evaluator;
    EmbedConfig embed;
    SearchConfig search;
    MockConfig mock;

    std::string digest;  // digest of the canonical serialized form

    static Config load(const std::filesystem::path& path);  // empty path = defaults
    json to_json() const;
};

// The live providers per config, or deterministic mocks when mock is set.
// Chat/embed/search calls go through the persistent call cache unless caching
// is disabled; mock runs never cache (they are already reproducible).
struct ProviderSet {
    std::shared_ptr<ChatProvider> generator;
    std::shared_ptr<ChatProvider> responder;
    std::shared_ptr<ChatProvider> evaluator;
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<SearchProvider> search;
    std::shared_ptr<CallCache> cache;
    size_t embed_dimension = 0;
};

ProviderSet make_providers(const Config& config, bool mock);

}  // namespace hypobench
