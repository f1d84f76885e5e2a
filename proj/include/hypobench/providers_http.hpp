#pragma once

#include <map>
#include <string>

#include "hypobench/providers.hpp"

namespace hypobench {

// Common HTTP backend settings. api_key_env names an environment variable so
// keys never land in config files or artifacts.
struct HttpBackendConfig {
    std::string base_url;       // e.g. "https://api.openai.com/v1" or "http://127.0.0.1:8089"
    std::string model;          // backend model identifier
    std::string api_key_env;    // environment variable holding the bearer key
    RetryPolicy retry;
    int timeout_seconds = 120;
};

// JSON chat-completion convention: POST {base}/chat/completions with
// system/user/assistant messages, read choices[0].message.content.
class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpBackendConfig config);

    std::string chat(const ChatRequest& req) override;
    std::string id() const override { return config_.model; }

private:
    HttpBackendConfig config_;
};

// POST {base}/embeddings with {"model", "input"}; expects data[i].embedding.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(HttpBackendConfig config, size_t expected_dimension = 0);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return config_.model; }

private:
    HttpBackendConfig config_;
    size_t expected_dimension_;
};

// Custom-search convention: GET {base}{path}?key=...&cx=...&q="phrase". The
// result-count field and any extra query parameters are configurable because
// engines disagree about them.
struct HttpSearchConfig {
    std::string base_url;
    std::string path = "/customsearch/v1";
    std::string api_key_env;
    std::string cx_env;                          // engine id variable, optional
    std::map<std::string, std::string> params;   // extra fixed query params (gl, lr, ...)
    std::string total_results_field = "searchInformation.totalResults";
    RetryPolicy retry;
    int timeout_seconds = 60;
};

class HttpSearchProvider : public SearchProvider {
public:
    explicit HttpSearchProvider(HttpSearchConfig config);

    SearchResult web_search_exact(const std::string& phrase) override;
    std::string id() const override { return "http-search"; }

private:
    HttpSearchConfig config_;
};

}  // namespace hypobench
