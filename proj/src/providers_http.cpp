#include "hypobench/providers_http.hpp"

#include <httplib.h>

#include <cstdlib>
#include <memory>
#include <sstream>

namespace hypobench {

namespace {

struct SplitUrl {
    std::string host;  // scheme://host[:port]
    std::string prefix;  // path prefix, may be empty
};

SplitUrl split_url(const std::string& base_url) {
    size_t scheme = base_url.find("://");
    if (scheme == std::string::npos) {
        throw DataError("base_url must include a scheme: " + base_url);
    }
    size_t path = base_url.find('/', scheme + 3);
    if (path == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {base_url.substr(0, path), prefix};
}

std::string api_key_from_env(const std::string& env_name) {
    if (env_name.empty()) {
        return "";
    }
    const char* value = std::getenv(env_name.c_str());
    return value ? value : "";
}

void throw_for_status(int status, const std::string& body) {
    if (status == 429) {
        throw ProviderError(ProviderErrorKind::rate_limit, "backend rate limited (429)");
    }
    if (status >= 500) {
        throw ProviderError(ProviderErrorKind::server,
                            "backend error " + std::to_string(status) + ": " + body.substr(0, 200));
    }
    throw ProviderError(ProviderErrorKind::protocol,
                        "backend rejected request, status " + std::to_string(status) + ": " +
                            body.substr(0, 200));
}

json post_json(const HttpBackendConfig& config, const std::string& path, const json& payload) {
    SplitUrl url = split_url(config.base_url);
    auto op = [&]() -> json {
        httplib::Client client(url.host);
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);
        httplib::Headers headers;
        std::string key = api_key_from_env(config.api_key_env);
        if (!key.empty()) {
            headers.emplace("Authorization", "Bearer " + key);
        }
        auto res = client.Post(url.prefix + path, headers, payload.dump(), "application/json");
        if (!res) {
            throw ProviderError(ProviderErrorKind::transport,
                                "transport failure: " + httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw_for_status(res->status, res->body);
        }
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded()) {
            throw ProviderError(ProviderErrorKind::protocol, "backend returned invalid JSON");
        }
        return body;
    };
    return with_retries(config.retry, op);
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpBackendConfig config) : config_(std::move(config)) {}

std::string HttpChatProvider::chat(const ChatRequest& req) {
    req.validate();
    json messages = json::array();
    if (!req.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
    }
    for (size_t i = 0; i < req.user_turns.size(); ++i) {
        messages.push_back({{"role", "user"}, {"content", req.user_turns[i]}});
        if (i < req.assistant_turns.size()) {
            messages.push_back({{"role", "assistant"}, {"content", req.assistant_turns[i]}});
        }
    }
    json payload{{"model", req.model_id.empty() ? config_.model : req.model_id},
                 {"temperature", req.temperature},
                 {"messages", messages}};
    json body = post_json(config_, "/chat/completions", payload);
    if (!body.contains("choices") || body["choices"].empty()) {
        throw ProviderError(ProviderErrorKind::protocol, "chat response has no choices");
    }
    std::string text = body["choices"][0].value("message", json::object()).value("content", "");
    if (text.empty()) {
        throw ProviderError(ProviderErrorKind::empty_response, "backend returned an empty completion");
    }
    return text;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpBackendConfig config, size_t expected_dimension)
    : config_(std::move(config)), expected_dimension_(expected_dimension) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw DataError("embed called with no texts");
    }
    json payload{{"model", config_.model}, {"input", texts}};
    json body = post_json(config_, "/embeddings", payload);
    if (!body.contains("data") || !body["data"].is_array()) {
        throw ProviderError(ProviderErrorKind::protocol, "embedding response has no data array");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(body["data"].size());
    for (const auto& row : body["data"]) {
        EmbeddingVector v;
        v.values = row.value("embedding", std::vector<float>{});
        out.push_back(std::move(v));
    }
    validate_embeddings(out, texts.size(), expected_dimension_);
    return out;
}

HttpSearchProvider::HttpSearchProvider(HttpSearchConfig config) : config_(std::move(config)) {}

SearchResult HttpSearchProvider::web_search_exact(const std::string& phrase) {
    if (phrase.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw DataError("search phrase is blank");
    }
    SplitUrl url = split_url(config_.base_url);
    auto op = [&]() -> SearchResult {
        httplib::Client client(url.host);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Params params;
        std::string key = api_key_from_env(config_.api_key_env);
        if (!key.empty()) {
            params.emplace("key", key);
        }
        std::string cx = api_key_from_env(config_.cx_env);
        if (!cx.empty()) {
            params.emplace("cx", cx);
        }
        for (const auto& [k, v] : config_.params) {
            params.emplace(k, v);
        }
        params.emplace("q", "\"" + phrase + "\"");
        auto res = client.Get(url.prefix + config_.path, params, httplib::Headers{});
        if (!res) {
            throw ProviderError(ProviderErrorKind::transport,
                                "transport failure: " + httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw_for_status(res->status, res->body);
        }
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded()) {
            throw ProviderError(ProviderErrorKind::protocol, "search response is not JSON");
        }
        // Walk the configured dotted field path; the count may be a string.
        json node = body;
        std::istringstream fields(config_.total_results_field);
        std::string field;
        while (std::getline(fields, field, '.')) {
            if (!node.is_object() || !node.contains(field)) {
                throw ProviderError(ProviderErrorKind::protocol,
                                    "search response lacks field " + config_.total_results_field);
            }
            node = node[field];
        }
        uint64_t total = 0;
        if (node.is_string()) {
            total = std::stoull(node.get<std::string>());
        } else if (node.is_number()) {
            total = node.get<uint64_t>();
        } else {
            throw ProviderError(ProviderErrorKind::protocol, "unexpected total-results type");
        }
        return SearchResult{phrase, total};
    };
    return with_retries(config_.retry, op);
}

}  // namespace hypobench
