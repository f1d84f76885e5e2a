#include "hypobench/config.hpp"

#include "hypobench/digest.hpp"
#include "hypobench/jsonl.hpp"
#include "hypobench/providers_http.hpp"
#include "hypobench/providers_mock.hpp"

namespace hypobench {

namespace {

BackendConfig backend_from(const json& j) {
    BackendConfig b;
    b.base_url = j.value("base_url", "");
    b.model = j.value("model", "");
    b.api_key_env = j.value("api_key_env", "");
    return b;
}

json backend_to(const BackendConfig& b) {
    return json{{"base_url", b.base_url}, {"model", b.model}, {"api_key_env", b.api_key_env}};
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    json j = json::object();
    if (!path.empty()) {
        j = json::parse(read_file(path), nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw DataError("config file is not a JSON object: " + path.string());
        }
    }
    Config c;
    c.cache_dir = j.value("cache_dir", c.cache_dir.string());
    c.cache_enabled = j.value("cache_enabled", c.cache_enabled);
    json retry = j.value("retry", json::object());
    c.retry.attempts = retry.value("attempts", c.retry.attempts);
    c.retry.initial_backoff_ms = retry.value("initial_backoff_ms", c.retry.initial_backoff_ms);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.list_retries = j.value("list_retries", c.list_retries);
    c.drop_hyphenated_terms = j.value("drop_hyphenated_terms", c.drop_hyphenated_terms);
    c.knn_k = j.value("knn_k", c.knn_k);

    c.generator = backend_from(j.value("generator", json::object()));
    c.responder = backend_from(j.value("responder", json::object()));
    c.evaluator = backend_from(j.value("evaluator", json::object()));

    json embed = j.value("embed", json::object());
    c.embed.base_url = embed.value("base_url", "");
    c.embed.model = embed.value("model", "");
    c.embed.api_key_env = embed.value("api_key_env", "");
    c.embed.dimension = embed.value("dimension", size_t{0});

    json search = j.value("search", json::object());
    c.search.base_url = search.value("base_url", "");
    c.search.path = search.value("path", c.search.path);
    c.search.api_key_env = search.value("api_key_env", c.search.api_key_env);
    c.search.cx_env = search.value("cx_env", c.search.cx_env);
    c.search.total_results_field =
        search.value("total_results_field", c.search.total_results_field);
    c.search.params = search.value("params", std::map<std::string, std::string>{});

    json mock = j.value("mock", json::object());
    c.mock.seed = mock.value("seed", c.mock.seed);
    c.mock.dimension = mock.value("dimension", c.mock.dimension);
    c.mock.pages = mock.value("pages", c.mock.pages);
    c.mock.terms_per_topic = mock.value("terms_per_topic", c.mock.terms_per_topic);

    // Only keys that change what gets generated or how it is judged enter
    // the digest; operational knobs (cache location, parallelism, retry
    // pacing) never invalidate finished stages.
    json semantic{{"generator", backend_to(c.generator)},
                  {"responder", backend_to(c.responder)},
                  {"evaluator", backend_to(c.evaluator)},
                  {"embed", {{"base_url", c.embed.base_url},
                             {"model", c.embed.model},
                             {"dimension", c.embed.dimension}}},
                  {"search", {{"base_url", c.search.base_url},
                              {"path", c.search.path},
                              {"total_results_field", c.search.total_results_field},
                              {"params", c.search.params}}},
                  {"mock", {{"seed", c.mock.seed},
                            {"dimension", c.mock.dimension},
                            {"pages", c.mock.pages},
                            {"terms_per_topic", c.mock.terms_per_topic}}},
                  {"list_retries", c.list_retries},
                  {"drop_hyphenated_terms", c.drop_hyphenated_terms},
                  {"knn_k", c.knn_k}};
    c.digest = short_digest(semantic.dump());
    return c;
}

json Config::to_json() const {
    return json{{"cache_dir", cache_dir.string()},
                {"cache_enabled", cache_enabled},
                {"retry", {{"attempts", retry.attempts},
                           {"initial_backoff_ms", retry.initial_backoff_ms}}},
                {"parallelism", parallelism},
                {"list_retries", list_retries},
                {"drop_hyphenated_terms", drop_hyphenated_terms},
                {"knn_k", knn_k},
                {"generator", backend_to(generator)},
                {"responder", backend_to(responder)},
                {"evaluator", backend_to(evaluator)},
                {"embed", {{"base_url", embed.base_url},
                           {"model", embed.model},
                           {"api_key_env", embed.api_key_env},
                           {"dimension", embed.dimension}}},
                {"search", {{"base_url", search.base_url},
                            {"path", search.path},
                            {"api_key_env", search.api_key_env},
                            {"cx_env", search.cx_env},
                            {"total_results_field", search.total_results_field},
                            {"params", search.params}}},
                {"mock", {{"seed", mock.seed},
                          {"dimension", mock.dimension},
                          {"pages", mock.pages},
                          {"terms_per_topic", mock.terms_per_topic}}}};
}

ProviderSet make_providers(const Config& config, bool mock) {
    ProviderSet set;
    if (mock) {
        MockChatOptions chat_opts;
        chat_opts.seed = config.mock.seed;
        chat_opts.corpus_pages = config.mock.pages;
        chat_opts.terms_per_topic = config.mock.terms_per_topic;
        auto chat = std::make_shared<MockChatProvider>(chat_opts);
        set.generator = chat;
        set.responder = chat;
        set.evaluator = chat;
        set.embedder = std::make_shared<MockEmbeddingProvider>(
            MockEmbeddingOptions{config.mock.seed, config.mock.dimension});
        set.embed_dimension = config.mock.dimension;
        MockSearchOptions search_opts;
        search_opts.default_total_results = 0;  // offline runs treat unlisted phrases as unseen
        set.search = std::make_shared<MockSearchProvider>(search_opts);
        return set;
    }

    if (config.cache_enabled) {
        set.cache = std::make_shared<CallCache>(config.cache_dir);
    }
    auto wrap_chat = [&](const BackendConfig& backend) -> std::shared_ptr<ChatProvider> {
        if (backend.base_url.empty()) {
            return nullptr;
        }
        HttpBackendConfig http;
        http.base_url = backend.base_url;
        http.model = backend.model;
        http.api_key_env = backend.api_key_env;
        http.retry = config.retry;
        std::shared_ptr<ChatProvider> provider = std::make_shared<HttpChatProvider>(http);
        if (set.cache) {
            provider = std::make_shared<CachingChatProvider>(provider, set.cache);
        }
        return provider;
    };
    set.generator = wrap_chat(config.generator);
    set.responder = wrap_chat(config.responder);
    set.evaluator = wrap_chat(config.evaluator);

    if (!config.embed.base_url.empty()) {
        HttpBackendConfig http;
        http.base_url = config.embed.base_url;
        http.model = config.embed.model;
        http.api_key_env = config.embed.api_key_env;
        http.retry = config.retry;
        std::shared_ptr<EmbeddingProvider> embedder =
            std::make_shared<HttpEmbeddingProvider>(http, config.embed.dimension);
        if (set.cache) {
            embedder = std::make_shared<CachingEmbeddingProvider>(embedder, set.cache);
        }
        set.embedder = embedder;
        set.embed_dimension = config.embed.dimension;
    }

    if (!config.search.base_url.empty()) {
        HttpSearchConfig http;
        http.base_url = config.search.base_url;
        http.path = config.search.path;
        http.api_key_env = config.search.api_key_env;
        http.cx_env = config.search.cx_env;
        http.params = config.search.params;
        http.total_results_field = config.search.total_results_field;
        http.retry = config.retry;
        std::shared_ptr<SearchProvider> search = std::make_shared<HttpSearchProvider>(http);
        if (set.cache) {
            search = std::make_shared<CachingSearchProvider>(search, set.cache);
        }
        set.search = search;
    }
    return set;
}

}  // namespace hypobench
