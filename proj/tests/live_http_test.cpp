// Drives the CLI through real HTTP providers (a local server speaking the
// chat/embeddings/search conventions) instead of --mock, with the call cache
// on. Covers the config -> HTTP client -> cache -> pipeline wiring end to
// end, exactly as a live run would use it.

#include <gtest/gtest.h>
#include <httplib.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "hypobench/digest.hpp"
#include "hypobench/providers_mock.hpp"
#include "test_support.hpp"

namespace hb = hypobench;
namespace fs = std::filesystem;
using hb::testing::TempDir;

namespace {

// Local backend: the deterministic offline generators behind HTTP endpoints.
class LocalBackend {
public:
    LocalBackend() {
        hb::MockChatOptions chat_opts;
        chat_opts.terms_per_topic = 4;
        chat_opts.corpus_pages = 200;
        chat_ = std::make_unique<hb::MockChatProvider>(chat_opts);
        embed_ = std::make_unique<hb::MockEmbeddingProvider>(
            hb::MockEmbeddingOptions{.seed = 1, .dimension = 24});
        search_ = std::make_unique<hb::MockSearchProvider>(
            hb::MockSearchOptions{.zero_results = {}, .default_total_results = 0});

        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            ++chat_calls;
            auto body = hb::json::parse(req.body);
            hb::ChatRequest chat_req;
            chat_req.temperature = body.value("temperature", 0.0);
            chat_req.model_id = body.value("model", "");
            for (const auto& message : body["messages"]) {
                std::string role = message.value("role", "");
                std::string content = message.value("content", "");
                if (role == "system") {
                    chat_req.system_prompt = content;
                } else if (role == "user") {
                    chat_req.user_turns.push_back(content);
                } else if (role == "assistant") {
                    chat_req.assistant_turns.push_back(content);
                }
            }
            hb::json out{{"choices",
                          {{{"message",
                             {{"role", "assistant"}, {"content", chat_->chat(chat_req)}}}}}}};
            res.set_content(out.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = hb::json::parse(req.body);
            auto vectors = embed_->embed(body["input"].get<std::vector<std::string>>());
            hb::json data = hb::json::array();
            for (const auto& v : vectors) {
                data.push_back({{"embedding", v.values}});
            }
            res.set_content(hb::json{{"data", data}}.dump(), "application/json");
        });
        server_.Get("/customsearch/v1", [this](const httplib::Request& req,
                                               httplib::Response& res) {
            std::string q = req.get_param_value("q");
            if (q.size() >= 2 && q.front() == '"' && q.back() == '"') {
                q = q.substr(1, q.size() - 2);
            }
            auto result = search_->web_search_exact(q);
            hb::json out{{"searchInformation",
                          {{"totalResults", std::to_string(result.total_results)}}}};
            res.set_content(out.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~LocalBackend() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    std::string search_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> chat_calls{0};

private:
    std::unique_ptr<hb::MockChatProvider> chat_;
    std::unique_ptr<hb::MockEmbeddingProvider> embed_;
    std::unique_ptr<hb::MockSearchProvider> search_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string binary_path() {
    const char* env = std::getenv("HYPOBENCH_BIN");
    return env ? env : "";
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    std::string cmd = binary_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return -1;
    }
    std::array<char, 4096> buffer{};
    std::string collected;
    size_t got;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        collected.append(buffer.data(), got);
    }
    int status = pclose(pipe);
    if (output != nullptr) {
        *output = collected;
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(LiveHttpPipeline, FullFlowThroughHttpProvidersWithCache) {
    ASSERT_FALSE(binary_path().empty()) << "HYPOBENCH_BIN not set";
    LocalBackend backend;
    TempDir dir("live_http");
    fs::path run = dir.path / "run";
    fs::path cache = dir.path / "cache";

    hb::json config{
        {"generator", {{"base_url", backend.base_url()}, {"model", "local-gen"}}},
        {"responder", {{"base_url", backend.base_url()}, {"model", "local-sut"}}},
        {"evaluator", {{"base_url", backend.base_url()}, {"model", "local-judge"}}},
        {"embed", {{"base_url", backend.base_url()}, {"model", "local-embed"}, {"dimension", 24}}},
        {"search", {{"base_url", backend.search_url()}, {"api_key_env", ""}, {"cx_env", ""}}},
        {"cache_dir", cache.string()},
        {"parallelism", 4},
    };
    fs::path config_path = dir.path / "config.json";
    hb::write_file_atomic(config_path, config.dump());

    // The encyclopedia dump comes from the library (no --mock anywhere).
    fs::path dump = dir.path / "dump.jsonl";
    hb::write_mock_dump(dump, 1, 200);

    const std::string base = " --run-dir " + run.string() + " --config " + config_path.string();
    std::string output;
    ASSERT_EQ(run_cli("corpus-ingest --input " + dump.string() + base, &output), 0) << output;
    for (const std::string& cmd :
         {std::string("index-build"), std::string("gen-topics"), std::string("gen-terms"),
          std::string("validate-terms"), std::string("retrieve-valid"), std::string("compose"),
          std::string("sample --level q180"),
          std::string("respond --model local-sut --level q180"),
          std::string("evaluate --model local-sut --level q180"), std::string("report")}) {
        ASSERT_EQ(run_cli(cmd + base, &output), 0) << cmd << " failed:\n" << output;
    }
    ASSERT_TRUE(fs::exists(run / "score_local-sut.json"));
    auto score = hb::json::parse(hb::read_file(run / "score_local-sut.json"));
    double hts = score["score"]["hts"].get<double>();
    EXPECT_GE(hts, 0.0);
    EXPECT_LE(hts, 100.0);
    EXPECT_TRUE(fs::exists(cache) && !fs::is_empty(cache));

    // A rebuilt run directory with the same cache replays every chat call
    // from disk: the backend sees no new requests.
    int calls_before = backend.chat_calls.load();
    fs::path run2 = dir.path / "run2";
    ASSERT_EQ(run_cli("corpus-ingest --input " + dump.string() + " --run-dir " + run2.string() +
                          " --config " + config_path.string(),
                      &output),
              0)
        << output;
    for (const std::string& cmd : {std::string("index-build"), std::string("gen-topics"),
                                   std::string("gen-terms"), std::string("validate-terms")}) {
        ASSERT_EQ(run_cli(cmd + " --run-dir " + run2.string() + " --config " +
                              config_path.string(),
                          &output),
                  0)
            << cmd << " failed:\n" << output;
    }
    EXPECT_EQ(backend.chat_calls.load(), calls_before)
        << "identical requests must be served from the call cache";

    // And the cached rerun converges on identical artifacts.
    EXPECT_EQ(hb::sha256_file_hex((run / "terms_generated.jsonl").string()),
              hb::sha256_file_hex((run2 / "terms_generated.jsonl").string()));
}

}  // namespace
