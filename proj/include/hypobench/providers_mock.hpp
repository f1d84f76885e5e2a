#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypobench/providers.hpp"

namespace hypobench {

// ---------------------------------------------------------------------------
// Synthetic encyclopedia shared by the mock providers and the mock dump
// writer: page i has a fixed title and a one-paragraph definition.

struct MockPage {
    std::string page_id;
    std::string title;
    std::string definition;
};

std::vector<MockPage> mock_encyclopedia(uint64_t seed, int pages);

// Writes a line-delimited dump in the ingest format.
void write_mock_dump(const std::filesystem::path& path, uint64_t seed, int pages);

// ---------------------------------------------------------------------------
// Deterministic offline chat backend.
//
// Recognizes the pipeline's prompt families (topic listing, term invention,
// explanation follow-up, similar-term suggestion, question composition,
// certainty and meaning judgments) and produces stable, seed-dependent text
// for each. Anything unrecognized is treated as a benchmark question and
// answered like a system under test would answer it.

struct MockChatOptions {
    uint64_t seed = 1;
    int topic_count = 20;
    int terms_per_topic = 50;
    int suggestions_per_term = 50;
    // Size of the synthetic encyclopedia the suggestion lists draw from;
    // must match the pages argument given to write_mock_dump.
    int corpus_pages = 1200;
    // Question slots ("<made-up phrase>|<real phrase>") whose composition
    // omits the made-up/main phrase, tripping the containment gate.
    std::set<std::string> fail_question_slots;
    // Same, but only on the first attempt; the reworded retry succeeds.
    std::set<std::string> fail_question_slots_once;
};

class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(MockChatOptions opts = {});

    std::string chat(const ChatRequest& req) override;
    std::string id() const override { return "mock-chat"; }

    // Exact-response override for a specific request (matched by digest).
    void script(const ChatRequest& req, std::string response);

    int call_count() const { return calls_.load(); }

private:
    MockChatOptions opts_;
    std::vector<MockPage> pool_;  // shared synthetic encyclopedia, built once
    std::map<std::string, std::string> scripted_;
    std::atomic<int> calls_{0};
};

// ---------------------------------------------------------------------------
// Deterministic embedding backend: token n-grams hashed into a fixed number
// of buckets with alternating signs, then length-normalized. Blank text maps
// to the zero vector.

struct MockEmbeddingOptions {
    uint64_t seed = 1;
    size_t dimension = 64;
};

class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(MockEmbeddingOptions opts = {});

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return "mock-embed"; }

    size_t dimension() const { return opts_.dimension; }

private:
    MockEmbeddingOptions opts_;
};

// ---------------------------------------------------------------------------
// Scriptable web search: phrases in zero_results get a zero count, everything
// else gets default_total_results.

struct MockSearchOptions {
    std::set<std::string> zero_results;
    uint64_t default_total_results = 1;
};

class MockSearchProvider : public SearchProvider {
public:
    explicit MockSearchProvider(MockSearchOptions opts = {});

    SearchResult web_search_exact(const std::string& phrase) override;
    std::string id() const override { return "mock-search"; }

private:
    MockSearchOptions opts_;
};

}  // namespace hypobench
