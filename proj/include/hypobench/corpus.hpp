#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>

#include "hypobench/jsonl.hpp"

namespace hypobench {

struct WikiPage {
    std::string page_id;
    std::string title;       // whitespace-trimmed article title
    std::string definition;  // first paragraph of the article body
};

struct CorpusStats {
    uint64_t page_count = 0;
    std::string dump_date;
    std::string build_digest;
    uint64_t dropped_no_paragraph = 0;
    uint64_t duplicate_titles = 0;
    uint64_t malformed_lines = 0;

    json to_json() const;
    static CorpusStats from_json(const json& j);
};

struct CorpusPaths {
    std::filesystem::path store;    // one JSON record per page
    std::filesystem::path index;    // sidecar title -> byte offset table
    std::filesystem::path stats;
    std::filesystem::path rejects;  // malformed / dropped / duplicate lines

    static CorpusPaths in_dir(const std::filesystem::path& dir);
};

// Builds the local page store from a line-delimited dump. Accepted record
// shapes: {"wikipedia_id"|"id"|"page_id", "wikipedia_title"|"title",
// "text": [paragraphs...] | "text": "body"}. A leading paragraph that just
// repeats the title is skipped; pages with no remaining paragraph are dropped
// and counted. Duplicate titles keep the first occurrence. Malformed lines go
// to the reject log and ingestion continues; an unreadable file is fatal.
CorpusStats ingest_dump(const std::filesystem::path& dump_path, const CorpusPaths& out,
                        const std::string& dump_date = "");

// Read-only view over an ingested store. Lookups are case-sensitive byte
// comparisons after surrounding-whitespace trim on both sides.
class CorpusStore {
public:
    static CorpusStore open(const CorpusPaths& paths);

    std::optional<WikiPage> lookup_exact_title(std::string_view candidate) const;

    // Resolves a page by its identifier (vector-index entries carry ids).
    std::optional<WikiPage> lookup_page_id(const std::string& page_id) const;

    // Pages in store order.
    void for_each(const std::function<void(const WikiPage&)>& fn) const;

    size_t size() const { return offsets_by_title_.size(); }
    const CorpusStats& stats() const { return stats_; }

private:
    std::optional<WikiPage> read_at(std::streamoff offset) const;

    CorpusPaths paths_;
    CorpusStats stats_;
    std::unordered_map<std::string, std::streamoff> offsets_by_title_;
    std::unordered_map<std::string, std::streamoff> offsets_by_id_;
};

std::string trim_copy(std::string_view s);

}  // namespace hypobench
