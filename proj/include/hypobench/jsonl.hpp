#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hypobench {

using json = nlohmann::ordered_json;

// Writes content to path via a temp file + rename so readers never observe
// a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// One parsed line. line_no is 1-based.
struct JsonlLine {
    size_t line_no;
    json value;
};

// Reads every line; malformed lines are reported through on_reject (if set)
// and skipped. Throws DataError if the file cannot be opened.
std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path,
                                  const std::function<void(size_t, const std::string&)>& on_reject = {});

// Serializes one record per line, atomically.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);

// Append-only log of rejected input lines: {line_no, reason, raw}.
class RejectLog {
public:
    explicit RejectLog(std::filesystem::path path) : path_(std::move(path)) {}

    void add(size_t line_no, const std::string& reason, const std::string& raw);
    size_t count() const { return count_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    size_t count_ = 0;
};

// Keyed append-only checkpoint for resumable stages. Each put() appends a
// {"k": key, "v": value} line immediately; a fresh run over the same file
// skips keys that are already present.
class Checkpoint {
public:
    explicit Checkpoint(std::filesystem::path path);

    bool contains(const std::string& key) const { return done_.count(key) > 0; }
    const json* get(const std::string& key) const;
    void put(const std::string& key, json value);
    size_t size() const { return done_.size(); }

    // Removes the checkpoint file; call after the final artifact is written.
    void discard();

private:
    std::filesystem::path path_;
    std::unordered_map<std::string, json> done_;
};

}  // namespace hypobench
