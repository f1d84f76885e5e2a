#include "hypobench/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "hypobench/common.hpp"

namespace hypobench {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw DataError("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<JsonlLine> read_jsonl(const fs::path& path,
                                  const std::function<void(size_t, const std::string&)>& on_reject) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::vector<JsonlLine> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        json value = json::parse(line, nullptr, false);
        if (value.is_discarded()) {
            if (on_reject) {
                on_reject(line_no, line);
            }
            continue;
        }
        out.push_back({line_no, std::move(value)});
    }
    return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& records) {
    std::string buf;
    for (const auto& rec : records) {
        buf += rec.dump();
        buf += '\n';
    }
    write_file_atomic(path, buf);
}

void RejectLog::add(size_t line_no, const std::string& reason, const std::string& raw) {
    if (path_.has_parent_path()) {
        fs::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    json rec{{"line_no", line_no}, {"reason", reason}, {"raw", raw}};
    out << rec.dump() << '\n';
    ++count_;
}

Checkpoint::Checkpoint(fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
        for (auto& line : read_jsonl(path_)) {
            if (line.value.contains("k")) {
                done_[line.value["k"].get<std::string>()] = line.value.value("v", json());
            }
        }
    }
}

const json* Checkpoint::get(const std::string& key) const {
    auto it = done_.find(key);
    return it == done_.end() ? nullptr : &it->second;
}

void Checkpoint::put(const std::string& key, json value) {
    if (path_.has_parent_path()) {
        fs::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    json rec{{"k", key}, {"v", value}};
    out << rec.dump() << '\n';
    out.flush();
    done_[key] = std::move(value);
}

void Checkpoint::discard() {
    std::error_code ec;
    fs::remove(path_, ec);
    done_.clear();
}

}  // namespace hypobench
