#include "hypobench/corpus.hpp"

#include <fstream>

#include "hypobench/common.hpp"
#include "hypobench/digest.hpp"

namespace hypobench {

namespace fs = std::filesystem;

std::string trim_copy(std::string_view s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) {
        return "";
    }
    size_t b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

json CorpusStats::to_json() const {
    return json{{"page_count", page_count},
                {"dump_date", dump_date},
                {"build_digest", build_digest},
                {"dropped_no_paragraph", dropped_no_paragraph},
                {"duplicate_titles", duplicate_titles},
                {"malformed_lines", malformed_lines}};
}

CorpusStats CorpusStats::from_json(const json& j) {
    CorpusStats s;
    s.page_count = j.value("page_count", uint64_t{0});
    s.dump_date = j.value("dump_date", "");
    s.build_digest = j.value("build_digest", "");
    s.dropped_no_paragraph = j.value("dropped_no_paragraph", uint64_t{0});
    s.duplicate_titles = j.value("duplicate_titles", uint64_t{0});
    s.malformed_lines = j.value("malformed_lines", uint64_t{0});
    return s;
}

CorpusPaths CorpusPaths::in_dir(const fs::path& dir) {
    return CorpusPaths{dir / "corpus.jsonl", dir / "corpus.idx.jsonl",
                       dir / "corpus_stats.json", dir / "corpus_rejects.jsonl"};
}

namespace {

std::string first_string(const json& rec, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        if (rec.contains(key)) {
            const auto& v = rec[key];
            if (v.is_string()) {
                return v.get<std::string>();
            }
            if (v.is_number_integer()) {
                return std::to_string(v.get<int64_t>());
            }
        }
    }
    return "";
}

// First usable paragraph: non-blank and not a mere repetition of the title.
std::string extract_definition(const json& rec, const std::string& title) {
    std::vector<std::string> paragraphs;
    if (rec.contains("text")) {
        const auto& text = rec["text"];
        if (text.is_array()) {
            for (const auto& p : text) {
                if (p.is_string()) {
                    paragraphs.push_back(p.get<std::string>());
                }
            }
        } else if (text.is_string()) {
            std::istringstream body(text.get<std::string>());
            std::string line;
            while (std::getline(body, line)) {
                paragraphs.push_back(line);
            }
        }
    }
    for (const auto& p : paragraphs) {
        std::string trimmed = trim_copy(p);
        if (!trimmed.empty() && trimmed != title) {
            return trimmed;
        }
    }
    return "";
}

}  // namespace

CorpusStats ingest_dump(const fs::path& dump_path, const CorpusPaths& out,
                        const std::string& dump_date) {
    std::ifstream dump(dump_path, std::ios::binary);
    if (!dump) {
        throw DataError("cannot read dump: " + dump_path.string());
    }
    if (out.store.has_parent_path()) {
        fs::create_directories(out.store.parent_path());
    }
    fs::remove(out.rejects);
    RejectLog rejects(out.rejects);

    fs::path store_tmp = out.store;
    store_tmp += ".tmp";
    fs::path index_tmp = out.index;
    index_tmp += ".tmp";
    std::ofstream store(store_tmp, std::ios::binary | std::ios::trunc);
    std::ofstream index(index_tmp, std::ios::binary | std::ios::trunc);
    if (!store || !index) {
        throw DataError("cannot write store under " + out.store.string());
    }

    CorpusStats stats;
    stats.dump_date = dump_date;
    std::unordered_map<std::string, bool> seen_titles;
    std::string line;
    size_t line_no = 0;
    std::streamoff offset = 0;
    while (std::getline(dump, line)) {
        ++line_no;
        if (trim_copy(line).empty()) {
            continue;
        }
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            ++stats.malformed_lines;
            rejects.add(line_no, "malformed", line.substr(0, 300));
            continue;
        }
        std::string title = trim_copy(first_string(rec, {"wikipedia_title", "title"}));
        if (title.empty()) {
            ++stats.malformed_lines;
            rejects.add(line_no, "missing-title", line.substr(0, 300));
            continue;
        }
        std::string definition = extract_definition(rec, title);
        if (definition.empty()) {
            ++stats.dropped_no_paragraph;
            rejects.add(line_no, "no-paragraph", title);
            continue;
        }
        if (!seen_titles.emplace(title, true).second) {
            ++stats.duplicate_titles;
            rejects.add(line_no, "duplicate-title", title);
            continue;
        }
        std::string page_id = first_string(rec, {"wikipedia_id", "id", "page_id"});
        if (page_id.empty()) {
            page_id = "line-" + std::to_string(line_no);
        }
        json out_rec{{"page_id", page_id}, {"title", title}, {"definition", definition}};
        std::string serialized = out_rec.dump();
        store << serialized << '\n';
        index << json{{"t", title}, {"i", page_id}, {"o", offset}}.dump() << '\n';
        offset += static_cast<std::streamoff>(serialized.size()) + 1;
        ++stats.page_count;
    }
    store.close();
    index.close();
    fs::rename(store_tmp, out.store);
    fs::rename(index_tmp, out.index);

    stats.build_digest = sha256_file_hex(out.store.string());
    write_file_atomic(out.stats, stats.to_json().dump(2));
    return stats;
}

CorpusStore CorpusStore::open(const CorpusPaths& paths) {
    CorpusStore store;
    store.paths_ = paths;
    store.stats_ = CorpusStats::from_json(json::parse(read_file(paths.stats)));
    for (auto& line : read_jsonl(paths.index)) {
        auto offset = line.value["o"].get<std::streamoff>();
        store.offsets_by_title_.emplace(line.value["t"].get<std::string>(), offset);
        if (line.value.contains("i")) {
            store.offsets_by_id_.emplace(line.value["i"].get<std::string>(), offset);
        }
    }
    return store;
}

std::optional<WikiPage> CorpusStore::read_at(std::streamoff offset) const {
    std::ifstream in(paths_.store, std::ios::binary);
    if (!in) {
        throw DataError("corpus store vanished: " + paths_.store.string());
    }
    in.seekg(offset);
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("corpus store truncated at offset " + std::to_string(offset));
    }
    json rec = json::parse(line);
    return WikiPage{rec["page_id"].get<std::string>(), rec["title"].get<std::string>(),
                    rec["definition"].get<std::string>()};
}

std::optional<WikiPage> CorpusStore::lookup_exact_title(std::string_view candidate) const {
    auto it = offsets_by_title_.find(trim_copy(candidate));
    if (it == offsets_by_title_.end()) {
        return std::nullopt;
    }
    return read_at(it->second);
}

std::optional<WikiPage> CorpusStore::lookup_page_id(const std::string& page_id) const {
    auto it = offsets_by_id_.find(page_id);
    if (it == offsets_by_id_.end()) {
        return std::nullopt;
    }
    return read_at(it->second);
}

void CorpusStore::for_each(const std::function<void(const WikiPage&)>& fn) const {
    std::ifstream in(paths_.store, std::ios::binary);
    if (!in) {
        throw DataError("cannot read corpus store: " + paths_.store.string());
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        json rec = json::parse(line);
        fn(WikiPage{rec["page_id"].get<std::string>(), rec["title"].get<std::string>(),
                    rec["definition"].get<std::string>()});
    }
}

}  // namespace hypobench
