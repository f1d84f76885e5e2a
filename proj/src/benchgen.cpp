#include "hypobench/benchgen.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "hypobench/digest.hpp"
#include "hypobench/prompts.hpp"
#include "hypobench/textnorm.hpp"

namespace hypobench {

namespace {

const char* kForbiddenWords[] = {"conventional", "traditional", "holistic",
                                 "phenomenon",   "comprehensive", "technique"};

constexpr const char* kListRetryReminder =
    "The previous reply could not be parsed. Respond again with a plain numbered list, one item "
    "per line, and nothing else.";

std::string strip_markdown(std::string s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '*' && c != '`') {
            out += c;
        }
    }
    return out;
}

bool parse_leading_index(const std::string& line, std::string* rest) {
    size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos || !std::isdigit(static_cast<unsigned char>(line[i]))) {
        return false;
    }
    size_t j = i;
    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
        ++j;
    }
    if (j >= line.size() || (line[j] != '.' && line[j] != ')' && line[j] != ':')) {
        return false;
    }
    ++j;
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) {
        ++j;
    }
    *rest = line.substr(j);
    return true;
}

bool parse_bullet(const std::string& line, std::string* rest) {
    size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) {
        return false;
    }
    if (line[i] != '-' && line[i] != '*') {
        return false;
    }
    if (i + 1 >= line.size() || (line[i + 1] != ' ' && line[i + 1] != '\t')) {
        return false;
    }
    *rest = trim_copy(line.substr(i + 2));
    return true;
}

std::vector<std::string> parse_array_literal(const std::string& reply) {
    size_t open = reply.find('[');
    size_t close = reply.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close <= open) {
        return {};
    }
    std::string body = reply.substr(open, close - open + 1);
    json parsed = json::parse(body, nullptr, false);
    std::vector<std::string> items;
    if (parsed.is_array()) {
        for (const auto& item : parsed) {
            if (item.is_string()) {
                std::string v = trim_copy(item.get<std::string>());
                if (!v.empty()) {
                    items.push_back(v);
                }
            }
        }
        return items;
    }
    // Tolerate single-quoted pseudo-Python lists: pull out quoted runs.
    std::string cur;
    char quote = 0;
    for (char c : body) {
        if (quote == 0) {
            if (c == '"' || c == '\'') {
                quote = c;
                cur.clear();
            }
        } else if (c == quote) {
            std::string v = trim_copy(cur);
            if (!v.empty()) {
                items.push_back(v);
            }
            quote = 0;
        } else {
            cur += c;
        }
    }
    return items;
}

std::vector<std::string> lowercase_tokens(const std::string& phrase) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : phrase) {
        if (std::isalpha(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) {
        tokens.push_back(cur);
    }
    return tokens;
}

int word_count(const std::string& phrase) {
    std::istringstream in(phrase);
    std::string w;
    int n = 0;
    while (in >> w) {
        ++n;
    }
    return n;
}

// Chat loop shared by every list-shaped request: parse, retry with a
// corrective turn while parsing fails, give up after the retry budget.
std::vector<std::string> request_list(ChatProvider& chat, ChatRequest req, int retries,
                                      std::string* final_raw) {
    std::string reply;
    for (int attempt = 0;; ++attempt) {
        reply = chat.chat(req);
        auto items = parse_list_items(reply);
        if (!items.empty()) {
            if (final_raw) {
                *final_raw = reply;
            }
            return items;
        }
        if (attempt >= retries) {
            if (final_raw) {
                *final_raw = reply;
            }
            return {};
        }
        req = prompts::with_retry_turn(std::move(req), reply, kListRetryReminder);
    }
}

}  // namespace

std::vector<std::string> parse_list_items(const std::string& reply) {
    auto array_items = parse_array_literal(reply);
    if (!array_items.empty()) {
        return array_items;
    }
    std::vector<std::string> items;
    std::istringstream in(reply);
    std::string line;
    bool in_item = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::string rest;
        // Bullets are detected before markdown stripping ('*' doubles as a
        // bullet marker); numbered items after, so "**1. x**" still parses.
        if (parse_bullet(line, &rest)) {
            items.push_back(trim_copy(strip_markdown(rest)));
            in_item = true;
            continue;
        }
        line = strip_markdown(line);
        if (parse_leading_index(line, &rest)) {
            items.push_back(trim_copy(rest));
            in_item = true;
            continue;
        }
        std::string trimmed = trim_copy(line);
        if (trimmed.empty()) {
            in_item = false;
            continue;
        }
        if (in_item && !items.empty()) {
            items.back() += " " + trimmed;
        }
    }
    return items;
}

std::pair<std::string, std::string> split_phrase_explanation(const std::string& item) {
    size_t colon = item.find(':');
    if (colon == std::string::npos) {
        return {trim_copy(item), ""};
    }
    return {trim_copy(item.substr(0, colon)), trim_copy(item.substr(colon + 1))};
}

json Topic::to_json() const {
    return json{{"index", index}, {"name", name}, {"explanation", explanation}};
}

Topic Topic::from_json(const json& j) {
    return Topic{j.value("name", ""), j.value("explanation", ""), j.value("index", 0)};
}

json HypotheticalTerm::to_json() const {
    return json{{"phrase", phrase},
                {"made_up_definition", made_up_definition},
                {"topic", topic.to_json()},
                {"web_validated", web_validated}};
}

HypotheticalTerm HypotheticalTerm::from_json(const json& j) {
    HypotheticalTerm t;
    t.phrase = j.value("phrase", "");
    t.made_up_definition = j.value("made_up_definition", "");
    t.topic = Topic::from_json(j.value("topic", json::object()));
    t.web_validated = j.value("web_validated", false);
    return t;
}

const char* to_string(ValidSource source) {
    switch (source) {
        case ValidSource::llm_suggestion: return "llm_suggestion";
        case ValidSource::title_sim: return "title_sim";
        case ValidSource::text_sim: return "text_sim";
    }
    return "llm_suggestion";
}

ValidSource valid_source_from(const std::string& name) {
    if (name == "llm_suggestion") return ValidSource::llm_suggestion;
    if (name == "title_sim") return ValidSource::title_sim;
    if (name == "text_sim") return ValidSource::text_sim;
    throw DataError("unknown valid-term source: " + name);
}

json ValidTerm::to_json() const {
    return json{{"phrase", phrase},
                {"definition", definition},
                {"page_id", page_id},
                {"source", to_string(source)},
                {"similarity_rank", similarity_rank}};
}

ValidTerm ValidTerm::from_json(const json& j) {
    ValidTerm t;
    t.phrase = j.value("phrase", "");
    t.definition = j.value("definition", "");
    t.page_id = j.value("page_id", "");
    t.source = valid_source_from(j.value("source", "llm_suggestion"));
    t.similarity_rank = j.value("similarity_rank", 0);
    return t;
}

json TermPair::to_json() const {
    return json{{"pair_id", pair_id},
                {"hypothetical", hypothetical.to_json()},
                {"valid", valid.to_json()},
                {"partner", partner.to_json()},
                {"cross_source_duplicate", cross_source_duplicate}};
}

TermPair TermPair::from_json(const json& j) {
    TermPair p;
    p.pair_id = j.value("pair_id", "");
    p.hypothetical = HypotheticalTerm::from_json(j.value("hypothetical", json::object()));
    p.valid = ValidTerm::from_json(j.value("valid", json::object()));
    p.partner = ValidTerm::from_json(j.value("partner", json::object()));
    p.cross_source_duplicate = j.value("cross_source_duplicate", false);
    return p;
}

std::vector<Topic> generate_topics(ChatProvider& chat, const GenerationPolicy& policy,
                                   const std::filesystem::path& raw_failure_path) {
    ChatRequest req = prompts::topic_listing(policy.generator_model);
    std::string raw;
    for (int attempt = 0;; ++attempt) {
        raw = chat.chat(req);
        auto items = parse_list_items(raw);
        if (items.size() >= 20) {
            std::vector<Topic> topics;
            for (int i = 0; i < 20; ++i) {
                auto [name, explanation] = split_phrase_explanation(items[static_cast<size_t>(i)]);
                if (name.empty() || explanation.empty()) {
                    break;
                }
                topics.push_back(Topic{name, explanation, i + 1});
            }
            if (topics.size() == 20) {
                return topics;
            }
        }
        if (attempt >= policy.list_retries) {
            break;
        }
        req = prompts::with_retry_turn(
            std::move(req), raw,
            "That list was incomplete. Reply with exactly 20 numbered topics, each as "
            "\"name: explanation\".");
    }
    if (!raw_failure_path.empty()) {
        write_file_atomic(raw_failure_path, raw);
    }
    throw DataError("could not parse 20 topics from the generator reply (raw reply " +
                    (raw_failure_path.empty() ? std::string("discarded")
                                              : "kept at " + raw_failure_path.string()) +
                    ")");
}

std::vector<HypotheticalTerm> generate_hypothetical_terms(const Topic& topic, ChatProvider& chat,
                                                          const GenerationPolicy& policy,
                                                          std::vector<std::string>* warnings) {
    ChatRequest gen_req = prompts::term_generation(topic.prompt_text(), policy.generator_model);
    std::string term_list_raw;
    auto phrases = request_list(chat, gen_req, policy.list_retries, &term_list_raw);
    if (phrases.empty()) {
        throw DataError("term generation for topic '" + topic.name + "' never parsed as a list");
    }

    ChatRequest expl_req = prompts::term_explanations(gen_req, term_list_raw);
    auto explained = request_list(chat, expl_req, policy.list_retries, nullptr);
    if (explained.empty()) {
        throw DataError("term explanations for topic '" + topic.name + "' never parsed as a list");
    }

    std::vector<HypotheticalTerm> terms;
    std::set<std::string> seen;
    for (const auto& item : explained) {
        auto [phrase, explanation] = split_phrase_explanation(item);
        if (phrase.empty() || explanation.empty()) {
            continue;
        }
        if (word_count(phrase) < 4) {
            if (warnings) {
                warnings->push_back("dropped (needs 4+ words): " + phrase);
            }
            continue;
        }
        bool forbidden = false;
        for (const auto& token : lowercase_tokens(phrase)) {
            for (const char* banned : kForbiddenWords) {
                if (token == banned) {
                    forbidden = true;
                }
            }
        }
        if (forbidden) {
            if (warnings) {
                warnings->push_back("dropped (banned word): " + phrase);
            }
            continue;
        }
        if (phrase.find('-') != std::string::npos) {
            if (policy.drop_hyphenated_terms) {
                if (warnings) {
                    warnings->push_back("dropped (hyphen): " + phrase);
                }
                continue;
            }
            if (warnings) {
                warnings->push_back("kept despite hyphen: " + phrase);
            }
        }
        if (!seen.insert(textnorm::full_normalize(phrase)).second) {
            continue;
        }
        terms.push_back(HypotheticalTerm{phrase, explanation, topic, false});
    }
    return terms;
}

ValidationOutcome validate_nonexistence(const std::vector<HypotheticalTerm>& terms,
                                        SearchProvider& search, Checkpoint* checkpoint) {
    ValidationOutcome outcome;
    for (const auto& term : terms) {
        uint64_t total = 0;
        const json* cached = checkpoint ? checkpoint->get(term.phrase) : nullptr;
        if (cached != nullptr) {
            total = cached->get<uint64_t>();
        } else {
            total = search.web_search_exact(term.phrase).total_results;
            if (checkpoint) {
                checkpoint->put(term.phrase, json(total));
            }
        }
        if (total == 0) {
            HypotheticalTerm kept = term;
            kept.web_validated = true;
            outcome.retained.push_back(std::move(kept));
        } else {
            ++outcome.excluded;
        }
    }
    return outcome;
}

namespace {

// Shared tail of the three retrieval channels: resolve candidate titles
// against the corpus, drop self-matches and repeats, assign survivor ranks.
std::vector<ValidTerm> resolve_candidates(const std::vector<std::string>& candidates,
                                          const HypotheticalTerm& term, ValidSource source,
                                          const CorpusStore& corpus) {
    std::vector<ValidTerm> out;
    std::set<std::string> seen_pages;
    std::string hypo_norm = textnorm::full_normalize(term.phrase);
    for (const auto& candidate : candidates) {
        auto page = corpus.lookup_exact_title(candidate);
        if (!page.has_value()) {
            continue;
        }
        if (textnorm::full_normalize(page->title) == hypo_norm) {
            continue;
        }
        if (!seen_pages.insert(page->page_id).second) {
            continue;
        }
        ValidTerm v;
        v.phrase = page->title;
        v.definition = page->definition;
        v.page_id = page->page_id;
        v.source = source;
        v.similarity_rank = static_cast<int>(out.size()) + 1;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<ValidTerm> resolve_neighbors(const std::vector<Neighbor>& neighbors,
                                         const HypotheticalTerm& term, ValidSource source,
                                         const CorpusStore& corpus) {
    std::vector<std::string> titles;
    titles.reserve(neighbors.size());
    for (const auto& n : neighbors) {
        auto page = corpus.lookup_page_id(n.page_id);
        if (page.has_value()) {
            titles.push_back(page->title);
        }
    }
    return resolve_candidates(titles, term, source, corpus);
}

}  // namespace

std::vector<ValidTerm> retrieve_llm_suggestions(const HypotheticalTerm& term, ChatProvider& chat,
                                                const CorpusStore& corpus,
                                                const GenerationPolicy& policy,
                                                std::vector<std::string>* warnings) {
    ChatRequest req = prompts::similar_term_suggestion(term.topic.prompt_text(),
                                                       term.prompt_text(), policy.generator_model);
    auto items = request_list(chat, req, policy.list_retries, nullptr);
    if (items.empty()) {
        if (warnings) {
            warnings->push_back("suggestion list unparseable for: " + term.phrase);
        }
        return {};
    }
    return resolve_candidates(items, term, ValidSource::llm_suggestion, corpus);
}

std::vector<ValidTerm> retrieve_title_similar(const HypotheticalTerm& term,
                                              const VectorIndex& title_index,
                                              const CorpusStore& corpus,
                                              EmbeddingProvider& embedder,
                                              const GenerationPolicy& policy) {
    size_t k = std::min(static_cast<size_t>(policy.knn_k), title_index.count());
    auto neighbors = knn(title_index, term.phrase, k, embedder);
    return resolve_neighbors(neighbors, term, ValidSource::title_sim, corpus);
}

std::vector<ValidTerm> retrieve_text_similar(const HypotheticalTerm& term,
                                             const VectorIndex& definition_index,
                                             const CorpusStore& corpus,
                                             EmbeddingProvider& embedder,
                                             const GenerationPolicy& policy) {
    size_t k = std::min(static_cast<size_t>(policy.knn_k), definition_index.count());
    auto neighbors = knn(definition_index, term.made_up_definition, k, embedder);
    return resolve_neighbors(neighbors, term, ValidSource::text_sim, corpus);
}

PairAssembly assemble_term_pairs(const HypotheticalTerm& term,
                                 const std::vector<ValidTerm>& suggestions,
                                 const std::vector<ValidTerm>& title_hits,
                                 const std::vector<ValidTerm>& text_hits,
                                 const GenerationPolicy& policy) {
    PairAssembly result;
    const std::pair<const std::vector<ValidTerm>*, ValidSource> sources[] = {
        {&suggestions, ValidSource::llm_suggestion},
        {&title_hits, ValidSource::title_sim},
        {&text_hits, ValidSource::text_sim},
    };
    for (const auto& [list, which] : sources) {
        if (static_cast<int>(list->size()) < policy.min_terms_per_source) {
            result.dropped = true;
            result.drop_reason = std::string("source ") + to_string(which) + " has " +
                                 std::to_string(list->size()) + " terms, needs " +
                                 std::to_string(policy.min_terms_per_source);
            return result;
        }
    }
    std::set<std::string> selected_pages;
    for (const auto& [list, which] : sources) {
        for (int r = 1; r <= policy.pairs_per_source; ++r) {
            TermPair pair;
            pair.hypothetical = term;
            pair.valid = (*list)[static_cast<size_t>(r - 1)];
            pair.partner = (*list)[static_cast<size_t>(r - 1 + policy.pairs_per_source)];
            pair.cross_source_duplicate = !selected_pages.insert(pair.valid.page_id).second;
            pair.pair_id = short_digest(term.phrase + "|" + to_string(pair.valid.source) + "|" +
                                        std::to_string(r) + "|" + pair.valid.phrase);
            result.pairs.push_back(std::move(pair));
        }
    }
    return result;
}

}  // namespace hypobench
