#include "hypobench/questions.hpp"

#include <map>
#include <mutex>
#include <set>

#include "hypobench/parallel.hpp"

#include "hypobench/digest.hpp"
#include "hypobench/prompts.hpp"
#include "hypobench/textnorm.hpp"

namespace hypobench {

namespace {

constexpr const char* kComposeRetryReminder =
    "That question is missing at least one required term. Compose it again and use both given "
    "terms verbatim, without rewording them.";

QuestionTerm term_from_hypothetical(const HypotheticalTerm& term) {
    return QuestionTerm{term.phrase, TermKind::hypothetical, term.made_up_definition, "generated",
                        0};
}

QuestionTerm term_from_valid(const ValidTerm& term) {
    return QuestionTerm{term.phrase, TermKind::valid, term.definition, to_string(term.source),
                        term.similarity_rank};
}

std::string question_id(const std::string& pair_id, QuestionMethod method,
                        const std::string& text) {
    return short_digest(pair_id + "|" + to_string(method) + "|" + text);
}

bool both_terms_contained(const std::string& text, const std::string& a, const std::string& b,
                          std::string* missing) {
    if (!textnorm::contains_term(text, a).matched) {
        *missing = a;
        return false;
    }
    if (!textnorm::contains_term(text, b).matched) {
        *missing = b;
        return false;
    }
    return true;
}

ComposeOutcome compose_with_gate(ChatRequest req, ChatProvider& chat, const ComposePolicy& policy,
                                 const TermPair& pair, QuestionMethod method,
                                 const QuestionTerm& term_a, const QuestionTerm& term_b) {
    std::string text;
    std::string missing;
    for (int attempt = 0;; ++attempt) {
        text = chat.chat(req);
        if (both_terms_contained(text, term_a.phrase, term_b.phrase, &missing)) {
            Question q;
            q.text = text;
            q.kind = method == QuestionMethod::composed_hypothetical ? QuestionKind::hypothetical
                                                                     : QuestionKind::valid;
            q.method = method;
            q.pair_id = pair.pair_id;
            q.hypothetical_term = pair.hypothetical.phrase;
            q.term_a = term_a;
            q.term_b = term_b;
            q.topic = pair.hypothetical.topic;
            q.id = question_id(pair.pair_id, method, text);
            return ComposeOutcome{std::move(q), ""};
        }
        if (attempt >= policy.regen_attempts) {
            return ComposeOutcome{std::nullopt, "missing term: " + missing};
        }
        req = prompts::with_retry_turn(std::move(req), text, kComposeRetryReminder);
    }
}

}  // namespace

const char* to_string(TermKind kind) {
    return kind == TermKind::hypothetical ? "hypothetical" : "valid";
}

const char* to_string(QuestionKind kind) {
    return kind == QuestionKind::hypothetical ? "hypothetical" : "valid";
}

const char* to_string(QuestionMethod method) {
    switch (method) {
        case QuestionMethod::composed_hypothetical: return "composed_hypothetical";
        case QuestionMethod::composed_valid: return "composed_valid";
        case QuestionMethod::replaced: return "replaced";
    }
    return "composed_hypothetical";
}

QuestionKind question_kind_from(const std::string& name) {
    if (name == "hypothetical") return QuestionKind::hypothetical;
    if (name == "valid") return QuestionKind::valid;
    throw DataError("unknown question kind: " + name);
}

QuestionMethod question_method_from(const std::string& name) {
    if (name == "composed_hypothetical") return QuestionMethod::composed_hypothetical;
    if (name == "composed_valid") return QuestionMethod::composed_valid;
    if (name == "replaced") return QuestionMethod::replaced;
    throw DataError("unknown question method: " + name);
}

const char* to_string(SampleLevel level) {
    switch (level) {
        case SampleLevel::full: return "full";
        case SampleLevel::q1080: return "q1080";
        case SampleLevel::q180: return "q180";
    }
    return "full";
}

SampleLevel sample_level_from(const std::string& name) {
    if (name == "full") return SampleLevel::full;
    if (name == "q1080") return SampleLevel::q1080;
    if (name == "q180") return SampleLevel::q180;
    throw DataError("unknown sample level: " + name);
}

json QuestionTerm::to_json() const {
    return json{{"phrase", phrase},
                {"kind", std::string(hypobench::to_string(kind))},
                {"definition", definition},
                {"source", source},
                {"rank", rank}};
}

QuestionTerm QuestionTerm::from_json(const json& j) {
    QuestionTerm t;
    t.phrase = j.value("phrase", "");
    t.kind = j.value("kind", "valid") == "hypothetical" ? TermKind::hypothetical : TermKind::valid;
    t.definition = j.value("definition", "");
    t.source = j.value("source", "");
    t.rank = j.value("rank", 0);
    return t;
}

json Question::to_json() const {
    return json{{"id", id},
                {"text", text},
                {"kind", std::string(hypobench::to_string(kind))},
                {"method", std::string(hypobench::to_string(method))},
                {"pair_id", pair_id},
                {"hypothetical_term", hypothetical_term},
                {"topic", topic.to_json()},
                {"term_a", term_a.to_json()},
                {"term_b", term_b.to_json()}};
}

Question Question::from_json(const json& j) {
    Question q;
    q.id = j.value("id", "");
    q.text = j.value("text", "");
    q.kind = question_kind_from(j.value("kind", "hypothetical"));
    q.method = question_method_from(j.value("method", "composed_hypothetical"));
    q.pair_id = j.value("pair_id", "");
    q.hypothetical_term = j.value("hypothetical_term", "");
    q.topic = Topic::from_json(j.value("topic", json::object()));
    q.term_a = QuestionTerm::from_json(j.value("term_a", json::object()));
    q.term_b = QuestionTerm::from_json(j.value("term_b", json::object()));
    return q;
}

ComposeOutcome compose_hypothetical_question(const TermPair& pair, ChatProvider& chat,
                                             const ComposePolicy& policy) {
    ChatRequest req = prompts::hypothetical_question(
        pair.hypothetical.topic.prompt_text(), pair.hypothetical.prompt_text(),
        pair.valid.prompt_text(), policy.generator_model);
    return compose_with_gate(std::move(req), chat, policy, pair,
                             QuestionMethod::composed_hypothetical,
                             term_from_hypothetical(pair.hypothetical),
                             term_from_valid(pair.valid));
}

ComposeOutcome compose_valid_question(const TermPair& pair, ChatProvider& chat,
                                      const ComposePolicy& policy) {
    ChatRequest req = prompts::valid_question(pair.hypothetical.topic.prompt_text(),
                                              pair.partner.prompt_text(),
                                              pair.valid.prompt_text(), policy.generator_model);
    return compose_with_gate(std::move(req), chat, policy, pair, QuestionMethod::composed_valid,
                             term_from_valid(pair.partner), term_from_valid(pair.valid));
}

ComposeOutcome compose_replaced_question(const Question& hypothetical_question,
                                         const TermPair& pair) {
    std::string text;
    try {
        text = textnorm::replace_term(hypothetical_question.text, pair.hypothetical.phrase,
                                      pair.partner.phrase);
    } catch (const textnorm::NotReplaceableError&) {
        return ComposeOutcome{std::nullopt, "not replaceable: " + pair.hypothetical.phrase};
    }
    std::string missing;
    if (!both_terms_contained(text, pair.partner.phrase, pair.valid.phrase, &missing)) {
        return ComposeOutcome{std::nullopt, "missing term after replacement: " + missing};
    }
    Question q;
    q.text = text;
    q.kind = QuestionKind::valid;
    q.method = QuestionMethod::replaced;
    q.pair_id = pair.pair_id;
    q.hypothetical_term = pair.hypothetical.phrase;
    q.term_a = term_from_valid(pair.partner);
    q.term_b = term_from_valid(pair.valid);
    q.topic = pair.hypothetical.topic;
    q.id = question_id(pair.pair_id, QuestionMethod::replaced, text);
    return ComposeOutcome{std::move(q), ""};
}

json DatasetCounts::to_json() const {
    return json{{"term_count", term_count},
                {"candidates", candidates},
                {"duplicates", duplicates},
                {"gate_failures", gate_failures},
                {"cascade_failures", cascade_failures},
                {"final_count", final_count},
                {"by_kind", by_kind},
                {"by_method", by_method}};
}

DatasetCounts DatasetCounts::from_json(const json& j) {
    DatasetCounts c;
    c.term_count = j.value("term_count", uint64_t{0});
    c.candidates = j.value("candidates", uint64_t{0});
    c.duplicates = j.value("duplicates", uint64_t{0});
    c.gate_failures = j.value("gate_failures", uint64_t{0});
    c.cascade_failures = j.value("cascade_failures", uint64_t{0});
    c.final_count = j.value("final_count", uint64_t{0});
    c.by_kind = j.value("by_kind", std::map<std::string, uint64_t>{});
    c.by_method = j.value("by_method", std::map<std::string, uint64_t>{});
    return c;
}

Dataset assemble_dataset(const std::vector<TermPair>& pairs, ChatProvider& chat,
                         const ComposePolicy& policy, Checkpoint* checkpoint,
                         std::vector<json>* reject_records) {
    Dataset dataset;
    dataset.counts.candidates = pairs.size() * 3;
    std::set<std::string> term_phrases;
    for (const auto& pair : pairs) {
        term_phrases.insert(pair.hypothetical.phrase);
    }
    dataset.counts.term_count = term_phrases.size();

    std::string lineage;
    for (const auto& pair : pairs) {
        lineage += pair.pair_id;
        lineage += '\n';
    }
    dataset.provenance = short_digest(lineage + policy.generator_model);

    auto reject = [&](const TermPair& pair, QuestionMethod method, const std::string& reason,
                      bool cascade) {
        if (cascade) {
            ++dataset.counts.cascade_failures;
        } else {
            ++dataset.counts.gate_failures;
        }
        if (reject_records) {
            reject_records->push_back(json{{"pair_id", pair.pair_id},
                                           {"method", to_string(method)},
                                           {"reason", reason},
                                           {"cascade", cascade}});
        }
    };

    // Compose (or replay from the checkpoint) the triple for every pair.
    // Pairs fan out across workers; accounting below stays sequential so the
    // artifact is byte-stable regardless of scheduling.
    struct Triple {
        ComposeOutcome hypothetical;
        ComposeOutcome valid;
        ComposeOutcome replaced;
    };
    std::vector<Triple> outcomes(pairs.size());
    std::mutex checkpoint_mutex;
    auto run_slot = [&](const TermPair& pair, QuestionMethod method,
                        const std::function<ComposeOutcome()>& op) -> ComposeOutcome {
        std::string key = pair.pair_id + "|" + to_string(method);
        if (checkpoint != nullptr) {
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            if (const json* hit = checkpoint->get(key)) {
                if (hit->value("ok", false)) {
                    return ComposeOutcome{Question::from_json((*hit)["question"]), ""};
                }
                return ComposeOutcome{std::nullopt, hit->value("reason", "rejected")};
            }
        }
        ComposeOutcome outcome = op();
        if (checkpoint != nullptr) {
            json record = outcome.question.has_value()
                              ? json{{"ok", true}, {"question", outcome.question->to_json()}}
                              : json{{"ok", false}, {"reason", outcome.failure_reason}};
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            checkpoint->put(key, record);
        }
        return outcome;
    };
    parallel_for(pairs.size(), policy.parallelism, [&](size_t i) {
        const TermPair& pair = pairs[i];
        Triple& triple = outcomes[i];
        triple.hypothetical = run_slot(pair, QuestionMethod::composed_hypothetical, [&] {
            return compose_hypothetical_question(pair, chat, policy);
        });
        if (!triple.hypothetical.question.has_value()) {
            return;  // control questions are only composed around a live lead
        }
        triple.valid = run_slot(pair, QuestionMethod::composed_valid,
                                [&] { return compose_valid_question(pair, chat, policy); });
        triple.replaced = run_slot(pair, QuestionMethod::replaced, [&] {
            return compose_replaced_question(*triple.hypothetical.question, pair);
        });
    });

    std::vector<Question> composed;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const TermPair& pair = pairs[i];
        Triple& triple = outcomes[i];
        if (!triple.hypothetical.question.has_value()) {
            // The adversarial question anchors its two control questions;
            // without it the whole triple goes.
            reject(pair, QuestionMethod::composed_hypothetical,
                   triple.hypothetical.failure_reason, false);
            reject(pair, QuestionMethod::composed_valid, "lead hypothetical question rejected",
                   true);
            reject(pair, QuestionMethod::replaced, "lead hypothetical question rejected", true);
            continue;
        }
        composed.push_back(*triple.hypothetical.question);
        if (triple.valid.question.has_value()) {
            composed.push_back(*triple.valid.question);
        } else {
            reject(pair, QuestionMethod::composed_valid, triple.valid.failure_reason, false);
        }
        if (triple.replaced.question.has_value()) {
            composed.push_back(*triple.replaced.question);
        } else {
            reject(pair, QuestionMethod::replaced, triple.replaced.failure_reason, false);
        }
    }

    // Exact-duplicate removal on the fully normalized text, first kept.
    std::set<std::string> seen;
    for (auto& question : composed) {
        if (!seen.insert(textnorm::full_normalize(question.text)).second) {
            ++dataset.counts.duplicates;
            if (reject_records) {
                reject_records->push_back(json{{"pair_id", question.pair_id},
                                               {"method", to_string(question.method)},
                                               {"reason", "duplicate text"},
                                               {"cascade", false}});
            }
            continue;
        }
        dataset.counts.by_kind[to_string(question.kind)]++;
        dataset.counts.by_method[to_string(question.method)]++;
        dataset.questions.push_back(std::move(question));
    }
    dataset.counts.final_count = dataset.questions.size();
    return dataset;
}

SubsetManifest sample_subset(const Dataset& dataset, SampleLevel level, int expected_topics) {
    SubsetManifest manifest;
    manifest.level = level;
    if (level == SampleLevel::full) {
        for (const auto& q : dataset.questions) {
            manifest.question_ids.push_back(q.id);
        }
        return manifest;
    }
    int terms_per_topic = level == SampleLevel::q1080 ? 6 : 1;

    // Generation order of topics and of terms within each topic. Terms are
    // keyed per topic so a phrase invented twice never merges slots.
    std::vector<int> topic_order;
    std::map<int, std::vector<std::string>> terms_by_topic;
    std::map<int, std::set<std::string>> seen_terms;
    // (topic, term) -> source -> method -> question id, rank-1 pairs only.
    std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> slots;
    for (const auto& q : dataset.questions) {
        if (terms_by_topic.find(q.topic.index) == terms_by_topic.end()) {
            topic_order.push_back(q.topic.index);
            terms_by_topic[q.topic.index];
        }
        if (seen_terms[q.topic.index].insert(q.hypothetical_term).second) {
            terms_by_topic[q.topic.index].push_back(q.hypothetical_term);
        }
        if (q.term_b.rank == 1) {
            std::string key = std::to_string(q.topic.index) + "|" + q.hypothetical_term;
            slots[key][q.term_b.source][to_string(q.method)] = q.id;
        }
    }

    if (static_cast<int>(topic_order.size()) < expected_topics) {
        manifest.shortfalls.push_back(json{{"expected_topics", expected_topics},
                                           {"available_topics", topic_order.size()}});
    }

    const char* sources[] = {"llm_suggestion", "title_sim", "text_sim"};
    const char* methods[] = {"composed_hypothetical", "composed_valid", "replaced"};
    for (int topic : topic_order) {
        const auto& terms = terms_by_topic[topic];
        if (static_cast<int>(terms.size()) < terms_per_topic) {
            manifest.shortfalls.push_back(json{{"topic_index", topic},
                                               {"expected_terms", terms_per_topic},
                                               {"available_terms", terms.size()}});
        }
        for (int t = 0; t < terms_per_topic && t < static_cast<int>(terms.size()); ++t) {
            const std::string& term = terms[static_cast<size_t>(t)];
            auto& by_source = slots[std::to_string(topic) + "|" + term];
            for (const char* source : sources) {
                for (const char* method : methods) {
                    auto it = by_source.find(source);
                    if (it == by_source.end() || it->second.find(method) == it->second.end()) {
                        manifest.shortfalls.push_back(json{{"topic_index", topic},
                                                           {"term", term},
                                                           {"source", source},
                                                           {"method", method}});
                        continue;
                    }
                    manifest.question_ids.push_back(it->second[method]);
                }
            }
        }
    }
    return manifest;
}

json SubsetManifest::to_json() const {
    return json{{"level", std::string(hypobench::to_string(level))},
                {"question_ids", question_ids},
                {"shortfalls", shortfalls}};
}

SubsetManifest SubsetManifest::from_json(const json& j) {
    SubsetManifest m;
    m.level = sample_level_from(j.value("level", "full"));
    m.question_ids = j.value("question_ids", std::vector<std::string>{});
    m.shortfalls = j.value("shortfalls", std::vector<json>{});
    return m;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::vector<json> lines;
    lines.reserve(dataset.questions.size());
    for (const auto& q : dataset.questions) {
        lines.push_back(q.to_json());
    }
    write_jsonl(path, lines);
}

Dataset read_dataset(const std::filesystem::path& path, const std::filesystem::path& counts_path) {
    Dataset dataset;
    for (auto& line : read_jsonl(path)) {
        dataset.questions.push_back(Question::from_json(line.value));
    }
    if (!counts_path.empty() && std::filesystem::exists(counts_path)) {
        json meta = json::parse(read_file(counts_path));
        dataset.counts = DatasetCounts::from_json(meta.value("counts", json::object()));
        dataset.provenance = meta.value("provenance", "");
    } else {
        dataset.counts.final_count = dataset.questions.size();
        for (const auto& q : dataset.questions) {
            dataset.counts.by_kind[to_string(q.kind)]++;
            dataset.counts.by_method[to_string(q.method)]++;
        }
    }
    return dataset;
}

}  // namespace hypobench
