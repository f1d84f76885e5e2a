#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypobench/benchgen.hpp"
#include "hypobench/jsonl.hpp"
#include "hypobench/providers.hpp"

namespace hypobench {

enum class TermKind { hypothetical, valid };
enum class QuestionKind { hypothetical, valid };
enum class QuestionMethod { composed_hypothetical, composed_valid, replaced };

const char* to_string(TermKind kind);
const char* to_string(QuestionKind kind);
const char* to_string(QuestionMethod method);
QuestionKind question_kind_from(const std::string& name);
QuestionMethod question_method_from(const std::string& name);

// One of the two phrases a question is built around and must contain.
struct QuestionTerm {
    std::string phrase;
    TermKind kind = TermKind::valid;
    std::string definition;  // made-up text for hypothetical terms, corpus text otherwise
    std::string source;      // "generated" or the valid-term retrieval channel
    int rank = 0;

    json to_json() const;
    static QuestionTerm from_json(const json& j);
};

struct Question {
    std::string id;  // digest of (pair id, method, text); stable across runs
    std::string text;
    QuestionKind kind = QuestionKind::hypothetical;
    QuestionMethod method = QuestionMethod::composed_hypothetical;
    std::string pair_id;
    std::string hypothetical_term;  // phrase anchoring the pair's triple
    QuestionTerm term_a;            // leads the question (hypothetical or main term)
    QuestionTerm term_b;            // the pair's valid term
    Topic topic;

    json to_json() const;
    static Question from_json(const json& j);
};

struct ComposePolicy {
    int regen_attempts = 1;  // one rewritten retry before a candidate is rejected
    int parallelism = 1;     // pair fan-out bound
    std::string generator_model;
};

struct ComposeOutcome {
    std::optional<Question> question;
    std::string failure_reason;  // set when question is absent
};

// LLM-composed question around (hypothetical term, valid term).
ComposeOutcome compose_hypothetical_question(const TermPair& pair, ChatProvider& chat,
                                             const ComposePolicy& policy);

// LLM-composed control question around (partner term, valid term).
ComposeOutcome compose_valid_question(const TermPair& pair, ChatProvider& chat,
                                      const ComposePolicy& policy);

// Programmatic control question: the hypothetical phrase in the composed
// hypothetical question is substituted with the pair's partner term.
ComposeOutcome compose_replaced_question(const Question& hypothetical_question,
                                         const TermPair& pair);

struct DatasetCounts {
    uint64_t term_count = 0;
    uint64_t candidates = 0;        // 27 per term: 9 pairs x 3 methods
    uint64_t duplicates = 0;        // later copies of an already-seen text
    uint64_t gate_failures = 0;     // missing-term or not-replaceable rejections
    uint64_t cascade_failures = 0;  // control questions dropped with their rejected lead
    uint64_t final_count = 0;
    std::map<std::string, uint64_t> by_kind;
    std::map<std::string, uint64_t> by_method;

    uint64_t failures() const { return gate_failures + cascade_failures; }
    json to_json() const;
    static DatasetCounts from_json(const json& j);
};

struct Dataset {
    std::vector<Question> questions;
    std::string provenance;  // digest over the input pairs and generator identity
    DatasetCounts counts;
};

// Composes all three questions per pair, applies both-term containment gates,
// removes exact duplicates (on fully normalized text), and tallies the
// arithmetic: final = candidates - duplicates - failures. When the lead
// hypothetical question is rejected its whole triple is dropped and reported.
// Per-question outcomes are checkpointed so interrupted runs resume.
Dataset assemble_dataset(const std::vector<TermPair>& pairs, ChatProvider& chat,
                         const ComposePolicy& policy, Checkpoint* checkpoint = nullptr,
                         std::vector<json>* reject_records = nullptr);

enum class SampleLevel { full, q1080, q180 };

const char* to_string(SampleLevel level);
SampleLevel sample_level_from(const std::string& name);

struct SubsetManifest {
    SampleLevel level = SampleLevel::full;
    std::vector<std::string> question_ids;  // in dataset order
    std::vector<json> shortfalls;           // expected slots with no surviving question

    json to_json() const;
    static SubsetManifest from_json(const json& j);
};

// full: every question. q1080: first 6 terms per topic, the rank-1 pair of
// each source, all 3 methods. q180: same with a single term per topic.
// "First" follows generation order. Topics with too few terms (or missing
// outright, measured against expected_topics) contribute what they have; the
// gap is reported, not invented.
SubsetManifest sample_subset(const Dataset& dataset, SampleLevel level,
                             int expected_topics = 20);

// Dataset artifact IO (one question per line).
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path, const std::filesystem::path& counts_path);

}  // namespace hypobench
