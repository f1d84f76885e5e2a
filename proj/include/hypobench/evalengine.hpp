#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypobench/jsonl.hpp"
#include "hypobench/providers.hpp"
#include "hypobench/questions.hpp"
#include "hypobench/respond.hpp"

namespace hypobench {

enum class Acceptance { accept, refuse, unknown };
enum class Label { valid, hallucination, irrelevant };

const char* to_string(Acceptance a);
const char* to_string(Label l);
Label label_from(const std::string& name);

// ---------------------------------------------------------------------------
// Pure calculus

// Programmatic presence test for a term inside an answer (containment under
// staged normalization). A false result ends the term's evaluation.
bool inclusion_check(const std::string& response_text, const std::string& term_phrase);

// The term-level case function. Availability rules: acceptance must be given
// exactly when present is true; meaning_ok exactly when the term is valid and
// accepted. Violations throw DataError.
Label term_label(bool present, TermKind term_kind, std::optional<Acceptance> acceptance,
                 std::optional<bool> meaning_ok);

// Answer-level fusion: hallucination dominates, then irrelevant, else valid.
Label answer_label(Label first, Label second);

// ---------------------------------------------------------------------------
// Agent-backed checks

// First balanced JSON object found in an agent reply; tolerates surrounding
// prose and markdown fences.
std::optional<json> extract_json_object(const std::string& reply);

struct EvaluatorPolicy {
    std::string evaluator_model;
    int parallelism = 1;
};

// MENTIONED -> accept, UNREAL -> refuse, UNKNOWN -> unknown. One reprompt
// with a format reminder when the reply fails to parse; nullopt after that
// (the term is then evaluation-failed). raw_out keeps the last agent reply.
std::optional<Acceptance> run_acceptance_check(const std::string& term,
                                               const std::string& question_text,
                                               const std::string& answer_text,
                                               ChatProvider& evaluator,
                                               const EvaluatorPolicy& policy,
                                               std::string* raw_out);

// Verified flag of the meaning judgment, same error protocol as above.
std::optional<bool> run_meaning_check(const std::string& term, const std::string& term_definition,
                                      const std::string& question_text,
                                      const std::string& answer_text, ChatProvider& evaluator,
                                      const EvaluatorPolicy& policy, std::string* raw_out);

// ---------------------------------------------------------------------------
// Records

struct TermEvaluation {
    std::string phrase;
    TermKind term_kind = TermKind::valid;
    bool present = false;
    std::optional<Acceptance> acceptance;
    std::optional<bool> meaning_ok;
    Label label = Label::irrelevant;
    json agent_raw = json::object();  // raw acceptance/meaning replies
    bool evaluation_failed = false;

    json to_json() const;
    static TermEvaluation from_json(const json& j);
};

struct AnswerEvaluation {
    std::string question_id;
    std::string model_id;
    std::vector<TermEvaluation> term_evals;  // exactly two
    Label label = Label::irrelevant;
    bool evaluation_failed = false;  // either term never yielded parseable agent output

    json to_json() const;
    static AnswerEvaluation from_json(const json& j);
};

// Full term-level + answer-level evaluation of one answer.
AnswerEvaluation evaluate_answer(const Question& question, const Response& response,
                                 ChatProvider& evaluator, const EvaluatorPolicy& policy);

struct EvaluationRun {
    std::vector<AnswerEvaluation> evaluations;  // question order, failed ones included
    std::vector<json> skipped;                  // questions without a response
};

// Joins questions with responses by id and evaluates each answered question.
// Unanswered questions are reported, not scored. Checkpointed per question.
EvaluationRun evaluate_all(const std::vector<Question>& questions,
                           const std::vector<Response>& responses, ChatProvider& evaluator,
                           const EvaluatorPolicy& policy, Checkpoint* checkpoint = nullptr);

// ---------------------------------------------------------------------------
// Score

struct Score {
    double hts = 0.0;        // 100 * |valid answers| / |hypothetical questions|
    double error_rate = 0.0; // 100 - hts
    uint64_t numerator = 0;  // |V_A|
    uint64_t denominator = 0;  // |H_Q|

    json to_json() const;
};

// H_Q counts hypothetical-kind questions whose answer was scored (not
// evaluation-failed). Throws DataError when that set is empty.
Score hypothetical_term_score(const std::vector<AnswerEvaluation>& evaluations,
                              const std::vector<Question>& questions);

void write_evaluations(const std::filesystem::path& path,
                       const std::vector<AnswerEvaluation>& evaluations);
std::vector<AnswerEvaluation> read_evaluations(const std::filesystem::path& path);

}  // namespace hypobench
