#include "hypobench/evalengine.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>

#include "hypobench/parallel.hpp"
#include "hypobench/prompts.hpp"
#include "hypobench/textnorm.hpp"

namespace hypobench {

namespace {

constexpr const char* kJsonFormatReminder =
    "That reply could not be parsed. Respond with only the requested JSON object and no other "
    "text.";

std::string upper_trimmed(std::string s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    s = s.substr(a, b - a + 1);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

}  // namespace

const char* to_string(Acceptance a) {
    switch (a) {
        case Acceptance::accept: return "accept";
        case Acceptance::refuse: return "refuse";
        case Acceptance::unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(Label l) {
    switch (l) {
        case Label::valid: return "valid";
        case Label::hallucination: return "hallucination";
        case Label::irrelevant: return "irrelevant";
    }
    return "irrelevant";
}

Label label_from(const std::string& name) {
    if (name == "valid") return Label::valid;
    if (name == "hallucination") return Label::hallucination;
    if (name == "irrelevant") return Label::irrelevant;
    throw DataError("unknown label: " + name);
}

bool inclusion_check(const std::string& response_text, const std::string& term_phrase) {
    return textnorm::contains_term(response_text, term_phrase).matched;
}

Label term_label(bool present, TermKind term_kind, std::optional<Acceptance> acceptance,
                 std::optional<bool> meaning_ok) {
    if (acceptance.has_value() != present) {
        throw DataError("acceptance must be available exactly when the term is present");
    }
    bool meaning_expected = present && term_kind == TermKind::valid &&
                            acceptance == Acceptance::accept;
    if (meaning_ok.has_value() != meaning_expected) {
        throw DataError("meaning flag must be available exactly for accepted valid terms");
    }
    if (!present) {
        return Label::irrelevant;
    }
    if (term_kind == TermKind::valid) {
        switch (*acceptance) {
            case Acceptance::unknown: return Label::irrelevant;
            case Acceptance::refuse: return Label::hallucination;
            case Acceptance::accept: return *meaning_ok ? Label::valid : Label::hallucination;
        }
    }
    return *acceptance == Acceptance::accept ? Label::hallucination : Label::valid;
}

Label answer_label(Label first, Label second) {
    if (first == Label::hallucination || second == Label::hallucination) {
        return Label::hallucination;
    }
    if (first == Label::irrelevant || second == Label::irrelevant) {
        return Label::irrelevant;
    }
    return Label::valid;
}

std::optional<json> extract_json_object(const std::string& reply) {
    for (size_t start = reply.find('{'); start != std::string::npos;
         start = reply.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < reply.size(); ++i) {
            char c = reply[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    json parsed = json::parse(reply.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) {
                        return parsed;
                    }
                    break;  // balanced but unparseable; try the next '{'
                }
            }
        }
    }
    return std::nullopt;
}

namespace {

// Ask, extract the JSON object, parse the field of interest. Exactly one
// reprompt with a format reminder; after that the check is failed.
template <typename T, typename Parse>
std::optional<T> ask_agent(ChatRequest req, ChatProvider& evaluator, std::string* raw_out,
                           Parse parse) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply = evaluator.chat(req);
        if (raw_out) {
            *raw_out = reply;
        }
        auto object = extract_json_object(reply);
        if (object.has_value()) {
            std::optional<T> value = parse(*object);
            if (value.has_value()) {
                return value;
            }
        }
        if (attempt == 0) {
            req = prompts::with_retry_turn(std::move(req), reply, kJsonFormatReminder);
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<Acceptance> run_acceptance_check(const std::string& term,
                                               const std::string& question_text,
                                               const std::string& answer_text,
                                               ChatProvider& evaluator,
                                               const EvaluatorPolicy& policy,
                                               std::string* raw_out) {
    ChatRequest req =
        prompts::acceptance_check(term, question_text, answer_text, policy.evaluator_model);
    return ask_agent<Acceptance>(std::move(req), evaluator, raw_out,
                                 [](const json& object) -> std::optional<Acceptance> {
                                     std::string certainty =
                                         upper_trimmed(object.value("certainty", ""));
                                     if (certainty == "MENTIONED") return Acceptance::accept;
                                     if (certainty == "UNREAL") return Acceptance::refuse;
                                     if (certainty == "UNKNOWN") return Acceptance::unknown;
                                     return std::nullopt;
                                 });
}

std::optional<bool> run_meaning_check(const std::string& term, const std::string& term_definition,
                                      const std::string& question_text,
                                      const std::string& answer_text, ChatProvider& evaluator,
                                      const EvaluatorPolicy& policy, std::string* raw_out) {
    ChatRequest req = prompts::meaning_check(term, term_definition, question_text, answer_text,
                                             policy.evaluator_model);
    return ask_agent<bool>(std::move(req), evaluator, raw_out,
                           [](const json& object) -> std::optional<bool> {
                               if (object.contains("verified") &&
                                   object.at("verified").is_boolean()) {
                                   return object.at("verified").get<bool>();
                               }
                               std::string verified = upper_trimmed(object.value("verified", ""));
                               if (verified == "TRUE") return true;
                               if (verified == "FALSE") return false;
                               return std::nullopt;
                           });
}

json TermEvaluation::to_json() const {
    json j{{"phrase", phrase},
           {"term_kind", std::string(hypobench::to_string(term_kind))},
           {"present", present},
           {"acceptance", acceptance.has_value() ? json(hypobench::to_string(*acceptance)) : json()},
           {"meaning_ok", meaning_ok.has_value() ? json(*meaning_ok) : json()},
           {"label", std::string(hypobench::to_string(label))},
           {"agent_raw", agent_raw},
           {"evaluation_failed", evaluation_failed}};
    return j;
}

TermEvaluation TermEvaluation::from_json(const json& j) {
    TermEvaluation t;
    t.phrase = j.value("phrase", "");
    t.term_kind =
        j.value("term_kind", "valid") == "hypothetical" ? TermKind::hypothetical : TermKind::valid;
    t.present = j.value("present", false);
    if (j.contains("acceptance") && j["acceptance"].is_string()) {
        std::string a = j["acceptance"].get<std::string>();
        t.acceptance = a == "accept" ? Acceptance::accept
                                     : (a == "refuse" ? Acceptance::refuse : Acceptance::unknown);
    }
    if (j.contains("meaning_ok") && j["meaning_ok"].is_boolean()) {
        t.meaning_ok = j["meaning_ok"].get<bool>();
    }
    t.label = label_from(j.value("label", "irrelevant"));
    t.agent_raw = j.value("agent_raw", json::object());
    t.evaluation_failed = j.value("evaluation_failed", false);
    return t;
}

json AnswerEvaluation::to_json() const {
    json evals = json::array();
    for (const auto& t : term_evals) {
        evals.push_back(t.to_json());
    }
    return json{{"question_id", question_id},
                {"model_id", model_id},
                {"term_evals", evals},
                {"label", std::string(hypobench::to_string(label))},
                {"evaluation_failed", evaluation_failed}};
}

AnswerEvaluation AnswerEvaluation::from_json(const json& j) {
    AnswerEvaluation a;
    a.question_id = j.value("question_id", "");
    a.model_id = j.value("model_id", "");
    for (const auto& t : j.value("term_evals", json::array())) {
        a.term_evals.push_back(TermEvaluation::from_json(t));
    }
    a.label = label_from(j.value("label", "irrelevant"));
    a.evaluation_failed = j.value("evaluation_failed", false);
    return a;
}

namespace {

TermEvaluation evaluate_term(const QuestionTerm& term, const Question& question,
                             const Response& response, ChatProvider& evaluator,
                             const EvaluatorPolicy& policy) {
    TermEvaluation eval;
    eval.phrase = term.phrase;
    eval.term_kind = term.kind;
    eval.present = inclusion_check(response.text, term.phrase);
    if (!eval.present) {
        eval.label = Label::irrelevant;
        return eval;
    }
    std::string raw;
    auto acceptance =
        run_acceptance_check(term.phrase, question.text, response.text, evaluator, policy, &raw);
    eval.agent_raw["acceptance"] = raw;
    if (!acceptance.has_value()) {
        eval.evaluation_failed = true;
        return eval;
    }
    eval.acceptance = acceptance;
    if (term.kind == TermKind::valid && *acceptance == Acceptance::accept) {
        std::string meaning_raw;
        auto meaning = run_meaning_check(term.phrase, term.definition, question.text,
                                         response.text, evaluator, policy, &meaning_raw);
        eval.agent_raw["meaning"] = meaning_raw;
        if (!meaning.has_value()) {
            eval.evaluation_failed = true;
            return eval;
        }
        eval.meaning_ok = meaning;
    }
    eval.label = term_label(eval.present, eval.term_kind, eval.acceptance, eval.meaning_ok);
    return eval;
}

}  // namespace

AnswerEvaluation evaluate_answer(const Question& question, const Response& response,
                                 ChatProvider& evaluator, const EvaluatorPolicy& policy) {
    AnswerEvaluation answer;
    answer.question_id = question.id;
    answer.model_id = response.model_id;
    answer.term_evals.push_back(
        evaluate_term(question.term_a, question, response, evaluator, policy));
    answer.term_evals.push_back(
        evaluate_term(question.term_b, question, response, evaluator, policy));
    answer.evaluation_failed =
        answer.term_evals[0].evaluation_failed || answer.term_evals[1].evaluation_failed;
    if (!answer.evaluation_failed) {
        answer.label = answer_label(answer.term_evals[0].label, answer.term_evals[1].label);
    }
    return answer;
}

EvaluationRun evaluate_all(const std::vector<Question>& questions,
                           const std::vector<Response>& responses, ChatProvider& evaluator,
                           const EvaluatorPolicy& policy, Checkpoint* checkpoint) {
    std::map<std::string, const Response*> response_of;
    for (const auto& r : responses) {
        response_of[r.question_id] = &r;
    }
    EvaluationRun run;
    std::vector<const Question*> answered;
    for (const auto& q : questions) {
        if (response_of.count(q.id)) {
            answered.push_back(&q);
        } else {
            run.skipped.push_back(json{{"question_id", q.id}, {"reason", "missing-response"}});
        }
    }

    std::vector<AnswerEvaluation> slots(answered.size());
    std::mutex checkpoint_mutex;
    parallel_for(answered.size(), policy.parallelism, [&](size_t i) {
        const Question& question = *answered[i];
        const Response& response = *response_of[question.id];
        std::string key = question.id + "|" + response.model_id + "|" + policy.evaluator_model;
        if (checkpoint != nullptr) {
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            if (const json* hit = checkpoint->get(key)) {
                slots[i] = AnswerEvaluation::from_json(*hit);
                return;
            }
        }
        AnswerEvaluation eval = evaluate_answer(question, response, evaluator, policy);
        if (checkpoint != nullptr) {
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            checkpoint->put(key, eval.to_json());
        }
        slots[i] = std::move(eval);
    });
    run.evaluations = std::move(slots);
    return run;
}

json Score::to_json() const {
    return json{{"hts", hts},
                {"error_rate", error_rate},
                {"numerator", numerator},
                {"denominator", denominator}};
}

Score hypothetical_term_score(const std::vector<AnswerEvaluation>& evaluations,
                              const std::vector<Question>& questions) {
    std::map<std::string, QuestionKind> kind_of;
    for (const auto& q : questions) {
        kind_of[q.id] = q.kind;
    }
    Score score;
    for (const auto& eval : evaluations) {
        if (eval.evaluation_failed) {
            continue;
        }
        auto it = kind_of.find(eval.question_id);
        if (it == kind_of.end() || it->second != QuestionKind::hypothetical) {
            continue;
        }
        ++score.denominator;
        if (eval.label == Label::valid) {
            ++score.numerator;
        }
    }
    if (score.denominator == 0) {
        throw DataError("score undefined: no scored hypothetical questions");
    }
    score.hts = 100.0 * static_cast<double>(score.numerator) /
                static_cast<double>(score.denominator);
    score.error_rate = 100.0 - score.hts;
    return score;
}

void write_evaluations(const std::filesystem::path& path,
                       const std::vector<AnswerEvaluation>& evaluations) {
    std::vector<json> lines;
    lines.reserve(evaluations.size());
    for (const auto& e : evaluations) {
        lines.push_back(e.to_json());
    }
    write_jsonl(path, lines);
}

std::vector<AnswerEvaluation> read_evaluations(const std::filesystem::path& path) {
    std::vector<AnswerEvaluation> out;
    for (auto& line : read_jsonl(path)) {
        out.push_back(AnswerEvaluation::from_json(line.value));
    }
    return out;
}

}  // namespace hypobench
