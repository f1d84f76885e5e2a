#include "hypobench/evalengine.hpp"

#include <gtest/gtest.h>

#include <random>

#include "hypobench/digest.hpp"
#include "hypobench/providers_mock.hpp"
#include "test_support.hpp"

namespace hb = hypobench;
using hb::Acceptance;
using hb::Label;
using hb::TermKind;
using hb::testing::TempDir;

namespace {

// ---------------------------------------------------------------------------
// Pure calculus

TEST(TermLabel, MatchesCaseTableOnEveryAdmissibleInput) {
    // Absent term: always irrelevant, no further checks available.
    EXPECT_EQ(hb::term_label(false, TermKind::hypothetical, std::nullopt, std::nullopt),
              Label::irrelevant);
    EXPECT_EQ(hb::term_label(false, TermKind::valid, std::nullopt, std::nullopt),
              Label::irrelevant);

    // Present valid term.
    EXPECT_EQ(hb::term_label(true, TermKind::valid, Acceptance::unknown, std::nullopt),
              Label::irrelevant);
    EXPECT_EQ(hb::term_label(true, TermKind::valid, Acceptance::refuse, std::nullopt),
              Label::hallucination);
    EXPECT_EQ(hb::term_label(true, TermKind::valid, Acceptance::accept, false),
              Label::hallucination);
    EXPECT_EQ(hb::term_label(true, TermKind::valid, Acceptance::accept, true), Label::valid);

    // Present hypothetical term.
    EXPECT_EQ(hb::term_label(true, TermKind::hypothetical, Acceptance::accept, std::nullopt),
              Label::hallucination);
    EXPECT_EQ(hb::term_label(true, TermKind::hypothetical, Acceptance::refuse, std::nullopt),
              Label::valid);
    EXPECT_EQ(hb::term_label(true, TermKind::hypothetical, Acceptance::unknown, std::nullopt),
              Label::valid);
}

TEST(TermLabel, AvailabilityViolationsAreRejected) {
    // Acceptance without presence, or missing when present.
    EXPECT_THROW(hb::term_label(false, TermKind::valid, Acceptance::accept, std::nullopt),
                 hb::DataError);
    EXPECT_THROW(hb::term_label(true, TermKind::valid, std::nullopt, std::nullopt), hb::DataError);
    // Meaning flag only for accepted valid terms.
    EXPECT_THROW(hb::term_label(true, TermKind::valid, Acceptance::accept, std::nullopt),
                 hb::DataError);
    EXPECT_THROW(hb::term_label(true, TermKind::valid, Acceptance::refuse, true), hb::DataError);
    EXPECT_THROW(hb::term_label(true, TermKind::hypothetical, Acceptance::accept, true),
                 hb::DataError);
    EXPECT_THROW(hb::term_label(false, TermKind::hypothetical, std::nullopt, false),
                 hb::DataError);
}

TEST(AnswerLabel, AllNinePairsAndSymmetry) {
    const Label labels[] = {Label::valid, Label::hallucination, Label::irrelevant};
    auto expected = [](Label a, Label b) {
        if (a == Label::hallucination || b == Label::hallucination) return Label::hallucination;
        if (a == Label::irrelevant || b == Label::irrelevant) return Label::irrelevant;
        return Label::valid;
    };
    for (Label a : labels) {
        for (Label b : labels) {
            EXPECT_EQ(hb::answer_label(a, b), expected(a, b));
            EXPECT_EQ(hb::answer_label(a, b), hb::answer_label(b, a));
        }
    }
    EXPECT_EQ(hb::answer_label(Label::hallucination, Label::valid), Label::hallucination);
    EXPECT_EQ(hb::answer_label(Label::irrelevant, Label::valid), Label::irrelevant);
    EXPECT_EQ(hb::answer_label(Label::valid, Label::valid), Label::valid);
}

TEST(InclusionCheck, UsesStagedNormalization) {
    EXPECT_TRUE(hb::inclusion_check("The so-called Turbo jump dribble works.", "Turbo-jump dribble"));
    EXPECT_TRUE(hb::inclusion_check("the term is quoted verbatim here", "quoted verbatim"));
    EXPECT_FALSE(hb::inclusion_check("nothing related at all", "Viral content momentum"));
}

// ---------------------------------------------------------------------------
// Agent reply parsing

TEST(ExtractJson, PlainObject) {
    auto j = hb::extract_json_object(R"({"certainty": "MENTIONED"})");
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ((*j)["certainty"], "MENTIONED");
}

TEST(ExtractJson, ObjectWrappedInProseAndFences) {
    auto j = hb::extract_json_object(
        "Sure, here is my verdict:\n```json\n{\n \"term\": \"X\",\n \"certainty\": \"UNREAL\"\n}\n``"
        "`\nHope that helps!");
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ((*j)["certainty"], "UNREAL");
}

TEST(ExtractJson, BracesInsideStringsDoNotConfuseTheScan) {
    auto j = hb::extract_json_object(
        R"(prefix {"reasoning": "the answer {sort of} hedges \" a lot", "certainty": "UNKNOWN"} suffix)");
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ((*j)["certainty"], "UNKNOWN");
}

TEST(ExtractJson, SkipsUnparseableBalancedBlockAndFindsLaterObject) {
    auto j = hb::extract_json_object("{not json} and then {\"verified\": \"TRUE\"}");
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ((*j)["verified"], "TRUE");
}

TEST(ExtractJson, NoObjectYieldsNullopt) {
    EXPECT_FALSE(hb::extract_json_object("no braces anywhere").has_value());
    EXPECT_FALSE(hb::extract_json_object("dangling { brace").has_value());
}

// Replies served from a queue; repeats the last reply when exhausted.
class QueuedAgent : public hb::ChatProvider {
public:
    explicit QueuedAgent(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string chat(const hb::ChatRequest& req) override {
        last_request = req;
        ++calls;
        if (replies_.empty()) {
            return "out of script";
        }
        std::string reply = replies_.front();
        if (replies_.size() > 1) {
            replies_.erase(replies_.begin());
        }
        return reply;
    }
    std::string id() const override { return "queued-agent"; }
    int calls = 0;
    hb::ChatRequest last_request;

private:
    std::vector<std::string> replies_;
};

TEST(AcceptanceCheck, MapsTheThreeCertaintyWords) {
    hb::EvaluatorPolicy policy;
    for (auto [word, want] :
         std::vector<std::pair<std::string, Acceptance>>{{"MENTIONED", Acceptance::accept},
                                                         {"UNREAL", Acceptance::refuse},
                                                         {"UNKNOWN", Acceptance::unknown}}) {
        QueuedAgent agent({"{\"term\":\"T\",\"reasoning\":\"...\",\"certainty\":\"" + word +
                           "\"}"});
        std::string raw;
        auto got = hb::run_acceptance_check("T", "Q?", "A.", agent, policy, &raw);
        ASSERT_TRUE(got.has_value()) << word;
        EXPECT_EQ(*got, want);
        EXPECT_FALSE(raw.empty());
    }
}

TEST(AcceptanceCheck, OneRepromptRecoversFromJunk) {
    QueuedAgent agent({"I think the term is fine, no JSON today.",
                       "{\"certainty\": \"mentioned\"}"});
    hb::EvaluatorPolicy policy;
    std::string raw;
    auto got = hb::run_acceptance_check("T", "Q?", "A.", agent, policy, &raw);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, Acceptance::accept);  // case-insensitive mapping
    EXPECT_EQ(agent.calls, 2);
    // The reprompt keeps the conversation and adds a corrective turn.
    EXPECT_EQ(agent.last_request.user_turns.size(), 2u);
}

TEST(AcceptanceCheck, PersistentJunkFailsAfterExactlyOneReprompt) {
    QueuedAgent agent({"junk"});
    hb::EvaluatorPolicy policy;
    std::string raw;
    auto got = hb::run_acceptance_check("T", "Q?", "A.", agent, policy, &raw);
    EXPECT_FALSE(got.has_value());
    EXPECT_EQ(agent.calls, 2);
    EXPECT_EQ(raw, "junk");  // raw output preserved for the record
}

TEST(MeaningCheck, ParsesStringAndBooleanVerifiedFlags) {
    hb::EvaluatorPolicy policy;
    {
        QueuedAgent agent({"{\"term\":\"Publicity\",\"verified\": \"TRUE\"}"});
        auto got = hb::run_meaning_check("Publicity", "def", "Q?", "A.", agent, policy, nullptr);
        ASSERT_TRUE(got.has_value());
        EXPECT_TRUE(*got);
    }
    {
        QueuedAgent agent({"{\"verified\": \"FALSE\"}"});
        auto got = hb::run_meaning_check("Viral load", "def", "Q?", "A.", agent, policy, nullptr);
        ASSERT_TRUE(got.has_value());
        EXPECT_FALSE(*got);
    }
    {
        QueuedAgent agent({"{\"verified\": true}"});
        auto got = hb::run_meaning_check("T", "def", "Q?", "A.", agent, policy, nullptr);
        ASSERT_TRUE(got.has_value());
        EXPECT_TRUE(*got);
    }
}

// ---------------------------------------------------------------------------
// evaluate_answer paths

hb::Question question_fixture() {
    hb::Question q;
    q.id = "q-fixture";
    q.text = "How does Publicity interact with the Viral content momentum in social media?";
    q.kind = hb::QuestionKind::hypothetical;
    q.term_a = hb::QuestionTerm{"Viral content momentum", TermKind::hypothetical,
                                "An invented notion.", "generated", 0};
    q.term_b = hb::QuestionTerm{"Publicity", TermKind::valid,
                                "Publicity is public visibility or awareness.", "text_sim", 1};
    return q;
}

hb::Response response_with(const std::string& text) {
    hb::Response r;
    r.question_id = "q-fixture";
    r.model_id = "sut";
    r.text = text;
    return r;
}

TEST(EvaluateAnswer, AbsentTermShortCircuitsToIrrelevantWithNoAgentCalls) {
    auto q = question_fixture();
    auto r = response_with("A reply that names neither phrase of interest in any form.");
    QueuedAgent agent({});
    hb::EvaluatorPolicy policy;
    auto eval = hb::evaluate_answer(q, r, agent, policy);
    EXPECT_EQ(agent.calls, 0);
    EXPECT_EQ(eval.label, Label::irrelevant);
    EXPECT_FALSE(eval.term_evals[0].present);
    EXPECT_FALSE(eval.term_evals[0].acceptance.has_value());
    EXPECT_EQ(eval.term_evals[0].label, Label::irrelevant);
}

TEST(EvaluateAnswer, MeaningCheckOnlyForAcceptedValidTerms) {
    auto q = question_fixture();
    auto r = response_with(
        "Publicity means public visibility. The supposed Viral content momentum is not a real "
        "phenomenon.");
    // Calls arrive in term order: acceptance(hypothetical) -> UNREAL (no
    // meaning check), acceptance(valid) -> MENTIONED, meaning(valid) -> TRUE.
    QueuedAgent agent({"{\"certainty\":\"UNREAL\"}",
                       "{\"certainty\":\"MENTIONED\"}",
                       "{\"verified\":\"TRUE\"}"});
    hb::EvaluatorPolicy policy;
    auto eval = hb::evaluate_answer(q, r, agent, policy);
    EXPECT_EQ(agent.calls, 3);  // exactly one meaning check, for the valid term
    EXPECT_EQ(eval.term_evals[0].label, Label::valid);          // hypothetical refused
    EXPECT_FALSE(eval.term_evals[0].meaning_ok.has_value());    // never meaning-checked
    EXPECT_EQ(eval.term_evals[1].label, Label::valid);
    ASSERT_TRUE(eval.term_evals[1].meaning_ok.has_value());
    EXPECT_EQ(eval.label, Label::valid);
}

TEST(EvaluateAnswer, AcceptedHypotheticalTermIsHallucination) {
    auto q = question_fixture();
    auto r = response_with(
        "Viral content momentum is a well-known force, and Publicity amplifies it.");
    QueuedAgent agent({"{\"certainty\":\"MENTIONED\"}",   // hypothetical accepted -> h
                       "{\"certainty\":\"MENTIONED\"}",   // valid accepted
                       "{\"verified\":\"TRUE\"}"});
    hb::EvaluatorPolicy policy;
    auto eval = hb::evaluate_answer(q, r, agent, policy);
    EXPECT_EQ(eval.term_evals[0].label, Label::hallucination);
    EXPECT_EQ(eval.label, Label::hallucination);
}

TEST(EvaluateAnswer, AgentThatNeverYieldsJsonMarksEvaluationFailed) {
    auto q = question_fixture();
    auto r = response_with("Publicity and Viral content momentum both appear here.");
    QueuedAgent agent({"no json ever"});
    hb::EvaluatorPolicy policy;
    auto eval = hb::evaluate_answer(q, r, agent, policy);
    EXPECT_TRUE(eval.evaluation_failed);
    EXPECT_TRUE(eval.term_evals[0].evaluation_failed);
    EXPECT_EQ(eval.term_evals[0].agent_raw["acceptance"], "no json ever");
}

// ---------------------------------------------------------------------------
// Score arithmetic

std::vector<hb::Question> hypothetical_questions(int n) {
    std::vector<hb::Question> questions;
    for (int i = 0; i < n; ++i) {
        hb::Question q;
        q.id = "h" + std::to_string(i);
        q.kind = hb::QuestionKind::hypothetical;
        questions.push_back(q);
    }
    return questions;
}

hb::AnswerEvaluation labeled(const std::string& id, Label label, bool failed = false) {
    hb::AnswerEvaluation e;
    e.question_id = id;
    e.model_id = "m";
    e.label = label;
    e.evaluation_failed = failed;
    return e;
}

TEST(Score, TwoValidOfFiftyIsFourPercent) {
    auto questions = hypothetical_questions(50);
    std::vector<hb::AnswerEvaluation> evals;
    for (int i = 0; i < 50; ++i) {
        evals.push_back(labeled("h" + std::to_string(i),
                                i < 2 ? Label::valid : Label::hallucination));
    }
    auto score = hb::hypothetical_term_score(evals, questions);
    EXPECT_DOUBLE_EQ(score.hts, 4.0);
    EXPECT_DOUBLE_EQ(score.error_rate, 96.0);
    EXPECT_EQ(score.numerator, 2u);
    EXPECT_EQ(score.denominator, 50u);
}

TEST(Score, ZeroValidIsZeroScoreFullError) {
    auto questions = hypothetical_questions(10);
    std::vector<hb::AnswerEvaluation> evals;
    for (int i = 0; i < 10; ++i) {
        evals.push_back(labeled("h" + std::to_string(i), Label::irrelevant));
    }
    auto score = hb::hypothetical_term_score(evals, questions);
    EXPECT_DOUBLE_EQ(score.hts, 0.0);
    EXPECT_DOUBLE_EQ(score.error_rate, 100.0);
}

TEST(Score, NoScoredHypotheticalQuestionsIsAnError) {
    std::vector<hb::Question> questions;
    hb::Question q;
    q.id = "v0";
    q.kind = hb::QuestionKind::valid;
    questions.push_back(q);
    std::vector<hb::AnswerEvaluation> evals = {labeled("v0", Label::valid)};
    EXPECT_THROW(hb::hypothetical_term_score(evals, questions), hb::DataError);

    // Hypothetical questions exist but every evaluation failed: still undefined.
    auto hq = hypothetical_questions(3);
    std::vector<hb::AnswerEvaluation> failed = {labeled("h0", Label::valid, true),
                                                labeled("h1", Label::valid, true),
                                                labeled("h2", Label::valid, true)};
    EXPECT_THROW(hb::hypothetical_term_score(failed, hq), hb::DataError);
}

TEST(Score, RandomizedSetsMatchDirectRecountAndSumTo100) {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + static_cast<int>(rng() % 400);
        auto questions = hypothetical_questions(n);
        std::vector<hb::AnswerEvaluation> evals;
        uint64_t valid = 0, scored = 0;
        for (int i = 0; i < n; ++i) {
            Label label = static_cast<Label>(rng() % 3);
            bool failed = rng() % 10 == 0;
            evals.push_back(labeled("h" + std::to_string(i), label, failed));
            if (!failed) {
                ++scored;
                valid += label == Label::valid ? 1 : 0;
            }
        }
        if (scored == 0) {
            EXPECT_THROW(hb::hypothetical_term_score(evals, questions), hb::DataError);
            continue;
        }
        auto score = hb::hypothetical_term_score(evals, questions);
        EXPECT_EQ(score.numerator, valid);
        EXPECT_EQ(score.denominator, scored);
        EXPECT_DOUBLE_EQ(score.hts, 100.0 * static_cast<double>(valid) / scored);
        EXPECT_NEAR(score.hts + score.error_rate, 100.0, 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Batch evaluation

TEST(EvaluateAll, MissingResponsesAreSkippedAndReported) {
    auto q1 = question_fixture();
    auto q2 = question_fixture();
    q2.id = "q-unanswered";
    hb::MockChatProvider evaluator;
    hb::EvaluatorPolicy policy;
    policy.evaluator_model = "judge";
    auto run = hb::evaluate_all({q1, q2}, {response_with("mentions Publicity and Viral content momentum")},
                                evaluator, policy);
    EXPECT_EQ(run.evaluations.size(), 1u);
    ASSERT_EQ(run.skipped.size(), 1u);
    EXPECT_EQ(run.skipped[0]["question_id"], "q-unanswered");
    EXPECT_EQ(run.skipped[0]["reason"], "missing-response");
}

TEST(EvaluateAll, CheckpointResumeProducesIdenticalEvaluations) {
    std::vector<hb::Question> questions;
    std::vector<hb::Response> responses;
    for (int i = 0; i < 6; ++i) {
        auto q = question_fixture();
        q.id = "q" + std::to_string(i);
        q.text += " variant " + std::to_string(i);
        questions.push_back(q);
        auto r = response_with("Publicity and Viral content momentum, take " + std::to_string(i));
        r.question_id = q.id;
        responses.push_back(r);
    }
    hb::EvaluatorPolicy policy;
    policy.evaluator_model = "judge";
    TempDir dir("eval_resume");

    class DyingEvaluator : public hb::ChatProvider {
    public:
        explicit DyingEvaluator(int budget) : budget_(budget) {}
        std::string chat(const hb::ChatRequest& req) override {
            if (budget_-- == 0) {
                throw hb::ProviderError(hb::ProviderErrorKind::unavailable, "down");
            }
            return inner_.chat(req);
        }
        std::string id() const override { return "dying-judge"; }

    private:
        hb::MockChatProvider inner_;
        int budget_;
    };

    {
        hb::Checkpoint ckpt(dir.path / "eval.ckpt");
        DyingEvaluator dying(9);
        EXPECT_THROW(hb::evaluate_all(questions, responses, dying, policy, &ckpt),
                     hb::ProviderError);
    }
    hb::EvaluationRun resumed;
    {
        hb::Checkpoint ckpt(dir.path / "eval.ckpt");
        hb::MockChatProvider fresh;
        resumed = hb::evaluate_all(questions, responses, fresh, policy, &ckpt);
    }
    hb::MockChatProvider clean;
    auto uninterrupted = hb::evaluate_all(questions, responses, clean, policy);
    ASSERT_EQ(resumed.evaluations.size(), uninterrupted.evaluations.size());
    for (size_t i = 0; i < resumed.evaluations.size(); ++i) {
        EXPECT_EQ(resumed.evaluations[i].to_json().dump(),
                  uninterrupted.evaluations[i].to_json().dump());
    }
}

TEST(EvaluateAll, ValidHypotheticalAnswersAreTraceableToRefuseOrUnknown) {
    // Over a spread of mock evaluations: whenever a hypothetical-kind
    // question ends up answer-level valid, the stored term evaluation shows
    // the hypothetical phrase present with a non-accepting agent verdict.
    std::vector<hb::Question> questions;
    std::vector<hb::Response> responses;
    for (int i = 0; i < 40; ++i) {
        auto q = question_fixture();
        q.id = "qt" + std::to_string(i);
        q.text = "Variant " + std::to_string(i) +
                 ": how does Publicity relate to Viral content momentum?";
        questions.push_back(q);
        auto r = response_with("Publicity and Viral content momentum, reading " +
                               std::to_string(i));
        r.question_id = q.id;
        responses.push_back(r);
    }
    hb::MockChatProvider evaluator;
    hb::EvaluatorPolicy policy;
    policy.evaluator_model = "judge";
    auto run = hb::evaluate_all(questions, responses, evaluator, policy);
    int traced = 0;
    for (const auto& eval : run.evaluations) {
        if (eval.evaluation_failed || eval.label != Label::valid) {
            continue;
        }
        for (const auto& term : eval.term_evals) {
            if (term.term_kind == TermKind::hypothetical) {
                ++traced;
                EXPECT_TRUE(term.present);
                ASSERT_TRUE(term.acceptance.has_value());
                EXPECT_NE(*term.acceptance, Acceptance::accept);
                EXPECT_FALSE(term.agent_raw["acceptance"].get<std::string>().empty());
            }
        }
    }
    EXPECT_GT(traced, 0);  // the spread must actually exercise the path
}

TEST(EvaluationIO, WriteReadRoundTrip) {
    TempDir dir("eval_io");
    auto q = question_fixture();
    auto r = response_with("Publicity and Viral content momentum appear.");
    hb::MockChatProvider evaluator;
    hb::EvaluatorPolicy policy;
    auto eval = hb::evaluate_answer(q, r, evaluator, policy);
    auto path = dir.path / "evaluations.jsonl";
    hb::write_evaluations(path, {eval});
    auto loaded = hb::read_evaluations(path);
    ASSERT_EQ(loaded.size(), 1u);
    EXPECT_EQ(loaded[0].to_json().dump(), eval.to_json().dump());
}

}  // namespace
