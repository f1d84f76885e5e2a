#include "hypobench/questions.hpp"

#include <gtest/gtest.h>

#include "hypobench/digest.hpp"
#include "hypobench/providers_mock.hpp"
#include "hypobench/textnorm.hpp"
#include "test_support.hpp"

namespace hb = hypobench;
using hb::testing::TempDir;

namespace {

hb::Topic topic_fixture(int index = 1) {
    return hb::Topic{"News", "News and current events across the world.", index};
}

hb::ValidTerm valid_term(const std::string& phrase, hb::ValidSource source, int rank) {
    hb::ValidTerm v;
    v.phrase = phrase;
    v.definition = phrase + " is a documented subject with a settled meaning.";
    v.page_id = std::string(hb::to_string(source)).substr(0, 2) + std::to_string(rank) + phrase;
    v.source = source;
    v.similarity_rank = rank;
    return v;
}

hb::TermPair make_pair(const std::string& hypo, const std::string& valid,
                       const std::string& partner, hb::ValidSource source, int rank,
                       const hb::Topic& topic) {
    hb::TermPair pair;
    pair.hypothetical = hb::HypotheticalTerm{hypo, "An invented notion about " + hypo + ".",
                                             topic, true};
    pair.valid = valid_term(valid, source, rank);
    pair.partner = valid_term(partner, source, rank + 3);
    pair.pair_id = hb::short_digest(hypo + "|" + hb::to_string(source) + "|" +
                                    std::to_string(rank) + "|" + valid);
    return pair;
}

// Nine pairs for one term, three per source, with partner terms from the
// following ranks; phrases parameterized so texts never collide by accident.
std::vector<hb::TermPair> nine_pairs(const std::string& hypo, const hb::Topic& topic,
                                     const std::string& salt) {
    std::vector<hb::TermPair> pairs;
    for (hb::ValidSource source : {hb::ValidSource::llm_suggestion, hb::ValidSource::title_sim,
                                   hb::ValidSource::text_sim}) {
        for (int rank = 1; rank <= 3; ++rank) {
            std::string tag = salt + " " + hb::to_string(source) + " " + std::to_string(rank);
            pairs.push_back(make_pair(hypo, "Valid " + tag, "Partner " + tag, source, rank, topic));
        }
    }
    return pairs;
}

TEST(ComposeHypothetical, MockComposesQuestionContainingBothTerms) {
    auto pair = make_pair("Silent orbit pulse drift", "Information cascade", "Reputation",
                          hb::ValidSource::llm_suggestion, 1, topic_fixture());
    hb::MockChatProvider chat;
    hb::ComposePolicy policy;
    auto outcome = hb::compose_hypothetical_question(pair, chat, policy);
    ASSERT_TRUE(outcome.question.has_value());
    const auto& q = *outcome.question;
    EXPECT_TRUE(hb::textnorm::contains_term(q.text, "Silent orbit pulse drift").matched);
    EXPECT_TRUE(hb::textnorm::contains_term(q.text, "Information cascade").matched);
    EXPECT_EQ(q.kind, hb::QuestionKind::hypothetical);
    EXPECT_EQ(q.method, hb::QuestionMethod::composed_hypothetical);
    EXPECT_EQ(q.term_a.kind, hb::TermKind::hypothetical);
    EXPECT_EQ(q.term_b.kind, hb::TermKind::valid);
    EXPECT_EQ(q.hypothetical_term, "Silent orbit pulse drift");
    EXPECT_FALSE(q.id.empty());
}

TEST(ComposeHypothetical, OmittedMadeUpTermIsRejectedAfterOneRegeneration) {
    auto pair = make_pair("Silent orbit pulse drift", "Information cascade", "Reputation",
                          hb::ValidSource::llm_suggestion, 1, topic_fixture());
    hb::MockChatOptions opts;
    opts.fail_question_slots.insert("Silent orbit pulse drift|Information cascade");
    hb::MockChatProvider chat(opts);
    hb::ComposePolicy policy;
    auto outcome = hb::compose_hypothetical_question(pair, chat, policy);
    EXPECT_FALSE(outcome.question.has_value());
    EXPECT_NE(outcome.failure_reason.find("Silent orbit pulse drift"), std::string::npos);
    EXPECT_EQ(chat.call_count(), 2);  // initial + exactly one regeneration
}

TEST(ComposeHypothetical, RegenerationCanRecoverTheQuestion) {
    auto pair = make_pair("Silent orbit pulse drift", "Information cascade", "Reputation",
                          hb::ValidSource::llm_suggestion, 1, topic_fixture());
    hb::MockChatOptions opts;
    opts.fail_question_slots_once.insert("Silent orbit pulse drift|Information cascade");
    hb::MockChatProvider chat(opts);
    hb::ComposePolicy policy;
    auto outcome = hb::compose_hypothetical_question(pair, chat, policy);
    ASSERT_TRUE(outcome.question.has_value());
    EXPECT_EQ(chat.call_count(), 2);
}

TEST(ComposeValid, PairsPartnerWithSecondaryTerm) {
    auto pair = make_pair("Silent orbit pulse drift", "Publicity", "Reputation",
                          hb::ValidSource::text_sim, 1, topic_fixture());
    hb::MockChatProvider chat;
    hb::ComposePolicy policy;
    auto outcome = hb::compose_valid_question(pair, chat, policy);
    ASSERT_TRUE(outcome.question.has_value());
    const auto& q = *outcome.question;
    EXPECT_EQ(q.kind, hb::QuestionKind::valid);
    EXPECT_EQ(q.term_a.phrase, "Reputation");
    EXPECT_EQ(q.term_b.phrase, "Publicity");
    EXPECT_TRUE(hb::textnorm::contains_term(q.text, "Reputation").matched);
    EXPECT_TRUE(hb::textnorm::contains_term(q.text, "Publicity").matched);
    EXPECT_FALSE(hb::textnorm::contains_term(q.text, "Silent orbit pulse drift").matched);
}

TEST(ComposeValid, OmittedSecondaryTermIsRejected) {
    auto pair = make_pair("Silent orbit pulse drift", "Publicity", "Reputation",
                          hb::ValidSource::text_sim, 1, topic_fixture());
    hb::MockChatOptions opts;
    opts.fail_question_slots.insert("Publicity|Reputation");
    hb::MockChatProvider chat(opts);
    hb::ComposePolicy policy;
    auto outcome = hb::compose_valid_question(pair, chat, policy);
    EXPECT_FALSE(outcome.question.has_value());
}

TEST(ComposeReplaced, SubstitutesPartnerVerbatim) {
    auto pair = make_pair("Information Cascade Flux", "Publicity", "Reputation",
                          hb::ValidSource::text_sim, 1, topic_fixture());
    hb::Question hq;
    hq.text =
        "How does the concept of publicity relate to the phenomenon of information cascade flux "
        "in the context of news and current events?";
    hq.kind = hb::QuestionKind::hypothetical;
    hq.method = hb::QuestionMethod::composed_hypothetical;
    hq.pair_id = pair.pair_id;
    auto outcome = hb::compose_replaced_question(hq, pair);
    ASSERT_TRUE(outcome.question.has_value());
    EXPECT_EQ(outcome.question->text,
              "How does the concept of publicity relate to the phenomenon of Reputation "
              "in the context of news and current events?");
    EXPECT_EQ(outcome.question->kind, hb::QuestionKind::valid);
    EXPECT_EQ(outcome.question->method, hb::QuestionMethod::replaced);
    EXPECT_EQ(outcome.question->term_a.phrase, "Reputation");
    EXPECT_NE(outcome.question->id, hq.id);
}

TEST(ComposeReplaced, ParaphrasedTermIsNotReplaceable) {
    auto pair = make_pair("Information Cascade Flux", "Publicity", "Reputation",
                          hb::ValidSource::text_sim, 1, topic_fixture());
    hb::Question hq;
    hq.text = "How does publicity relate to cascading information surges in the news?";
    hq.pair_id = pair.pair_id;
    auto outcome = hb::compose_replaced_question(hq, pair);
    EXPECT_FALSE(outcome.question.has_value());
    EXPECT_NE(outcome.failure_reason.find("not replaceable"), std::string::npos);
}

TEST(AssembleDataset, CleanRunYieldsTwentySevenPerTermAndExactKindBalance) {
    auto topic = topic_fixture();
    auto pairs = nine_pairs("Silent orbit pulse drift", topic, "one");
    auto more = nine_pairs("Velvet anthem loop cycle", topic, "two");
    pairs.insert(pairs.end(), more.begin(), more.end());

    hb::MockChatProvider chat;
    hb::ComposePolicy policy;
    auto dataset = hb::assemble_dataset(pairs, chat, policy);
    EXPECT_EQ(dataset.counts.term_count, 2u);
    EXPECT_EQ(dataset.counts.candidates, 54u);
    EXPECT_EQ(dataset.counts.duplicates, 0u);
    EXPECT_EQ(dataset.counts.failures(), 0u);
    EXPECT_EQ(dataset.counts.final_count, 54u);
    ASSERT_EQ(dataset.questions.size(), 54u);
    EXPECT_EQ(dataset.counts.by_kind["hypothetical"], 18u);
    EXPECT_EQ(dataset.counts.by_kind["valid"], 36u);
    EXPECT_EQ(dataset.counts.by_kind["hypothetical"] * 3, dataset.counts.final_count);

    std::set<std::string> ids;
    for (const auto& q : dataset.questions) {
        ids.insert(q.id);
        EXPECT_TRUE(hb::textnorm::contains_term(q.text, q.term_a.phrase).matched) << q.id;
        EXPECT_TRUE(hb::textnorm::contains_term(q.text, q.term_b.phrase).matched) << q.id;
    }
    EXPECT_EQ(ids.size(), 54u);
}

TEST(AssembleDataset, GateFailureOnControlQuestionRemovesExactlyOne) {
    auto pairs = nine_pairs("Silent orbit pulse drift", topic_fixture(), "one");
    hb::MockChatOptions opts;
    // Fail one valid question: key is "<secondary>|<main>".
    opts.fail_question_slots.insert("Valid one llm_suggestion 2|Partner one llm_suggestion 2");
    hb::MockChatProvider chat(opts);
    hb::ComposePolicy policy;
    std::vector<hb::json> rejects;
    auto dataset = hb::assemble_dataset(pairs, chat, policy, nullptr, &rejects);
    EXPECT_EQ(dataset.counts.candidates, 27u);
    EXPECT_EQ(dataset.counts.gate_failures, 1u);
    EXPECT_EQ(dataset.counts.cascade_failures, 0u);
    EXPECT_EQ(dataset.counts.final_count, 26u);
    ASSERT_EQ(rejects.size(), 1u);
    EXPECT_EQ(rejects[0]["method"], "composed_valid");
}

TEST(AssembleDataset, RejectedLeadQuestionDropsItsWholeTriple) {
    auto pairs = nine_pairs("Silent orbit pulse drift", topic_fixture(), "one");
    hb::MockChatOptions opts;
    opts.fail_question_slots.insert("Silent orbit pulse drift|Valid one title_sim 1");
    hb::MockChatProvider chat(opts);
    hb::ComposePolicy policy;
    auto dataset = hb::assemble_dataset(pairs, chat, policy);
    EXPECT_EQ(dataset.counts.gate_failures, 1u);
    EXPECT_EQ(dataset.counts.cascade_failures, 2u);
    EXPECT_EQ(dataset.counts.final_count, 24u);
    EXPECT_EQ(dataset.counts.candidates - dataset.counts.duplicates - dataset.counts.failures(),
              dataset.counts.final_count);
    // Kind balance survives because triples drop whole.
    EXPECT_EQ(dataset.counts.by_kind["hypothetical"] * 3, dataset.counts.final_count);
}

TEST(AssembleDataset, CrossSourceDuplicatePairsProduceCountedDuplicates) {
    auto topic = topic_fixture();
    auto pairs = nine_pairs("Silent orbit pulse drift", topic, "one");
    // A second term whose title_sim rank-1 pair carries the same valid and
    // partner phrases as its llm_suggestion rank-1 pair: identical prompts,
    // identical composed texts, three exact duplicates.
    auto clone_a = make_pair("Velvet anthem loop cycle", "Shared valid page", "Shared partner page",
                             hb::ValidSource::llm_suggestion, 1, topic);
    auto clone_b = make_pair("Velvet anthem loop cycle", "Shared valid page", "Shared partner page",
                             hb::ValidSource::title_sim, 1, topic);
    pairs.push_back(clone_a);
    pairs.push_back(clone_b);

    hb::MockChatProvider chat;
    hb::ComposePolicy policy;
    auto dataset = hb::assemble_dataset(pairs, chat, policy);
    EXPECT_EQ(dataset.counts.candidates, 33u);
    EXPECT_EQ(dataset.counts.duplicates, 3u);
    EXPECT_EQ(dataset.counts.final_count, 30u);
}

TEST(AssembleDataset, PublishedArithmeticIdentityHolds) {
    // The documented full-scale instance: 784 surviving terms produce
    // 784 * 27 = 21,168 candidates; removing 459 duplicate texts and 1,201
    // containment failures leaves 19,508 questions.
    hb::DatasetCounts counts;
    counts.term_count = 784;
    counts.candidates = counts.term_count * 27;
    counts.duplicates = 459;
    counts.gate_failures = 1201;
    counts.final_count = counts.candidates - counts.duplicates - counts.failures();
    EXPECT_EQ(counts.candidates, 21168u);
    EXPECT_EQ(counts.final_count, 19508u);
}

// Chat provider that dies after a call budget; used for resume tests.
class BudgetedChat : public hb::ChatProvider {
public:
    BudgetedChat(int budget) : budget_(budget) {}
    std::string chat(const hb::ChatRequest& req) override {
        if (budget_ == 0) {
            throw hb::ProviderError(hb::ProviderErrorKind::unavailable, "backend down");
        }
        --budget_;
        ++calls;
        return inner_.chat(req);
    }
    std::string id() const override { return "budgeted"; }
    int calls = 0;

private:
    hb::MockChatProvider inner_;
    int budget_;
};

TEST(AssembleDataset, CheckpointResumeMatchesUninterruptedRun) {
    auto pairs = nine_pairs("Silent orbit pulse drift", topic_fixture(), "one");
    hb::ComposePolicy policy;
    TempDir dir("assemble_resume");
    auto ckpt_path = dir.path / "compose.ckpt";

    {
        hb::Checkpoint ckpt(ckpt_path);
        BudgetedChat dying(7);
        EXPECT_THROW(hb::assemble_dataset(pairs, dying, policy, &ckpt), hb::ProviderError);
    }
    hb::Dataset resumed;
    {
        hb::Checkpoint ckpt(ckpt_path);
        BudgetedChat fresh(1000);
        resumed = hb::assemble_dataset(pairs, fresh, policy, &ckpt);
        EXPECT_LT(fresh.calls, 18);  // checkpointed slots were not recomposed
    }
    hb::MockChatProvider clean;
    auto uninterrupted = hb::assemble_dataset(pairs, clean, policy);
    ASSERT_EQ(resumed.questions.size(), uninterrupted.questions.size());
    for (size_t i = 0; i < resumed.questions.size(); ++i) {
        EXPECT_EQ(resumed.questions[i].to_json().dump(),
                  uninterrupted.questions[i].to_json().dump());
    }
}

TEST(AssembleDataset, ParallelCompositionMatchesSequential) {
    auto topic = topic_fixture();
    auto pairs = nine_pairs("Silent orbit pulse drift", topic, "one");
    auto more = nine_pairs("Velvet anthem loop cycle", topic, "two");
    pairs.insert(pairs.end(), more.begin(), more.end());

    hb::MockChatProvider chat_a, chat_b;
    hb::ComposePolicy sequential;
    hb::ComposePolicy parallel;
    parallel.parallelism = 4;
    auto a = hb::assemble_dataset(pairs, chat_a, sequential);
    auto b = hb::assemble_dataset(pairs, chat_b, parallel);
    ASSERT_EQ(a.questions.size(), b.questions.size());
    for (size_t i = 0; i < a.questions.size(); ++i) {
        EXPECT_EQ(a.questions[i].to_json().dump(), b.questions[i].to_json().dump());
    }
}

// ---------------------------------------------------------------------------
// Sampling

hb::Dataset synthetic_dataset(int topics, int terms_per_topic) {
    hb::Dataset dataset;
    const char* sources[] = {"llm_suggestion", "title_sim", "text_sim"};
    for (int topic = 1; topic <= topics; ++topic) {
        for (int term = 0; term < terms_per_topic; ++term) {
            std::string hypo = "Term " + std::to_string(topic) + "-" + std::to_string(term);
            for (const char* source : sources) {
                for (int rank = 1; rank <= 3; ++rank) {
                    std::string pair_id = hypo + "|" + source + "|" + std::to_string(rank);
                    for (auto method : {hb::QuestionMethod::composed_hypothetical,
                                        hb::QuestionMethod::composed_valid,
                                        hb::QuestionMethod::replaced}) {
                        hb::Question q;
                        q.pair_id = pair_id;
                        q.hypothetical_term = hypo;
                        q.method = method;
                        q.kind = method == hb::QuestionMethod::composed_hypothetical
                                     ? hb::QuestionKind::hypothetical
                                     : hb::QuestionKind::valid;
                        q.text = "Synthetic question for " + pair_id + " via " +
                                 hb::to_string(method);
                        q.id = hb::short_digest(q.text);
                        q.topic = hb::Topic{"Topic " + std::to_string(topic), "Synthetic.", topic};
                        q.term_b.source = source;
                        q.term_b.rank = rank;
                        dataset.questions.push_back(std::move(q));
                    }
                }
            }
        }
    }
    dataset.counts.final_count = dataset.questions.size();
    return dataset;
}

TEST(SampleSubset, CardinalitiesAndInclusionOnTwentyBySix) {
    auto dataset = synthetic_dataset(20, 6);
    ASSERT_EQ(dataset.questions.size(), 20u * 6u * 27u);

    auto full = hb::sample_subset(dataset, hb::SampleLevel::full);
    auto q1080 = hb::sample_subset(dataset, hb::SampleLevel::q1080);
    auto q180 = hb::sample_subset(dataset, hb::SampleLevel::q180);
    EXPECT_EQ(full.question_ids.size(), dataset.questions.size());
    EXPECT_EQ(q1080.question_ids.size(), 1080u);
    EXPECT_EQ(q180.question_ids.size(), 180u);
    EXPECT_TRUE(q1080.shortfalls.empty());
    EXPECT_TRUE(q180.shortfalls.empty());

    std::set<std::string> full_ids(full.question_ids.begin(), full.question_ids.end());
    std::set<std::string> ids_1080(q1080.question_ids.begin(), q1080.question_ids.end());
    EXPECT_EQ(ids_1080.size(), 1080u);
    for (const auto& id : q1080.question_ids) {
        EXPECT_TRUE(full_ids.count(id));
    }
    for (const auto& id : q180.question_ids) {
        EXPECT_TRUE(ids_1080.count(id));
    }
}

TEST(SampleSubset, SelectsRankOnePairsOfFirstTermsOnly) {
    auto dataset = synthetic_dataset(2, 3);
    auto q180 = hb::sample_subset(dataset, hb::SampleLevel::q180);
    ASSERT_EQ(q180.question_ids.size(), 18u);  // 2 topics x 9
    std::set<std::string> chosen(q180.question_ids.begin(), q180.question_ids.end());
    for (const auto& q : dataset.questions) {
        if (chosen.count(q.id)) {
            EXPECT_EQ(q.term_b.rank, 1);
            EXPECT_TRUE(q.hypothetical_term == "Term 1-0" || q.hypothetical_term == "Term 2-0");
        }
    }
}

TEST(SampleSubset, TopicWithNoTermsReportsShortfall) {
    auto dataset = synthetic_dataset(20, 1);
    // Drop topic 7 entirely.
    hb::Dataset pruned;
    for (const auto& q : dataset.questions) {
        if (q.topic.index != 7) {
            pruned.questions.push_back(q);
        }
    }
    auto q180 = hb::sample_subset(pruned, hb::SampleLevel::q180);
    EXPECT_EQ(q180.question_ids.size(), 171u);  // 19 topics x 9
    EXPECT_FALSE(q180.shortfalls.empty());
}

TEST(DatasetIO, WriteReadRoundTrip) {
    TempDir dir("dataset_io");
    auto pairs = nine_pairs("Silent orbit pulse drift", topic_fixture(), "one");
    hb::MockChatProvider chat;
    hb::ComposePolicy policy;
    auto dataset = hb::assemble_dataset(pairs, chat, policy);
    auto path = dir.path / "dataset.jsonl";
    hb::write_dataset(path, dataset);
    auto loaded = hb::read_dataset(path, "");
    ASSERT_EQ(loaded.questions.size(), dataset.questions.size());
    for (size_t i = 0; i < loaded.questions.size(); ++i) {
        EXPECT_EQ(loaded.questions[i].to_json().dump(), dataset.questions[i].to_json().dump());
    }
    // The containment gate still holds on what was read back from disk.
    for (const auto& q : loaded.questions) {
        EXPECT_TRUE(hb::textnorm::contains_term(q.text, q.term_a.phrase).matched) << q.id;
        EXPECT_TRUE(hb::textnorm::contains_term(q.text, q.term_b.phrase).matched) << q.id;
    }
}

}  // namespace
