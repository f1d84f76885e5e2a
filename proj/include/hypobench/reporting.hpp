#pragma once

#include <map>
#include <string>
#include <vector>

#include "hypobench/evalengine.hpp"

namespace hypobench {

// ---------------------------------------------------------------------------
// Term-level label distributions.
//
// Three groupings over the stored term evaluations:
//   term_type          share of term labels, split hypothetical vs valid
//   valid_term_source  same, valid terms only, split by retrieval channel
//   evaluation_type    per-check outcome shares: what each of the three
//                      checks concluded over the terms that reached it
//                      (inclusion never yields hallucination; meaning never
//                      yields irrelevant)

struct DistributionCell {
    uint64_t count = 0;
    double percentage = 0.0;
};

struct LabelDistribution {
    // grouping -> group -> label -> cell; per group the percentages sum to
    // 100 up to rounding.
    std::map<std::string, std::map<std::string, std::map<std::string, DistributionCell>>> groupings;
    bool empty_input = false;

    json to_json() const;
};

LabelDistribution distribution_report(const std::vector<AnswerEvaluation>& evaluations,
                                      const std::vector<Question>& questions);

// ---------------------------------------------------------------------------
// Evaluator-vs-human confusion matrix (answer level, rows = human).

struct ConfusionMatrix {
    uint64_t counts[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};  // [human][agent]
    uint64_t total = 0;
    double error_rate = 0.0;  // off-diagonal share, percent
    std::vector<json> rejected;  // human-label lines outside the alphabet

    uint64_t human_total(Label l) const;
    uint64_t agent_total(Label l) const;
    json to_json() const;
};

ConfusionMatrix confusion_report(const std::vector<AnswerEvaluation>& agent_evals,
                                 const std::filesystem::path& human_labels_file);

// ---------------------------------------------------------------------------
// Cross-model score summary.

struct ModelReport {
    std::string model_id;
    std::string evaluator_id;
    Score score;
    // question kind -> answer label -> count, over scored answers
    std::map<std::string, std::map<std::string, uint64_t>> answer_counts;
    uint64_t scored = 0;
    uint64_t evaluation_failed = 0;
    uint64_t missing_responses = 0;
};

ModelReport build_model_report(const std::string& model_id, const std::string& evaluator_id,
                               const std::vector<AnswerEvaluation>& evaluations,
                               const std::vector<Question>& questions,
                               uint64_t missing_responses);

// Machine-readable summary, fixed-width text table, and a plot-ready CSV of
// per-kind answer label shares. An empty model list is an error.
json score_summary_json(const std::vector<ModelReport>& models);
std::string score_summary_text(const std::vector<ModelReport>& models);
std::string distribution_csv(const std::vector<ModelReport>& models);

}  // namespace hypobench
