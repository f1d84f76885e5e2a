#include "hypobench/reporting.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace hypobench {

namespace {

const Label kLabels[] = {Label::valid, Label::hallucination, Label::irrelevant};

int label_index(Label l) {
    switch (l) {
        case Label::valid: return 0;
        case Label::hallucination: return 1;
        case Label::irrelevant: return 2;
    }
    return 2;
}

std::string pct_str(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << x;
    return os.str();
}

void finalize_group(std::map<std::string, DistributionCell>& group) {
    uint64_t total = 0;
    for (const auto& [label, cell] : group) {
        total += cell.count;
    }
    if (total == 0) {
        return;
    }
    for (auto& [label, cell] : group) {
        cell.percentage = 100.0 * static_cast<double>(cell.count) / static_cast<double>(total);
    }
}

}  // namespace

json LabelDistribution::to_json() const {
    json out;
    out["empty_input"] = empty_input;
    for (const auto& [grouping, groups] : groupings) {
        for (const auto& [group, cells] : groups) {
            for (const auto& [label, cell] : cells) {
                out["groupings"][grouping][group][label] = {
                    {"count", cell.count}, {"percentage", cell.percentage}};
            }
        }
    }
    return out;
}

LabelDistribution distribution_report(const std::vector<AnswerEvaluation>& evaluations,
                                      const std::vector<Question>& questions) {
    LabelDistribution dist;
    std::map<std::string, const Question*> question_of;
    for (const auto& q : questions) {
        question_of[q.id] = &q;
    }

    auto ensure_labels = [](std::map<std::string, DistributionCell>& group) {
        for (Label l : kLabels) {
            group[to_string(l)];
        }
    };

    uint64_t seen_terms = 0;
    for (const auto& eval : evaluations) {
        if (eval.evaluation_failed) {
            continue;
        }
        auto qit = question_of.find(eval.question_id);
        for (size_t t = 0; t < eval.term_evals.size(); ++t) {
            const TermEvaluation& term = eval.term_evals[t];
            ++seen_terms;
            std::string label = to_string(term.label);

            auto& by_type = dist.groupings["term_type"][to_string(term.term_kind)];
            ensure_labels(by_type);
            by_type[label].count++;

            if (term.term_kind == TermKind::valid && qit != question_of.end()) {
                const Question& question = *qit->second;
                const QuestionTerm& qterm = t == 0 ? question.term_a : question.term_b;
                if (!qterm.source.empty() && qterm.source != "generated") {
                    auto& by_source = dist.groupings["valid_term_source"][qterm.source];
                    ensure_labels(by_source);
                    by_source[label].count++;
                }
            }

            // Per-check outcomes over the terms each check saw.
            auto& inclusion = dist.groupings["evaluation_type"]["inclusion_check"];
            ensure_labels(inclusion);
            inclusion[term.present ? "valid" : "irrelevant"].count++;
            if (term.present && term.acceptance.has_value()) {
                auto& acceptance = dist.groupings["evaluation_type"]["acceptance_check"];
                ensure_labels(acceptance);
                Label outcome;
                if (term.term_kind == TermKind::hypothetical) {
                    outcome = *term.acceptance == Acceptance::accept ? Label::hallucination
                                                                     : Label::valid;
                } else {
                    outcome = *term.acceptance == Acceptance::refuse
                                  ? Label::hallucination
                                  : (*term.acceptance == Acceptance::unknown ? Label::irrelevant
                                                                             : Label::valid);
                }
                acceptance[to_string(outcome)].count++;
            }
            if (term.meaning_ok.has_value()) {
                auto& meaning = dist.groupings["evaluation_type"]["meaning_check"];
                ensure_labels(meaning);
                meaning[*term.meaning_ok ? "valid" : "hallucination"].count++;
            }
        }
    }
    dist.empty_input = seen_terms == 0;
    for (auto& [grouping, groups] : dist.groupings) {
        for (auto& [group, cells] : groups) {
            finalize_group(cells);
        }
    }
    return dist;
}

uint64_t ConfusionMatrix::human_total(Label l) const {
    uint64_t sum = 0;
    for (int a = 0; a < 3; ++a) {
        sum += counts[label_index(l)][a];
    }
    return sum;
}

uint64_t ConfusionMatrix::agent_total(Label l) const {
    uint64_t sum = 0;
    for (int h = 0; h < 3; ++h) {
        sum += counts[h][label_index(l)];
    }
    return sum;
}

json ConfusionMatrix::to_json() const {
    json cells;
    for (Label human : kLabels) {
        for (Label agent : kLabels) {
            cells[to_string(human)][to_string(agent)] =
                counts[label_index(human)][label_index(agent)];
        }
    }
    return json{{"rows", "human"},
                {"cols", "agent"},
                {"counts", cells},
                {"total", total},
                {"error_rate", error_rate},
                {"rejected", rejected}};
}

ConfusionMatrix confusion_report(const std::vector<AnswerEvaluation>& agent_evals,
                                 const std::filesystem::path& human_labels_file) {
    std::map<std::string, Label> agent_of;
    for (const auto& eval : agent_evals) {
        if (!eval.evaluation_failed) {
            agent_of[eval.question_id] = eval.label;
        }
    }
    ConfusionMatrix matrix;
    auto lines = read_jsonl(human_labels_file, [&](size_t line_no, const std::string&) {
        matrix.rejected.push_back(json{{"line_no", line_no}, {"reason", "malformed line"}});
    });
    for (const auto& line : lines) {
        if (!line.value.is_object() || !line.value.contains("question_id") ||
            !line.value.contains("label")) {
            matrix.rejected.push_back(
                json{{"line_no", line.line_no}, {"reason", "missing question_id or label"}});
            continue;
        }
        Label human;
        try {
            human = label_from(line.value["label"].get<std::string>());
        } catch (const DataError&) {
            matrix.rejected.push_back(json{{"line_no", line.line_no},
                                           {"reason", "label outside {valid, hallucination, irrelevant}"}});
            continue;
        }
        auto it = agent_of.find(line.value["question_id"].get<std::string>());
        if (it == agent_of.end()) {
            continue;  // only doubly labeled answers enter the matrix
        }
        matrix.counts[label_index(human)][label_index(it->second)]++;
        ++matrix.total;
    }
    if (matrix.total > 0) {
        uint64_t off_diagonal = 0;
        for (int h = 0; h < 3; ++h) {
            for (int a = 0; a < 3; ++a) {
                if (h != a) {
                    off_diagonal += matrix.counts[h][a];
                }
            }
        }
        matrix.error_rate =
            100.0 * static_cast<double>(off_diagonal) / static_cast<double>(matrix.total);
    }
    return matrix;
}

ModelReport build_model_report(const std::string& model_id, const std::string& evaluator_id,
                               const std::vector<AnswerEvaluation>& evaluations,
                               const std::vector<Question>& questions,
                               uint64_t missing_responses) {
    ModelReport report;
    report.model_id = model_id;
    report.evaluator_id = evaluator_id;
    report.missing_responses = missing_responses;
    std::map<std::string, QuestionKind> kind_of;
    for (const auto& q : questions) {
        kind_of[q.id] = q.kind;
    }
    for (const auto& eval : evaluations) {
        if (eval.evaluation_failed) {
            ++report.evaluation_failed;
            continue;
        }
        ++report.scored;
        auto it = kind_of.find(eval.question_id);
        std::string kind = it == kind_of.end() ? "unknown" : to_string(it->second);
        report.answer_counts[kind][to_string(eval.label)]++;
    }
    report.score = hypothetical_term_score(evaluations, questions);
    return report;
}

json score_summary_json(const std::vector<ModelReport>& models) {
    if (models.empty()) {
        throw DataError("score summary requested with no scored models");
    }
    json rows = json::array();
    for (const auto& m : models) {
        json kinds;
        for (const auto& [kind, labels] : m.answer_counts) {
            uint64_t kind_total = 0;
            for (const auto& [label, count] : labels) {
                kind_total += count;
            }
            for (Label l : kLabels) {
                uint64_t count = 0;
                auto it = labels.find(to_string(l));
                if (it != labels.end()) {
                    count = it->second;
                }
                kinds[kind][to_string(l)] = {
                    {"count", count},
                    {"percentage", kind_total == 0
                                       ? 0.0
                                       : 100.0 * static_cast<double>(count) / kind_total}};
            }
        }
        rows.push_back(json{{"model_id", m.model_id},
                            {"evaluator_id", m.evaluator_id},
                            {"score", m.score.to_json()},
                            {"answer_labels_by_kind", kinds},
                            {"coverage",
                             {{"scored", m.scored},
                              {"evaluation_failed", m.evaluation_failed},
                              {"missing_responses", m.missing_responses}}}});
    }
    return json{{"models", rows}};
}

std::string score_summary_text(const std::vector<ModelReport>& models) {
    if (models.empty()) {
        throw DataError("score summary requested with no scored models");
    }
    std::ostringstream os;
    os << std::left << std::setw(28) << "model" << std::right << std::setw(10) << "HTS"
       << std::setw(10) << "error" << std::setw(8) << "|V_A|" << std::setw(8) << "|H_Q|"
       << std::setw(9) << "scored" << "\n";
    os << std::string(73, '-') << "\n";
    for (const auto& m : models) {
        os << std::left << std::setw(28) << m.model_id << std::right << std::setw(10)
           << pct_str(m.score.hts) << std::setw(10) << pct_str(m.score.error_rate) << std::setw(8)
           << m.score.numerator << std::setw(8) << m.score.denominator << std::setw(9) << m.scored
           << "\n";
    }
    return os.str();
}

std::string distribution_csv(const std::vector<ModelReport>& models) {
    if (models.empty()) {
        throw DataError("score summary requested with no scored models");
    }
    std::ostringstream os;
    os << "model,question_kind,answer_label,count,share\n";
    for (const auto& m : models) {
        for (const auto& [kind, labels] : m.answer_counts) {
            uint64_t kind_total = 0;
            for (const auto& [label, count] : labels) {
                kind_total += count;
            }
            for (Label l : kLabels) {
                uint64_t count = 0;
                auto it = labels.find(to_string(l));
                if (it != labels.end()) {
                    count = it->second;
                }
                double share =
                    kind_total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / kind_total;
                os << m.model_id << ',' << kind << ',' << to_string(l) << ',' << count << ','
                   << pct_str(share) << "\n";
            }
        }
    }
    return os.str();
}

}  // namespace hypobench
