#pragma once

#include <string>
#include <vector>

#include "hypobench/jsonl.hpp"
#include "hypobench/providers.hpp"
#include "hypobench/questions.hpp"

namespace hypobench {

struct Response {
    std::string question_id;
    std::string model_id;
    std::string text;  // preserved verbatim
    double temperature = 0.0;
    int max_tokens = 0;  // 0 = backend default
    std::string collected_via = "api";  // "api" | "import"

    json to_json() const;
    static Response from_json(const json& j);
};

struct RespondPolicy {
    std::string model_id;
    double temperature = 0.0;
    int parallelism = 1;
};

struct CollectOutcome {
    std::vector<Response> responses;  // in question order
    std::vector<json> missing;        // {question_id, reason} for non-fatal failures
};

// Prompts the system under test with each question verbatim. Answers are
// checkpointed as they arrive; unavailable/rate-limited backends abort (the
// checkpoint makes the rerun cheap), other provider failures are recorded as
// missing and the run continues.
CollectOutcome collect_responses(const std::vector<Question>& questions, ChatProvider& chat,
                                 const RespondPolicy& policy, Checkpoint* checkpoint = nullptr);

struct ImportOutcome {
    std::vector<Response> responses;
    std::vector<json> rejected;   // {line_no, reason}
    uint64_t duplicate_rows = 0;  // later rows replacing earlier ones (last wins)
};

// Reads externally collected answers: JSONL rows {question_id, text}. Unknown
// ids and malformed rows are rejected with their line numbers; a file with no
// valid row at all is an error.
ImportOutcome import_responses(const std::filesystem::path& file,
                               const std::vector<Question>& questions,
                               const std::string& model_id);

void write_responses(const std::filesystem::path& path, const std::vector<Response>& responses);
std::vector<Response> read_responses(const std::filesystem::path& path);

}  // namespace hypobench
