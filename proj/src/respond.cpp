#include "hypobench/respond.hpp"

#include <map>
#include <mutex>
#include <set>

#include "hypobench/parallel.hpp"

namespace hypobench {

json Response::to_json() const {
    return json{{"question_id", question_id},
                {"model_id", model_id},
                {"text", text},
                {"decoding", {{"temperature", temperature}, {"max_tokens", max_tokens}}},
                {"collected_via", collected_via}};
}

Response Response::from_json(const json& j) {
    Response r;
    r.question_id = j.value("question_id", "");
    r.model_id = j.value("model_id", "");
    r.text = j.value("text", "");
    json decoding = j.value("decoding", json::object());
    r.temperature = decoding.value("temperature", 0.0);
    r.max_tokens = decoding.value("max_tokens", 0);
    r.collected_via = j.value("collected_via", "api");
    return r;
}

CollectOutcome collect_responses(const std::vector<Question>& questions, ChatProvider& chat,
                                 const RespondPolicy& policy, Checkpoint* checkpoint) {
    struct Slot {
        bool ok = false;
        std::string text;
        std::string failure;
    };
    std::vector<Slot> slots(questions.size());
    std::mutex checkpoint_mutex;

    parallel_for(questions.size(), policy.parallelism, [&](size_t i) {
        const Question& question = questions[i];
        std::string key = question.id + "|" + policy.model_id;
        if (checkpoint != nullptr) {
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            if (const json* hit = checkpoint->get(key)) {
                slots[i].ok = hit->value("ok", false);
                slots[i].text = hit->value("text", "");
                slots[i].failure = hit->value("failure", "");
                return;
            }
        }
        ChatRequest req;
        req.user_turns = {question.text};
        req.temperature = policy.temperature;
        req.model_id = policy.model_id;
        Slot slot;
        try {
            slot.text = chat.chat(req);
            slot.ok = true;
        } catch (const ProviderError& e) {
            if (e.kind() == ProviderErrorKind::unavailable ||
                e.kind() == ProviderErrorKind::rate_limit) {
                throw;  // resumable; everything finished so far is checkpointed
            }
            slot.failure = std::string(to_string(e.kind())) + ": " + e.what();
        }
        if (checkpoint != nullptr) {
            std::lock_guard<std::mutex> lock(checkpoint_mutex);
            checkpoint->put(key, json{{"ok", slot.ok}, {"text", slot.text},
                                      {"failure", slot.failure}});
        }
        slots[i] = std::move(slot);
    });

    CollectOutcome outcome;
    for (size_t i = 0; i < questions.size(); ++i) {
        if (slots[i].ok) {
            Response r;
            r.question_id = questions[i].id;
            r.model_id = policy.model_id;
            r.text = slots[i].text;
            r.temperature = policy.temperature;
            r.collected_via = "api";
            outcome.responses.push_back(std::move(r));
        } else {
            outcome.missing.push_back(
                json{{"question_id", questions[i].id}, {"reason", slots[i].failure}});
        }
    }
    return outcome;
}

ImportOutcome import_responses(const std::filesystem::path& file,
                               const std::vector<Question>& questions,
                               const std::string& model_id) {
    std::set<std::string> known_ids;
    for (const auto& q : questions) {
        known_ids.insert(q.id);
    }
    ImportOutcome outcome;
    std::map<std::string, size_t> slot_of;  // question_id -> index in responses
    auto lines = read_jsonl(file, [&](size_t line_no, const std::string&) {
        outcome.rejected.push_back(json{{"line_no", line_no}, {"reason", "malformed line"}});
    });
    for (const auto& line : lines) {
        if (!line.value.is_object() || !line.value.contains("question_id") ||
            !line.value.contains("text") || !line.value["text"].is_string()) {
            outcome.rejected.push_back(
                json{{"line_no", line.line_no}, {"reason", "missing question_id or text"}});
            continue;
        }
        std::string id = line.value["question_id"].get<std::string>();
        if (known_ids.count(id) == 0) {
            outcome.rejected.push_back(json{
                {"line_no", line.line_no}, {"reason", "unknown question_id"}, {"question_id", id}});
            continue;
        }
        Response r;
        r.question_id = id;
        r.model_id = model_id;
        r.text = line.value["text"].get<std::string>();
        r.collected_via = "import";
        auto it = slot_of.find(id);
        if (it != slot_of.end()) {
            outcome.responses[it->second] = std::move(r);  // last wins
            ++outcome.duplicate_rows;
        } else {
            slot_of[id] = outcome.responses.size();
            outcome.responses.push_back(std::move(r));
        }
    }
    if (outcome.responses.empty()) {
        throw DataError("no valid rows in response file " + file.string());
    }
    return outcome;
}

void write_responses(const std::filesystem::path& path, const std::vector<Response>& responses) {
    std::vector<json> lines;
    lines.reserve(responses.size());
    for (const auto& r : responses) {
        lines.push_back(r.to_json());
    }
    write_jsonl(path, lines);
}

std::vector<Response> read_responses(const std::filesystem::path& path) {
    std::vector<Response> out;
    for (auto& line : read_jsonl(path)) {
        out.push_back(Response::from_json(line.value));
    }
    return out;
}

}  // namespace hypobench
