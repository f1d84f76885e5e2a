#pragma once

#include <string>

#include "hypobench/providers.hpp"

namespace hypobench::prompts {

// The prompt protocol the pipeline speaks. Placeholders are filled verbatim;
// "term text" means "Phrase: definition".

ChatRequest topic_listing(const std::string& model);

ChatRequest term_generation(const std::string& topic_text, const std::string& model);

// Follow-up turn on the term-generation conversation.
ChatRequest term_explanations(const ChatRequest& generation_request,
                              const std::string& generated_list);

ChatRequest similar_term_suggestion(const std::string& topic_text,
                                    const std::string& made_up_term_text,
                                    const std::string& model);

ChatRequest hypothetical_question(const std::string& topic_text,
                                  const std::string& made_up_term_text,
                                  const std::string& real_term_text, const std::string& model);

ChatRequest valid_question(const std::string& topic_text, const std::string& main_term_text,
                           const std::string& secondary_term_text, const std::string& model);

ChatRequest acceptance_check(const std::string& term, const std::string& question,
                             const std::string& answer, const std::string& model);

ChatRequest meaning_check(const std::string& term, const std::string& term_definition,
                          const std::string& question, const std::string& answer,
                          const std::string& model);

// Appends the failed reply and a corrective instruction as a fresh turn, so a
// retry is a distinct request even at temperature zero (and under caching).
ChatRequest with_retry_turn(ChatRequest req, const std::string& failed_reply,
                            const std::string& reminder);

}  // namespace hypobench::prompts
