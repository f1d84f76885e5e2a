#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypobench/corpus.hpp"
#include "hypobench/jsonl.hpp"
#include "hypobench/providers.hpp"
#include "hypobench/vectorindex.hpp"

namespace hypobench {

struct Topic {
    std::string name;
    std::string explanation;
    int index = 0;  // 1..20

    // "Name: explanation" as used inside downstream prompts.
    std::string prompt_text() const { return name + ": " + explanation; }

    json to_json() const;
    static Topic from_json(const json& j);
};

struct HypotheticalTerm {
    std::string phrase;              // at least four words
    std::string made_up_definition;
    Topic topic;
    bool web_validated = false;      // true only after a zero-hit web check

    std::string prompt_text() const { return phrase + ": " + made_up_definition; }

    json to_json() const;
    static HypotheticalTerm from_json(const json& j);
};

enum class ValidSource { llm_suggestion, title_sim, text_sim };

const char* to_string(ValidSource source);
ValidSource valid_source_from(const std::string& name);

struct ValidTerm {
    std::string phrase;      // exact Wikipedia title
    std::string definition;  // the page's first paragraph, verbatim
    std::string page_id;
    ValidSource source = ValidSource::llm_suggestion;
    int similarity_rank = 0;  // 1-based within its source list

    std::string prompt_text() const { return phrase + ": " + definition; }

    json to_json() const;
    static ValidTerm from_json(const json& j);
};

// One of the nine pairs per surviving hypothetical term. `partner` is the
// next-most-similar valid term from the same source list (rank + 3); it leads
// the pair's valid question and substitutes into the replaced question.
struct TermPair {
    std::string pair_id;
    HypotheticalTerm hypothetical;
    ValidTerm valid;
    ValidTerm partner;
    bool cross_source_duplicate = false;

    json to_json() const;
    static TermPair from_json(const json& j);
};

struct GenerationPolicy {
    int list_retries = 2;             // extra attempts when a list fails to parse
    int pairs_per_source = 3;
    int min_terms_per_source = 6;     // 3 pair terms + 3 partners
    int knn_k = 50;
    bool drop_hyphenated_terms = false;  // default: warn and keep
    std::string generator_model;
};

// ---------------------------------------------------------------------------
// Stage operations

// Exactly 20 parsed topics. Malformed or short lists trigger rewritten
// retries; on final failure the raw reply is written next to raw_failure_path
// (if given) and a DataError is thrown.
std::vector<Topic> generate_topics(ChatProvider& chat, const GenerationPolicy& policy,
                                   const std::filesystem::path& raw_failure_path = {});

// Invented terms with their made-up definitions, local gates applied (word
// count, banned words, hyphen policy). Gate drops are reported via warnings.
std::vector<HypotheticalTerm> generate_hypothetical_terms(const Topic& topic, ChatProvider& chat,
                                                          const GenerationPolicy& policy,
                                                          std::vector<std::string>* warnings);

struct ValidationOutcome {
    std::vector<HypotheticalTerm> retained;  // zero-hit terms, web_validated=true
    uint64_t excluded = 0;
};

// Quoted web search per phrase; terms with any hits are excluded. Progress
// lands in the checkpoint after each lookup so a rate-limited run resumes
// where it stopped.
ValidationOutcome validate_nonexistence(const std::vector<HypotheticalTerm>& terms,
                                        SearchProvider& search, Checkpoint* checkpoint);

// The three retrieval channels. Items that do not resolve to an exact corpus
// title (or that collapse to the hypothetical phrase itself) are dropped;
// survivor order defines similarity_rank.
std::vector<ValidTerm> retrieve_llm_suggestions(const HypotheticalTerm& term, ChatProvider& chat,
                                                const CorpusStore& corpus,
                                                const GenerationPolicy& policy,
                                                std::vector<std::string>* warnings);

std::vector<ValidTerm> retrieve_title_similar(const HypotheticalTerm& term,
                                              const VectorIndex& title_index,
                                              const CorpusStore& corpus,
                                              EmbeddingProvider& embedder,
                                              const GenerationPolicy& policy);

std::vector<ValidTerm> retrieve_text_similar(const HypotheticalTerm& term,
                                             const VectorIndex& definition_index,
                                             const CorpusStore& corpus,
                                             EmbeddingProvider& embedder,
                                             const GenerationPolicy& policy);

struct PairAssembly {
    std::vector<TermPair> pairs;  // exactly 9 when the term survives
    bool dropped = false;
    std::string drop_reason;
};

// Top pairs_per_source terms of each source paired with the term, partners
// drawn from the following ranks. A term whose source lists are too short is
// dropped (dropping is a reported value, not an error).
PairAssembly assemble_term_pairs(const HypotheticalTerm& term,
                                 const std::vector<ValidTerm>& suggestions,
                                 const std::vector<ValidTerm>& title_hits,
                                 const std::vector<ValidTerm>& text_hits,
                                 const GenerationPolicy& policy);

// ---------------------------------------------------------------------------
// List-reply parsing (numbered, bulleted, or JSON/Python arrays).

std::vector<std::string> parse_list_items(const std::string& reply);

// Splits "Phrase: explanation" at the first colon; explanation may be empty.
std::pair<std::string, std::string> split_phrase_explanation(const std::string& item);

}  // namespace hypobench
