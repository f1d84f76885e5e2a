#pragma once

#include <string>
#include <string_view>

#include "hypobench/common.hpp"

namespace hypobench::textnorm {

// Containment is tested in three cumulative stages, applied to BOTH strings:
//   raw              lowercase + whitespace collapse
//   bracket_stripped then "( ... )" and "[ ... ]" spans deleted
//   punct_stripped   then dashes replaced by spaces, punctuation removed
// A report carries the first stage at which the subtext was found.
enum class MatchStage { raw, bracket_stripped, punct_stripped, none };

struct MatchReport {
    bool matched = false;
    MatchStage stage = MatchStage::none;
};

const char* to_string(MatchStage stage);

// True iff subtext occurs in text under one of the normalization stages.
// A blank subtext never matches.
MatchReport contains_term(std::string_view text, std::string_view subtext);

class NotReplaceableError : public DataError {
public:
    using DataError::DataError;
};

// Replaces the first occurrence of old_term in text with new_term, verbatim.
// The occurrence is located under the first stage at which old_term matches;
// the replaced span is mapped back to the original bytes, so the rest of the
// text keeps its casing, spacing and punctuation. Throws NotReplaceableError
// when old_term does not match at any stage.
std::string replace_term(std::string_view text, std::string_view old_term,
                         std::string_view new_term);

// The fully normalized form (all stages applied), re-encoded as UTF-8.
// Idempotent; used for duplicate detection and phrase-equality checks.
std::string full_normalize(std::string_view text);

}  // namespace hypobench::textnorm
