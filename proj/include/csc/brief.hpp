#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csc/concept_graph.hpp"
#include "csc/io.hpp"

namespace csc {

inline constexpr std::size_t kMaxBriefLength = 10000;

struct DesignBrief {
  std::string text;
  std::optional<std::string> id;
};

// Throws Error(bad_request) for blank or over-long briefs.
void validate_brief(const DesignBrief& brief);

// Lowercases ASCII and splits on anything that is not a letter or an
// internal hyphen. A hyphenated token is emitted whole, followed by its
// parts: "easy-going" -> "easy-going", "easy", "going".
std::vector<std::string> tokenize_brief(std::string_view text);

struct QueryWords {
  std::vector<std::string> words;  // first-occurrence order, unique
  bool no_query_words = false;
};

QueryWords extract_query_adjectives(const DesignBrief& brief, const GraphBackend& graph, const TermSet& stopwords,
                                    const TermSet* extra_lexicon = nullptr);

}  // namespace csc
