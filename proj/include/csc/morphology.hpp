#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csc/concept_graph.hpp"
#include "csc/io.hpp"

namespace csc {

struct SuffixRule {
  std::string suffix;
  std::string replacement;
};

// Adjective -> noun-form conversion data. Exceptions win over rules; rules
// are tried first-match in order; `fallback_suffix` is appended otherwise.
struct NominalizationTable {
  std::unordered_map<std::string, std::string> exceptions;
  std::vector<SuffixRule> suffix_rules = default_suffix_rules();
  std::string fallback_suffix = "ness";

  static std::vector<SuffixRule> default_suffix_rules();

  // Two-column TSV (adjective, noun); "#" starts a comment.
  static NominalizationTable from_file(const std::filesystem::path& path);
};

bool is_adjective(std::string_view lemma, const GraphBackend& graph, const TermSet* extra_lexicon = nullptr);

// Resolution order: exception table, a DerivedFrom/FormOf noun neighbour in
// the graph that shares the adjective's stem, suffix rules, fallback suffix.
std::string nominalize(std::string_view adjective, const NominalizationTable& table,
                       const GraphBackend* graph = nullptr);

// Deterministic suffix-stripping stem (see kStemRules in morphology.cpp).
std::string stem(std::string_view word);

bool shares_stem(std::string_view a, std::string_view b);

}  // namespace csc
