#include "csc/brief.hpp"

#include <unordered_set>

#include "csc/error.hpp"
#include "csc/morphology.hpp"

namespace csc {
namespace {

bool is_letter(char c) { return c >= 'a' && c <= 'z'; }

}  // namespace

void validate_brief(const DesignBrief& brief) {
  if (trim(brief.text).empty()) throw Error(ErrorCode::bad_request, "design brief is empty");
  if (brief.text.size() > kMaxBriefLength) {
    throw Error(ErrorCode::bad_request, "design brief exceeds " + std::to_string(kMaxBriefLength) + " characters");
  }
}

std::vector<std::string> tokenize_brief(std::string_view text) {
  const std::string lower = ascii_lower(text);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < lower.size()) {
    if (!is_letter(lower[i])) {
      ++i;
      continue;
    }
    std::vector<std::string> parts{{}};
    while (i < lower.size()) {
      if (is_letter(lower[i])) {
        parts.back().push_back(lower[i++]);
      } else if (lower[i] == '-' && i + 1 < lower.size() && is_letter(lower[i + 1])) {
        parts.emplace_back();
        ++i;
      } else {
        break;
      }
    }
    if (parts.size() > 1) {
      std::string whole = parts.front();
      for (std::size_t p = 1; p < parts.size(); ++p) whole += "-" + parts[p];
      tokens.push_back(std::move(whole));
    }
    for (auto& p : parts) tokens.push_back(std::move(p));
  }
  return tokens;
}

QueryWords extract_query_adjectives(const DesignBrief& brief, const GraphBackend& graph, const TermSet& stopwords,
                                    const TermSet* extra_lexicon) {
  validate_brief(brief);
  QueryWords out;
  std::unordered_set<std::string> seen;
  for (auto& token : tokenize_brief(brief.text)) {
    if (stopwords.contains(token) || seen.contains(token)) continue;
    seen.insert(token);
    if (is_adjective(token, graph, extra_lexicon)) out.words.push_back(std::move(token));
  }
  out.no_query_words = out.words.empty();
  return out;
}

}  // namespace csc
