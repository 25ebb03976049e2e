#include "csc/morphology.hpp"

#include <algorithm>
#include <cctype>

#include "csc/error.hpp"

namespace csc {
namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

struct StemRule {
  std::string_view suffix;
  std::string_view replacement;
  bool after_consonant = false;
};

// First match wins; the remaining stem must keep at least kMinStem letters.
constexpr std::size_t kMinStem = 3;
constexpr StemRule kStemRules[] = {
    {"ousness", ""}, {"fulness", ""}, {"iveness", ""},
    {"bility", "bl"},
    {"ality", ""},   {"icity", ""},   {"ility", "il"}, {"ivity", ""}, {"iness", ""},
    {"ness", ""},    {"ance", ""},    {"ence", ""},    {"ancy", ""},  {"ency", ""},
    {"iful", ""},    {"ical", ""},
    {"ful", ""},     {"ism", ""},     {"ity", ""},     {"ous", ""},   {"ant", ""},
    {"ent", ""},     {"ive", ""},
    {"ic", ""},      {"al", ""},      {"ly", ""},      {"th", "", true},
    {"y", "", true}, {"e", ""},
};

}  // namespace

std::vector<SuffixRule> NominalizationTable::default_suffix_rules() {
  return {
      {"ant", "ance"},   {"ent", "ence"}, {"ous", "ousness"}, {"ile", "ility"}, {"ic", "icity"},
      {"ble", "bility"}, {"ay", "ayness"}, {"ey", "eyness"}, {"oy", "oyness"}, {"y", "iness"},
  };
}

NominalizationTable NominalizationTable::from_file(const std::filesystem::path& path) {
  LineReader reader(path);
  NominalizationTable table;
  std::string line;
  std::size_t n = 0;
  while (reader.next(line)) {
    ++n;
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    auto tab = body.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::data_error, path.string() + ":" + std::to_string(n) + ": expected two tab-separated columns",
                  path.string());
    }
    auto adj = ascii_lower(trim(body.substr(0, tab)));
    auto noun = ascii_lower(trim(body.substr(tab + 1)));
    if (adj.empty() || noun.empty()) {
      throw Error(ErrorCode::data_error, path.string() + ":" + std::to_string(n) + ": empty column", path.string());
    }
    table.exceptions.emplace(std::move(adj), std::move(noun));
  }
  return table;
}

bool is_adjective(std::string_view lemma, const GraphBackend& graph, const TermSet* extra_lexicon) {
  if (extra_lexicon != nullptr && extra_lexicon->contains(std::string(lemma))) return true;
  return graph.has_sense(lemma, Pos::adjective);
}

std::string stem(std::string_view word) {
  std::string w = ascii_lower(word);
  for (const auto& rule : kStemRules) {
    if (w.size() < rule.suffix.size() + kMinStem || !w.ends_with(rule.suffix)) continue;
    const std::size_t cut = w.size() - rule.suffix.size();
    if (rule.after_consonant && is_vowel(w[cut - 1])) continue;
    w.resize(cut);
    w += rule.replacement;
    break;
  }
  return w;
}

bool shares_stem(std::string_view a, std::string_view b) { return stem(a) == stem(b); }

std::string nominalize(std::string_view adjective, const NominalizationTable& table, const GraphBackend* graph) {
  const std::string adj = ascii_lower(trim(adjective));
  if (adj.empty()) throw Error(ErrorCode::precondition, "nominalize: empty adjective");

  if (auto it = table.exceptions.find(adj); it != table.exceptions.end()) return it->second;

  if (graph != nullptr) {
    std::vector<Edge> candidates;
    for (auto kind : {RelationKind::DerivedFrom, RelationKind::FormOf}) {
      const auto rel = Relation::of(kind);
      for (auto dir : {Direction::incoming, Direction::outgoing}) {
        for (auto& e : graph->edges(adj, rel, dir)) {
          const bool noun = e.target.pos ? *e.target.pos == Pos::noun : graph->has_sense(e.target.lemma, Pos::noun);
          if (noun && e.target.lemma != adj && shares_stem(adj, e.target.lemma)) candidates.push_back(std::move(e));
        }
      }
    }
    if (!candidates.empty()) return std::min_element(candidates.begin(), candidates.end(), edge_before)->target.lemma;
  }

  for (const auto& rule : table.suffix_rules) {
    if (adj.size() > rule.suffix.size() && adj.ends_with(rule.suffix)) {
      return adj.substr(0, adj.size() - rule.suffix.size()) + rule.replacement;
    }
  }
  return adj + table.fallback_suffix;
}

}  // namespace csc
