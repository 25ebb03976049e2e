#include "csc/concept_graph.hpp"

#include <algorithm>
#include <limits>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "csc/error.hpp"
#include "csc/io.hpp"

namespace csc {

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::adjective: return "adjective";
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::adverb: return "adverb";
    case Pos::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Pos> parse_pos(std::string_view text) {
  if (text == "adjective" || text == "a" || text == "s" || text == "adj") return Pos::adjective;
  if (text == "noun" || text == "n") return Pos::noun;
  if (text == "verb" || text == "v") return Pos::verb;
  if (text == "adverb" || text == "r" || text == "adv") return Pos::adverb;
  if (text == "unknown") return Pos::unknown;
  return std::nullopt;
}

namespace {

constexpr std::pair<RelationKind, std::string_view> kRelationNames[] = {
    {RelationKind::RelatedTo, "RelatedTo"}, {RelationKind::SimilarTo, "SimilarTo"},
    {RelationKind::Synonym, "Synonym"},     {RelationKind::Antonym, "Antonym"},
    {RelationKind::DerivedFrom, "DerivedFrom"}, {RelationKind::FormOf, "FormOf"},
};

std::uint8_t pos_bit(Pos pos) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(pos)); }

// Finds `"weight"` in the metadata object and parses the number after it.
std::optional<double> metadata_weight(std::string_view json) {
  constexpr std::string_view key = "\"weight\"";
  auto at = json.find(key);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t i = at + key.size();
  while (i < json.size() && (json[i] == ' ' || json[i] == '\t')) ++i;
  if (i >= json.size() || json[i] != ':') return std::nullopt;
  ++i;
  while (i < json.size() && (json[i] == ' ' || json[i] == '\t')) ++i;
  double w = 0.0;
  auto [ptr, ec] = std::from_chars(json.data() + i, json.data() + json.size(), w);
  if (ec != std::errc() || ptr == json.data() + i || !std::isfinite(w)) return std::nullopt;
  return w;
}

bool multiword(std::string_view lemma) {
  return lemma.find('_') != std::string_view::npos || lemma.find(' ') != std::string_view::npos;
}

void write_sense(std::ostream& out, const TermSense& s) {
  binary::write_string(out, s.lemma);
  binary::write_u8(out, s.pos ? static_cast<std::uint8_t>(static_cast<unsigned>(*s.pos) + 1) : 0);
  binary::write_string(out, s.language);
}

TermSense read_sense(std::istream& in) {
  TermSense s;
  s.lemma = binary::read_string(in);
  auto p = binary::read_u8(in);
  if (p > 5) throw Error(ErrorCode::format_error, "graph cache: bad pos tag");
  if (p != 0) s.pos = static_cast<Pos>(p - 1);
  s.language = binary::read_string(in);
  return s;
}

}  // namespace

Relation Relation::from_name(std::string_view name) {
  if (name.starts_with("/r/")) name.remove_prefix(3);
  while (name.ends_with('/')) name.remove_suffix(1);
  for (const auto& [kind, n] : kRelationNames) {
    if (n == name) return Relation{kind, std::string(n)};
  }
  return Relation{RelationKind::Other, std::string(name)};
}

Relation Relation::of(RelationKind kind) {
  for (const auto& [k, n] : kRelationNames) {
    if (k == kind) return Relation{k, std::string(n)};
  }
  throw Error(ErrorCode::precondition, "Relation::of(Other) needs a name");
}

bool Relation::symmetric() const noexcept {
  return kind == RelationKind::RelatedTo || kind == RelationKind::SimilarTo || kind == RelationKind::Synonym ||
         kind == RelationKind::Antonym;
}

std::optional<TermSense> parse_concept_uri(std::string_view uri) {
  if (!uri.starts_with("/c/")) return std::nullopt;
  uri.remove_prefix(3);
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i <= uri.size()) {
    auto j = uri.find('/', i);
    if (j == std::string_view::npos) j = uri.size();
    parts.push_back(uri.substr(i, j - i));
    i = j + 1;
  }
  if (parts.size() < 2 || parts[0].empty() || parts[1].empty()) return std::nullopt;
  TermSense s;
  s.language = std::string(parts[0]);
  s.lemma = ascii_lower(parts[1]);
  if (parts.size() >= 3 && !parts[2].empty()) {
    auto p = parse_pos(parts[2]);
    if (p && parts[2].size() == 1) s.pos = *p;
  }
  return s;
}

bool edge_before(const Edge& a, const Edge& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  if (a.target.lemma != b.target.lemma) return a.target.lemma < b.target.lemma;
  auto rank = [](const std::optional<Pos>& p) { return p ? static_cast<int>(*p) : -1; };
  if (rank(a.target.pos) != rank(b.target.pos)) return rank(a.target.pos) < rank(b.target.pos);
  return a.target.language < b.target.language;
}

std::optional<Assertion> parse_assertion_row(std::string_view line) {
  std::string_view fields[5];
  std::size_t start = 0;
  for (int f = 0; f < 5; ++f) {
    auto tab = f < 4 ? line.find('\t', start) : line.size();
    if (tab == std::string_view::npos) return std::nullopt;
    fields[f] = line.substr(start, tab - start);
    start = tab + 1;
  }
  if (!fields[1].starts_with("/r/")) return std::nullopt;
  auto s = parse_concept_uri(fields[2]);
  auto e = parse_concept_uri(fields[3]);
  auto w = metadata_weight(fields[4]);
  if (!s || !e || !w || *w < 0.0) return std::nullopt;
  return Assertion{Relation::from_name(fields[1]), std::move(*s), std::move(*e), *w};
}

void ConceptGraph::push(Key key, Edge edge) { adjacency_[std::move(key)].push_back(std::move(edge)); }

bool ConceptGraph::add(const Assertion& a, const std::string& language, IngestReport* report) {
  if (a.start.language != language || a.end.language != language) {
    if (report) ++report->dropped_language;
    return false;
  }
  if (multiword(a.start.lemma) || multiword(a.end.lemma)) {
    if (report) ++report->dropped_multiword;
    return false;
  }
  if (a.start.lemma == a.end.lemma) {
    if (report) ++report->dropped_self_loop;
    return false;
  }
  for (const auto* s : {&a.start, &a.end}) {
    auto& mask = senses_[s->lemma];
    if (s->pos) mask |= pos_bit(*s->pos);
  }
  if (a.relation.symmetric()) {
    push({a.start.lemma, a.relation.name, Direction::outgoing}, {a.end, a.weight});
    push({a.end.lemma, a.relation.name, Direction::outgoing}, {a.start, a.weight});
  } else {
    push({a.start.lemma, a.relation.name, Direction::outgoing}, {a.end, a.weight});
    push({a.end.lemma, a.relation.name, Direction::incoming}, {a.start, a.weight});
  }
  ++assertions_;
  if (report) ++report->kept;
  return true;
}

void ConceptGraph::finalize() {
  for (auto& [key, list] : adjacency_) std::stable_sort(list.begin(), list.end(), edge_before);
}

std::vector<Edge> ConceptGraph::edges(std::string_view lemma, const Relation& relation, Direction direction) const {
  if (relation.symmetric()) direction = Direction::outgoing;
  auto it = adjacency_.find(Key{ascii_lower(lemma), relation.name, direction});
  if (it == adjacency_.end()) return {};
  return it->second;
}

bool ConceptGraph::has_sense(std::string_view lemma, Pos pos) const {
  auto it = senses_.find(ascii_lower(lemma));
  return it != senses_.end() && (it->second & pos_bit(pos)) != 0;
}

bool ConceptGraph::contains(std::string_view lemma) const { return senses_.contains(ascii_lower(lemma)); }

bool operator==(const ConceptGraph& a, const ConceptGraph& b) {
  return a.assertions_ == b.assertions_ && a.senses_ == b.senses_ && a.adjacency_ == b.adjacency_;
}

// Layout: magic, u64 assertion count, u64 sense count, senses (lemma, mask),
// u64 list count, lists (lemma, relation, u8 direction, u32 n, n edges of
// sense + f64 weight).
void ConceptGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string(), path.string());
  out.write(kGraphCacheMagic.data(), static_cast<std::streamsize>(kGraphCacheMagic.size()));
  binary::write_u64(out, assertions_);
  std::vector<std::pair<std::string, std::uint8_t>> senses(senses_.begin(), senses_.end());
  std::sort(senses.begin(), senses.end());
  binary::write_u64(out, senses.size());
  for (const auto& [lemma, mask] : senses) {
    binary::write_string(out, lemma);
    binary::write_u8(out, mask);
  }
  binary::write_u64(out, adjacency_.size());
  for (const auto& [key, list] : adjacency_) {
    binary::write_string(out, key.lemma);
    binary::write_string(out, key.relation);
    binary::write_u8(out, key.direction == Direction::outgoing ? 0 : 1);
    binary::write_u32(out, static_cast<std::uint32_t>(list.size()));
    for (const auto& e : list) {
      write_sense(out, e.target);
      binary::write_f64(out, e.weight);
    }
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string(), path.string());
}

ConceptGraph ConceptGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string(), path.string());
  binary::expect_magic(in, kGraphCacheMagic, "graph cache");
  ConceptGraph g;
  g.assertions_ = binary::read_u64(in);
  const auto nsenses = binary::read_u64(in);
  for (std::uint64_t i = 0; i < nsenses; ++i) {
    auto lemma = binary::read_string(in);
    g.senses_[lemma] = binary::read_u8(in);
  }
  const auto nlists = binary::read_u64(in);
  for (std::uint64_t i = 0; i < nlists; ++i) {
    Key key;
    key.lemma = binary::read_string(in);
    key.relation = binary::read_string(in);
    key.direction = binary::read_u8(in) == 0 ? Direction::outgoing : Direction::incoming;
    const auto n = binary::read_u32(in);
    auto& list = g.adjacency_[key];
    list.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
      Edge e;
      e.target = read_sense(in);
      e.weight = binary::read_f64(in);
      list.push_back(std::move(e));
    }
  }
  return g;
}

ConceptGraph ingest_assertions(const std::filesystem::path& path, const std::string& language, IngestReport* report) {
  LineReader reader(path);
  IngestReport rep;
  rep.compressed = reader.compressed();
  ConceptGraph graph;
  std::string line;
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    ++rep.lines;
    auto a = parse_assertion_row(line);
    if (!a) {
      ++rep.malformed;
      continue;
    }
    graph.add(*a, language, &rep);
  }
  if (rep.kept == 0) {
    throw Error(ErrorCode::data_error, "no assertions retained for language " + language, path.string());
  }
  graph.finalize();
  if (report) *report = rep;
  return graph;
}

ConceptGraph load_graph_any(const std::filesystem::path& path, IngestReport* report) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::io_error, "missing file " + path.string(), path.string());
  }
  if (has_magic(path, kGraphCacheMagic)) return ConceptGraph::load(path);
  return ingest_assertions(path, "en", report);
}

std::vector<Relation> default_candidate_relations() {
  return {Relation::of(RelationKind::RelatedTo), Relation::of(RelationKind::SimilarTo),
          Relation::of(RelationKind::Synonym)};
}

namespace {

bool passes_pos(const GraphBackend& graph, const TermSense& sense, std::optional<Pos> filter) {
  if (!filter) return true;
  if (sense.pos) return *sense.pos == *filter;
  return graph.has_sense(sense.lemma, *filter);
}

}  // namespace

RelatedResult related_terms(const GraphBackend& graph, std::string_view query, std::optional<Pos> pos_filter,
                            const std::vector<Relation>& relations, std::size_t limit) {
  if (limit == 0) throw Error(ErrorCode::precondition, "related_terms: limit must be >= 1");
  if (relations.empty()) throw Error(ErrorCode::precondition, "related_terms: relation set is empty");
  const std::string q = ascii_lower(trim(query));
  RelatedResult result;
  result.found = graph.contains(q);
  if (!result.found) return result;

  std::unordered_map<std::string, RelatedTerm> best;
  for (const auto& rel : relations) {
    for (auto& e : graph.edges(q, rel)) {
      if (e.target.lemma == q || !passes_pos(graph, e.target, pos_filter)) continue;
      auto sense = e.target;
      if (pos_filter) sense.pos = *pos_filter;
      auto [it, inserted] = best.try_emplace(sense.lemma, RelatedTerm{sense, e.weight, rel});
      if (!inserted && e.weight > it->second.weight) it->second = RelatedTerm{sense, e.weight, rel};
    }
  }
  result.terms.reserve(best.size());
  for (auto& [_, t] : best) result.terms.push_back(std::move(t));
  std::sort(result.terms.begin(), result.terms.end(), [](const RelatedTerm& a, const RelatedTerm& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.sense.lemma < b.sense.lemma;
  });
  if (result.terms.size() > limit) result.terms.resize(limit);
  return result;
}

namespace {

std::vector<AntonymCandidate> direct_antonyms(const GraphBackend& graph, const std::string& q,
                                              std::optional<Pos> pos_filter) {
  auto related = related_terms(graph, q, pos_filter, {Relation::of(RelationKind::Antonym)},
                               std::numeric_limits<std::size_t>::max());
  std::vector<AntonymCandidate> out;
  out.reserve(related.terms.size());
  for (auto& t : related.terms) out.push_back({std::move(t.sense), t.weight, false, {}});
  return out;
}

}  // namespace

std::vector<AntonymCandidate> antonyms(const GraphBackend& graph, std::string_view query,
                                       std::optional<Pos> pos_filter) {
  const std::string q = ascii_lower(trim(query));
  if (!graph.contains(q)) return {};
  auto direct = direct_antonyms(graph, q, pos_filter);
  if (!direct.empty()) return direct;

  auto synonyms = related_terms(graph, q, pos_filter, {Relation::of(RelationKind::Synonym)}, 3);
  std::vector<AntonymCandidate> out;
  std::unordered_set<std::string> seen{q};
  for (const auto& syn : synonyms.terms) {
    for (auto& a : direct_antonyms(graph, syn.sense.lemma, pos_filter)) {
      if (!seen.insert(a.sense.lemma).second) continue;
      a.indirect = true;
      a.via = syn.sense.lemma;
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace csc
