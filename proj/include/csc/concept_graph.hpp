#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace csc {

enum class Pos { adjective, noun, verb, adverb, unknown };

std::string_view to_string(Pos pos);
std::optional<Pos> parse_pos(std::string_view text);

// Known relation kinds; anything else is kept as Other with its name.
enum class RelationKind { RelatedTo, SimilarTo, Synonym, Antonym, DerivedFrom, FormOf, Other };

struct Relation {
  RelationKind kind = RelationKind::Other;
  std::string name;

  static Relation from_name(std::string_view name);  // "Antonym" or "/r/Antonym"
  static Relation of(RelationKind kind);
  bool symmetric() const noexcept;

  friend bool operator==(const Relation& a, const Relation& b) { return a.name == b.name; }
  friend auto operator<=>(const Relation& a, const Relation& b) { return a.name <=> b.name; }
};

struct TermSense {
  std::string lemma;
  std::optional<Pos> pos;
  std::string language = "en";

  friend bool operator==(const TermSense&, const TermSense&) = default;
};

// "/c/en/warm/a/wn/..." -> {warm, adjective, en}. Returns nullopt for
// anything that is not a concept URI with a non-empty lemma.
std::optional<TermSense> parse_concept_uri(std::string_view uri);

struct Assertion {
  Relation relation;
  TermSense start;
  TermSense end;
  double weight = 1.0;
};

struct Edge {
  TermSense target;
  double weight = 0.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Total order used by every adjacency list and ranked result:
// descending weight, then ascending lemma, pos, language.
bool edge_before(const Edge& a, const Edge& b);

enum class Direction { outgoing, incoming };

// Read interface shared by the local dump index and the remote client. For
// symmetric relations both directions are the same list.
class GraphBackend {
 public:
  virtual ~GraphBackend() = default;
  virtual std::vector<Edge> edges(std::string_view lemma, const Relation& relation,
                                  Direction direction = Direction::outgoing) const = 0;
  virtual bool has_sense(std::string_view lemma, Pos pos) const = 0;
  virtual bool contains(std::string_view lemma) const = 0;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_multiword = 0;
  std::size_t dropped_self_loop = 0;
  std::size_t malformed = 0;
  bool compressed = false;
};

class ConceptGraph final : public GraphBackend {
 public:
  ConceptGraph() = default;

  // Adds one assertion (and its mirror for symmetric relations). Returns
  // false when the assertion is dropped by the language / multiword /
  // self-loop rules. Call finalize() after the last add.
  bool add(const Assertion& assertion, const std::string& language = "en", IngestReport* report = nullptr);
  void finalize();

  std::vector<Edge> edges(std::string_view lemma, const Relation& relation,
                          Direction direction = Direction::outgoing) const override;
  bool has_sense(std::string_view lemma, Pos pos) const override;
  bool contains(std::string_view lemma) const override;

  std::size_t assertion_count() const noexcept { return assertions_; }
  std::size_t lemma_count() const noexcept { return senses_.size(); }

  void save(const std::filesystem::path& path) const;
  static ConceptGraph load(const std::filesystem::path& path);

  friend bool operator==(const ConceptGraph& a, const ConceptGraph& b);

 private:
  struct Key {
    std::string lemma;
    std::string relation;
    Direction direction;
    auto operator<=>(const Key&) const = default;
  };
  void push(Key key, Edge edge);

  std::map<Key, std::vector<Edge>> adjacency_;
  std::unordered_map<std::string, std::uint8_t> senses_;  // bit per Pos
  std::size_t assertions_ = 0;
};

inline constexpr std::string_view kGraphCacheMagic = "CSGRF1";

// Tab-separated dump: assertion URI, relation URI, start URI, end URI, JSON
// metadata with a "weight" number. Plain or gzip.
ConceptGraph ingest_assertions(const std::filesystem::path& path, const std::string& language = "en",
                               IngestReport* report = nullptr);

// CSGRF1 cache or dump, chosen by leading bytes.
ConceptGraph load_graph_any(const std::filesystem::path& path, IngestReport* report = nullptr);

// Parses one dump row; nullopt when the row is malformed.
std::optional<Assertion> parse_assertion_row(std::string_view line);

struct RelatedTerm {
  TermSense sense;
  double weight = 0.0;
  Relation relation;  // relation of the strongest edge
};

struct RelatedResult {
  std::vector<RelatedTerm> terms;
  bool found = false;  // query lemma is present in the graph at all
};

std::vector<Relation> default_candidate_relations();

// Union over `relations`, one entry per lemma at its maximum weight, ordered by
// (-weight, lemma); the query itself is never returned. An edge whose target
// carries no PoS tag passes `pos_filter` when the graph holds a sense of that
// lemma with the requested PoS.
RelatedResult related_terms(const GraphBackend& graph, std::string_view query, std::optional<Pos> pos_filter,
                            const std::vector<Relation>& relations, std::size_t limit);

struct AntonymCandidate {
  TermSense sense;
  double weight = 0.0;
  bool indirect = false;
  std::string via;  // synonym it was reached through, for indirect ones
};

// Direct antonyms by weight; when there are none, antonyms of the top three
// synonyms, tagged indirect.
std::vector<AntonymCandidate> antonyms(const GraphBackend& graph, std::string_view query,
                                       std::optional<Pos> pos_filter);

}  // namespace csc
