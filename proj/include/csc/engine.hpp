#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csc/brief.hpp"
#include "csc/concept_graph.hpp"
#include "csc/embedding_index.hpp"
#include "csc/morphology.hpp"
#include "csc/scoring.hpp"

namespace csc {

enum class SessionState {
  Created,
  BriefSubmitted,
  W1Offered,
  W1PoolSelected,
  PhrasesOffered,
  PhraseSelected,
  AntonymsOffered,
  Completed,
};

std::string_view to_string(SessionState state);
SessionState parse_session_state(std::string_view text);

struct WordCandidate {
  std::string lemma;
  double usefulness = 0.0;
  std::string source;    // query word (or manual word) it was reached from
  std::string relation;  // relation of the strongest edge
  friend bool operator==(const WordCandidate&, const WordCandidate&) = default;
};

struct PhraseCandidate {
  std::string w1;
  std::string w2;
  std::string w2_noun;
  double similarity = 0.0;
  double score = 0.0;
  double w2_usefulness = 0.0;
  std::string display;  // "w1 w2_noun"
  friend bool operator==(const PhraseCandidate&, const PhraseCandidate&) = default;
};

struct PhraseGroup {
  std::string w1;
  std::vector<PhraseCandidate> phrases;
  friend bool operator==(const PhraseGroup&, const PhraseGroup&) = default;
};

struct AntonymOffer {
  std::string lemma;
  double weight = 0.0;
  bool indirect = false;
  std::string via;
  friend bool operator==(const AntonymOffer&, const AntonymOffer&) = default;
};

// Poles run clockwise from the top: w1 (top), w2 (right), w3 (bottom),
// w4 (left). Quadrant labels pair the vertical pole adjective with the
// nominalized horizontal pole: [upper-right target, lower-right,
// lower-left, upper-left].
struct CharacterSpace {
  std::string w1;
  std::string w2;
  std::string w2_noun;
  std::string w3;
  std::string w4;
  std::string w4_noun;
  bool manual_w3 = false;
  bool manual_w4 = false;
  std::array<std::string, 4> quadrant_labels;
  friend bool operator==(const CharacterSpace&, const CharacterSpace&) = default;
};

struct Event {
  std::int64_t ts_us = 0;  // microseconds since the Unix epoch, UTC
  std::string type;
  nlohmann::json payload;
};

// RFC 3339 UTC with microseconds, e.g. "2026-10-16T09:30:00.000001Z".
std::string format_timestamp(std::int64_t ts_us);
std::int64_t parse_timestamp(std::string_view text);

struct Session {
  std::string id;
  SessionState state = SessionState::Created;
  DesignBrief brief;
  std::vector<std::string> query_words;
  bool no_query_words = false;
  std::vector<WordCandidate> w1_offers;
  bool w1_not_found = false;
  std::vector<std::string> manual_words;
  std::vector<std::string> w1_pool;
  std::vector<PhraseGroup> phrase_offers;
  std::optional<PhraseCandidate> chosen_phrase;
  std::vector<AntonymOffer> w3_offers;
  std::vector<AntonymOffer> w4_offers;
  bool w3_manual_required = false;
  bool w4_manual_required = false;
  std::optional<CharacterSpace> character_space;
  std::vector<Event> events;
};

// Applies one logged event to a session. Engine operations build an event
// and commit it through here, so replaying a session's log reproduces it.
void apply_event(Session& session, const Event& event);
Session replay(const std::vector<Event>& events);

// Read-only resources shared by every session.
struct Assets {
  std::shared_ptr<const EmbeddingIndex> index;
  std::shared_ptr<const GraphBackend> graph;
  std::shared_ptr<const WordScorerModel> model;
  BracketTable brackets = BracketTable::defaults();
  NominalizationTable nominalizations;
  TermSet stopwords;
  std::optional<TermSet> extra_lexicon;
  std::string version;  // free-form asset fingerprint reported by /healthz
};

struct EngineConfig {
  std::size_t limit_per_query_word = 30;
  std::size_t phrase_search_limit = 100;
  std::size_t limit_per_w1 = 20;
  std::size_t max_pool = 5;
  double gate = 1.7;
  std::vector<Relation> relations = default_candidate_relations();
};

struct ManualQueryResult {
  bool not_found = false;      // word unknown to the graph (or unembedded in phrase mode)
  bool non_adjective = false;  // word has no adjective sense; still queried
  std::size_t added = 0;       // new offers merged in
};

// Runs the exploration steps against shared assets. Every operation either
// commits exactly one event to the session or throws without touching it.
class Engine {
 public:
  using IdGenerator = std::function<std::string()>;

  explicit Engine(std::shared_ptr<const Assets> assets, EngineConfig config = {}, IdGenerator ids = {});

  Session start_session(const DesignBrief& brief) const;
  const std::vector<WordCandidate>& offer_w1(Session& s, std::optional<std::size_t> limit_per_query_word = {}) const;
  ManualQueryResult manual_query(Session& s, std::string_view word) const;
  void select_w1_pool(Session& s, const std::vector<std::string>& lemmas) const;
  const std::vector<PhraseGroup>& offer_phrases(Session& s, std::optional<std::size_t> limit_per_w1 = {}) const;
  void select_phrase(Session& s, std::string_view w1, std::string_view w2) const;
  void offer_antonyms(Session& s) const;
  const CharacterSpace& complete(Session& s, std::string_view w3, std::string_view w4, bool manual_w3 = false,
                                 bool manual_w4 = false) const;

  const Assets& assets() const noexcept { return *assets_; }
  const EngineConfig& config() const noexcept { return config_; }

 private:
  std::vector<WordCandidate> related_candidates(const std::string& word, std::size_t limit, bool& found) const;
  std::optional<PhraseCandidate> make_phrase(const std::string& w1, const std::string& w2) const;
  void commit(Session& s, std::string type, nlohmann::json payload) const;

  std::shared_ptr<const Assets> assets_;
  EngineConfig config_;
  IdGenerator ids_;
};

// Non-interactive run that always takes the top-ranked option: the first
// min(5, offered) first-word candidates form the pool, the best phrase over
// all groups wins by (score desc, similarity desc, pool order, w2), and the
// first antonym offers distinct from the other poles become w3 and w4.
// Throws Error(data_error) when a step has nothing to choose from.
const CharacterSpace& run_top1(const Engine& engine, Session& session);

// Byte-exact template text for a completed space.
std::string generate_explanation(const CharacterSpace& cs);

// Random 128-bit hex identifier.
std::string random_session_id();

// Total orders used for every offer list.
bool word_candidate_before(const WordCandidate& a, const WordCandidate& b);
bool phrase_candidate_before(const PhraseCandidate& a, const PhraseCandidate& b);

void to_json(nlohmann::json& j, const WordCandidate& v);
void from_json(const nlohmann::json& j, WordCandidate& v);
void to_json(nlohmann::json& j, const PhraseCandidate& v);
void from_json(const nlohmann::json& j, PhraseCandidate& v);
void to_json(nlohmann::json& j, const PhraseGroup& v);
void from_json(const nlohmann::json& j, PhraseGroup& v);
void to_json(nlohmann::json& j, const AntonymOffer& v);
void from_json(const nlohmann::json& j, AntonymOffer& v);
void to_json(nlohmann::json& j, const CharacterSpace& v);
void from_json(const nlohmann::json& j, CharacterSpace& v);
void to_json(nlohmann::json& j, const Event& v);
void from_json(const nlohmann::json& j, Event& v);
void to_json(nlohmann::json& j, const Session& v);
void from_json(const nlohmann::json& j, Session& v);

}  // namespace csc
