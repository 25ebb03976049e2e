// Session serialization, timestamps and the event reducer.
#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <random>

#include "csc/engine.hpp"
#include "csc/error.hpp"

namespace csc {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kStateNames = {
    "Created",        "BriefSubmitted", "W1Offered",       "W1PoolSelected",
    "PhrasesOffered", "PhraseSelected", "AntonymsOffered", "Completed",
};

struct Transition {
  std::string_view type;
  std::vector<SessionState> from;
};

const std::vector<Transition>& transitions() {
  using S = SessionState;
  static const std::vector<Transition> table = {
      {"session_started", {S::Created}},
      {"w1_offered", {S::BriefSubmitted, S::W1Offered}},
      {"manual_query", {S::W1Offered, S::PhrasesOffered}},
      {"w1_pool_selected", {S::W1Offered}},
      {"phrases_offered", {S::W1PoolSelected}},
      {"phrase_selected", {S::PhrasesOffered, S::PhraseSelected}},
      {"antonyms_offered", {S::PhraseSelected}},
      {"completed", {S::AntonymsOffered}},
  };
  return table;
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string_view to_string(SessionState state) { return kStateNames[static_cast<std::size_t>(state)]; }

SessionState parse_session_state(std::string_view text) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == text) return static_cast<SessionState>(i);
  }
  throw Error(ErrorCode::format_error, "unknown session state " + std::string(text));
}

std::string format_timestamp(std::int64_t ts_us) {
  const std::time_t secs = static_cast<std::time_t>(ts_us / 1000000);
  const auto micros = static_cast<long>(ts_us % 1000000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06ldZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, micros);
  return buf;
}

std::int64_t parse_timestamp(std::string_view text) {
  std::tm tm{};
  long micros = 0;
  const std::string s(text);
  if (s.size() != 27 ||
      std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%6ldZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &micros) != 7) {
    throw Error(ErrorCode::format_error, "bad timestamp " + s);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return static_cast<std::int64_t>(timegm(&tm)) * 1000000 + micros;
}

std::string random_session_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

void to_json(json& j, const WordCandidate& v) {
  j = json{{"lemma", v.lemma}, {"usefulness", v.usefulness}, {"source", v.source}, {"relation", v.relation}};
}
void from_json(const json& j, WordCandidate& v) {
  j.at("lemma").get_to(v.lemma);
  j.at("usefulness").get_to(v.usefulness);
  j.at("source").get_to(v.source);
  j.at("relation").get_to(v.relation);
}

void to_json(json& j, const PhraseCandidate& v) {
  j = json{{"w1", v.w1},
           {"w2", v.w2},
           {"w2_noun", v.w2_noun},
           {"similarity", v.similarity},
           {"score", v.score},
           {"w2_usefulness", v.w2_usefulness},
           {"display", v.display}};
}
void from_json(const json& j, PhraseCandidate& v) {
  j.at("w1").get_to(v.w1);
  j.at("w2").get_to(v.w2);
  j.at("w2_noun").get_to(v.w2_noun);
  j.at("similarity").get_to(v.similarity);
  j.at("score").get_to(v.score);
  j.at("w2_usefulness").get_to(v.w2_usefulness);
  j.at("display").get_to(v.display);
}

void to_json(json& j, const PhraseGroup& v) { j = json{{"w1", v.w1}, {"phrases", v.phrases}}; }
void from_json(const json& j, PhraseGroup& v) {
  j.at("w1").get_to(v.w1);
  j.at("phrases").get_to(v.phrases);
}

void to_json(json& j, const AntonymOffer& v) {
  j = json{{"lemma", v.lemma}, {"weight", v.weight}, {"indirect", v.indirect}, {"via", v.via}};
}
void from_json(const json& j, AntonymOffer& v) {
  j.at("lemma").get_to(v.lemma);
  j.at("weight").get_to(v.weight);
  j.at("indirect").get_to(v.indirect);
  j.at("via").get_to(v.via);
}

void to_json(json& j, const CharacterSpace& v) {
  j = json{{"w1", v.w1},
           {"w2", v.w2},
           {"w2_noun", v.w2_noun},
           {"w3", v.w3},
           {"w4", v.w4},
           {"w4_noun", v.w4_noun},
           {"manual_w3", v.manual_w3},
           {"manual_w4", v.manual_w4},
           {"quadrant_labels", v.quadrant_labels}};
}
void from_json(const json& j, CharacterSpace& v) {
  j.at("w1").get_to(v.w1);
  j.at("w2").get_to(v.w2);
  j.at("w2_noun").get_to(v.w2_noun);
  j.at("w3").get_to(v.w3);
  j.at("w4").get_to(v.w4);
  j.at("w4_noun").get_to(v.w4_noun);
  j.at("manual_w3").get_to(v.manual_w3);
  j.at("manual_w4").get_to(v.manual_w4);
  j.at("quadrant_labels").get_to(v.quadrant_labels);
}

void to_json(json& j, const Event& v) {
  j = json{{"ts", format_timestamp(v.ts_us)}, {"type", v.type}, {"payload", v.payload}};
}
void from_json(const json& j, Event& v) {
  v.ts_us = parse_timestamp(j.at("ts").get<std::string>());
  j.at("type").get_to(v.type);
  v.payload = j.at("payload");
}

void to_json(json& j, const Session& v) {
  j = json{{"id", v.id},
           {"state", to_string(v.state)},
           {"brief", {{"text", v.brief.text}, {"id", v.brief.id ? json(*v.brief.id) : json(nullptr)}}},
           {"query_words", v.query_words},
           {"no_query_words", v.no_query_words},
           {"w1_offers", v.w1_offers},
           {"w1_not_found", v.w1_not_found},
           {"manual_words", v.manual_words},
           {"w1_pool", v.w1_pool},
           {"phrase_offers", v.phrase_offers},
           {"chosen_phrase", v.chosen_phrase ? json(*v.chosen_phrase) : json(nullptr)},
           {"w3_offers", v.w3_offers},
           {"w4_offers", v.w4_offers},
           {"w3_manual_required", v.w3_manual_required},
           {"w4_manual_required", v.w4_manual_required},
           {"character_space", v.character_space ? json(*v.character_space) : json(nullptr)},
           {"events", v.events}};
}

void from_json(const json& j, Session& v) {
  Session s;
  j.at("id").get_to(s.id);
  s.state = parse_session_state(j.at("state").get<std::string>());
  j.at("brief").at("text").get_to(s.brief.text);
  s.brief.id = optional_from<std::string>(j.at("brief"), "id");
  j.at("query_words").get_to(s.query_words);
  j.at("no_query_words").get_to(s.no_query_words);
  j.at("w1_offers").get_to(s.w1_offers);
  j.at("w1_not_found").get_to(s.w1_not_found);
  j.at("manual_words").get_to(s.manual_words);
  j.at("w1_pool").get_to(s.w1_pool);
  j.at("phrase_offers").get_to(s.phrase_offers);
  s.chosen_phrase = optional_from<PhraseCandidate>(j, "chosen_phrase");
  j.at("w3_offers").get_to(s.w3_offers);
  j.at("w4_offers").get_to(s.w4_offers);
  j.at("w3_manual_required").get_to(s.w3_manual_required);
  j.at("w4_manual_required").get_to(s.w4_manual_required);
  s.character_space = optional_from<CharacterSpace>(j, "character_space");
  j.at("events").get_to(s.events);
  v = std::move(s);
}

void apply_event(Session& session, const Event& event) {
  const auto& table = transitions();
  auto rule = std::find_if(table.begin(), table.end(), [&](const Transition& t) { return t.type == event.type; });
  if (rule == table.end()) throw Error(ErrorCode::format_error, "unknown event type " + event.type);
  if (std::find(rule->from.begin(), rule->from.end(), session.state) == rule->from.end()) {
    throw Error(ErrorCode::invalid_state,
                "event " + event.type + " not allowed in state " + std::string(to_string(session.state)));
  }
  if (!session.events.empty() && event.ts_us <= session.events.back().ts_us) {
    throw Error(ErrorCode::invalid_state, "event timestamps must strictly increase");
  }

  // Decode everything first so a bad payload leaves the session untouched.
  Session next = session;
  const auto& p = event.payload;
  try {
    if (event.type == "session_started") {
      p.at("id").get_to(next.id);
      p.at("brief").at("text").get_to(next.brief.text);
      next.brief.id = optional_from<std::string>(p.at("brief"), "id");
      p.at("query_words").get_to(next.query_words);
      p.at("no_query_words").get_to(next.no_query_words);
      next.state = SessionState::BriefSubmitted;
    } else if (event.type == "w1_offered") {
      p.at("offers").get_to(next.w1_offers);
      p.at("not_found").get_to(next.w1_not_found);
      next.state = SessionState::W1Offered;
    } else if (event.type == "manual_query") {
      const auto word = p.at("word").get<std::string>();
      if (p.at("mode").get<std::string>() == "w1") {
        p.at("offers").get_to(next.w1_offers);
        if (std::find(next.manual_words.begin(), next.manual_words.end(), word) == next.manual_words.end()) {
          next.manual_words.push_back(word);
        }
      } else {
        p.at("phrase_offers").get_to(next.phrase_offers);
      }
    } else if (event.type == "w1_pool_selected") {
      p.at("lemmas").get_to(next.w1_pool);
      next.state = SessionState::W1PoolSelected;
    } else if (event.type == "phrases_offered") {
      p.at("groups").get_to(next.phrase_offers);
      next.chosen_phrase.reset();
      next.state = SessionState::PhrasesOffered;
    } else if (event.type == "phrase_selected") {
      const auto w1 = p.at("w1").get<std::string>();
      const auto w2 = p.at("w2").get<std::string>();
      std::optional<PhraseCandidate> found;
      for (const auto& g : next.phrase_offers) {
        for (const auto& ph : g.phrases) {
          if (ph.w1 == w1 && ph.w2 == w2) found = ph;
        }
      }
      if (!found) throw Error(ErrorCode::format_error, "phrase_selected names an unoffered pair");
      next.chosen_phrase = std::move(found);
      next.state = SessionState::PhraseSelected;
    } else if (event.type == "antonyms_offered") {
      p.at("w3_offers").get_to(next.w3_offers);
      p.at("w4_offers").get_to(next.w4_offers);
      p.at("w3_manual_required").get_to(next.w3_manual_required);
      p.at("w4_manual_required").get_to(next.w4_manual_required);
      next.state = SessionState::AntonymsOffered;
    } else if (event.type == "completed") {
      next.character_space = p.at("character_space").get<CharacterSpace>();
      next.state = SessionState::Completed;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, "bad " + event.type + " payload: " + e.what());
  }
  next.events.push_back(event);
  session = std::move(next);
}

Session replay(const std::vector<Event>& events) {
  Session s;
  for (const auto& e : events) apply_event(s, e);
  return s;
}

}  // namespace csc
