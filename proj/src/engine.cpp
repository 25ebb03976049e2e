#include "csc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <unordered_map>

#include "csc/error.hpp"

namespace csc {

using nlohmann::json;

namespace {

void require_state(const Session& s, std::initializer_list<SessionState> allowed, std::string_view op) {
  if (std::find(allowed.begin(), allowed.end(), s.state) != allowed.end()) return;
  throw Error(ErrorCode::invalid_state,
              std::string(op) + " is not allowed in state " + std::string(to_string(s.state)),
              std::string(to_string(s.state)));
}

std::string clean_word(std::string_view word, std::string_view what) {
  auto w = ascii_lower(trim(word));
  if (w.empty()) throw Error(ErrorCode::bad_request, std::string(what) + " is empty");
  return w;
}

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Keeps the best-scoring entry per lemma (first seen on ties), then sorts.
std::vector<WordCandidate> merge_candidates(std::vector<WordCandidate> base, const std::vector<WordCandidate>& more) {
  std::unordered_map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < base.size(); ++i) at.emplace(base[i].lemma, i);
  for (const auto& c : more) {
    auto [it, inserted] = at.emplace(c.lemma, base.size());
    if (inserted) {
      base.push_back(c);
    } else if (c.usefulness > base[it->second].usefulness) {
      base[it->second] = c;
    }
  }
  std::sort(base.begin(), base.end(), word_candidate_before);
  return base;
}

}  // namespace

bool word_candidate_before(const WordCandidate& a, const WordCandidate& b) {
  if (a.usefulness != b.usefulness) return a.usefulness > b.usefulness;
  return a.lemma < b.lemma;
}

bool phrase_candidate_before(const PhraseCandidate& a, const PhraseCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.w2 < b.w2;
}

std::string generate_explanation(const CharacterSpace& cs) {
  const std::string dcp = cs.w1 + " " + cs.w2_noun;
  return "My design concept is " + dcp + ". It has a sense of " + cs.w2_noun + " yet is " + cs.w1 + ", not " + cs.w3 +
         ". It is " + cs.w1 + " but not " + cs.w4 + ". In this design, " + cs.w1 + " and " + cs.w2_noun +
         " can go together.";
}

Engine::Engine(std::shared_ptr<const Assets> assets, EngineConfig config, IdGenerator ids)
    : assets_(std::move(assets)), config_(std::move(config)), ids_(std::move(ids)) {
  if (!assets_ || !assets_->index || !assets_->graph || !assets_->model) {
    throw Error(ErrorCode::precondition, "engine needs an embedding index, a graph and a word-score model");
  }
  if (assets_->model->dim != assets_->index->dim()) {
    throw Error(ErrorCode::data_error, "model dimension " + std::to_string(assets_->model->dim) +
                                           " does not match embedding dimension " +
                                           std::to_string(assets_->index->dim()));
  }
  if (config_.max_pool == 0 || config_.limit_per_query_word == 0 || config_.limit_per_w1 == 0 ||
      config_.phrase_search_limit == 0 || config_.relations.empty()) {
    throw Error(ErrorCode::precondition, "invalid engine configuration");
  }
  if (!ids_) ids_ = random_session_id;
}

void Engine::commit(Session& s, std::string type, json payload) const {
  Event e;
  e.ts_us = now_us();
  if (!s.events.empty() && e.ts_us <= s.events.back().ts_us) e.ts_us = s.events.back().ts_us + 1;
  e.type = std::move(type);
  e.payload = std::move(payload);
  apply_event(s, e);
}

std::vector<WordCandidate> Engine::related_candidates(const std::string& word, std::size_t limit, bool& found) const {
  const auto& a = *assets_;
  auto related = related_terms(*a.graph, word, Pos::adjective, config_.relations, limit);
  found = related.found;
  std::vector<WordCandidate> out;
  for (const auto& t : related.terms) {
    if (!a.index->contains(t.sense.lemma)) continue;
    out.push_back({t.sense.lemma, word_score(t.sense.lemma, *a.model, *a.index), word, t.relation.name});
  }
  return out;
}

std::optional<PhraseCandidate> Engine::make_phrase(const std::string& w1, const std::string& w2) const {
  const auto& a = *assets_;
  if (w1 == w2 || shares_stem(w1, w2)) return std::nullopt;
  if (!a.index->contains(w1) || !a.index->contains(w2)) return std::nullopt;
  const double usefulness = word_score(w2, *a.model, *a.index);
  if (!(usefulness >= config_.gate)) return std::nullopt;
  PhraseCandidate p;
  p.w1 = w1;
  p.w2 = w2;
  p.w2_noun = nominalize(w2, a.nominalizations, a.graph.get());
  p.similarity = similarity(w1, w2, *a.index);
  p.score = a.brackets.score(p.similarity);
  p.w2_usefulness = usefulness;
  p.display = w1 + " " + p.w2_noun;
  return p;
}

Session Engine::start_session(const DesignBrief& brief) const {
  const auto& a = *assets_;
  auto words = extract_query_adjectives(brief, *a.graph, a.stopwords, a.extra_lexicon ? &*a.extra_lexicon : nullptr);
  Session s;
  commit(s, "session_started",
         json{{"id", ids_()},
              {"brief", {{"text", brief.text}, {"id", brief.id ? json(*brief.id) : json(nullptr)}}},
              {"query_words", words.words},
              {"no_query_words", words.no_query_words}});
  return s;
}

const std::vector<WordCandidate>& Engine::offer_w1(Session& s, std::optional<std::size_t> limit) const {
  require_state(s, {SessionState::BriefSubmitted, SessionState::W1Offered}, "offer_w1");
  const std::size_t per_word = limit.value_or(config_.limit_per_query_word);
  if (per_word == 0) throw Error(ErrorCode::bad_request, "limit_per_query_word must be positive");
  std::vector<WordCandidate> offers;
  bool any_found = false;
  auto sources = s.query_words;
  sources.insert(sources.end(), s.manual_words.begin(), s.manual_words.end());
  for (const auto& q : sources) {
    bool found = false;
    offers = merge_candidates(std::move(offers), related_candidates(q, per_word, found));
    any_found = any_found || found;
  }
  commit(s, "w1_offered", json{{"offers", offers}, {"not_found", !any_found}});
  return s.w1_offers;
}

ManualQueryResult Engine::manual_query(Session& s, std::string_view raw) const {
  require_state(s, {SessionState::W1Offered, SessionState::PhrasesOffered}, "manual_query");
  const auto word = clean_word(raw, "manual query");
  const auto& a = *assets_;
  ManualQueryResult result;
  result.non_adjective = !is_adjective(word, *a.graph, a.extra_lexicon ? &*a.extra_lexicon : nullptr);

  json payload{{"word", word}};
  if (s.state == SessionState::W1Offered) {
    bool found = false;
    auto related = related_candidates(word, config_.limit_per_query_word, found);
    auto merged = merge_candidates(s.w1_offers, related);
    result.not_found = !found;
    result.added = merged.size() - s.w1_offers.size();
    payload["mode"] = "w1";
    payload["offers"] = merged;
  } else {
    // In the phrase step the word is tried as a second word for every pooled
    // first word, under the same gate as graph candidates.
    auto groups = s.phrase_offers;
    result.not_found = !a.index->contains(word);
    for (auto& g : groups) {
      const bool present = std::any_of(g.phrases.begin(), g.phrases.end(),
                                       [&](const PhraseCandidate& p) { return p.w2 == word; });
      if (present) continue;
      if (auto p = make_phrase(g.w1, word)) {
        g.phrases.push_back(std::move(*p));
        std::sort(g.phrases.begin(), g.phrases.end(), phrase_candidate_before);
        ++result.added;
      }
    }
    payload["mode"] = "phrase";
    payload["phrase_offers"] = groups;
  }
  payload["not_found"] = result.not_found;
  payload["non_adjective"] = result.non_adjective;
  commit(s, "manual_query", std::move(payload));
  return result;
}

void Engine::select_w1_pool(Session& s, const std::vector<std::string>& lemmas) const {
  require_state(s, {SessionState::W1Offered}, "select_w1_pool");
  if (lemmas.empty() || lemmas.size() > config_.max_pool) {
    throw Error(ErrorCode::bad_request,
                "pool needs between 1 and " + std::to_string(config_.max_pool) + " lemmas, got " +
                    std::to_string(lemmas.size()));
  }
  std::vector<std::string> pool;
  std::set<std::string> seen;
  for (const auto& raw : lemmas) {
    auto w = clean_word(raw, "pool lemma");
    if (!seen.insert(w).second) throw Error(ErrorCode::bad_request, "duplicate pool lemma " + w, w);
    const bool offered = std::any_of(s.w1_offers.begin(), s.w1_offers.end(),
                                     [&](const WordCandidate& c) { return c.lemma == w; }) ||
                         std::find(s.manual_words.begin(), s.manual_words.end(), w) != s.manual_words.end();
    if (!offered) throw Error(ErrorCode::bad_request, "lemma '" + w + "' was not offered", w);
    pool.push_back(std::move(w));
  }
  commit(s, "w1_pool_selected", json{{"lemmas", pool}});
}

const std::vector<PhraseGroup>& Engine::offer_phrases(Session& s, std::optional<std::size_t> limit) const {
  require_state(s, {SessionState::W1PoolSelected}, "offer_phrases");
  const std::size_t per_w1 = limit.value_or(config_.limit_per_w1);
  if (per_w1 == 0) throw Error(ErrorCode::bad_request, "limit_per_w1 must be positive");
  const auto& a = *assets_;
  std::vector<PhraseGroup> groups;
  for (const auto& w1 : s.w1_pool) {
    PhraseGroup g{w1, {}};
    auto related = related_terms(*a.graph, w1, Pos::adjective, config_.relations, config_.phrase_search_limit);
    for (const auto& t : related.terms) {
      if (auto p = make_phrase(w1, t.sense.lemma)) g.phrases.push_back(std::move(*p));
    }
    std::sort(g.phrases.begin(), g.phrases.end(), phrase_candidate_before);
    if (g.phrases.size() > per_w1) g.phrases.resize(per_w1);
    groups.push_back(std::move(g));
  }
  commit(s, "phrases_offered", json{{"groups", groups}});
  return s.phrase_offers;
}

void Engine::select_phrase(Session& s, std::string_view raw_w1, std::string_view raw_w2) const {
  require_state(s, {SessionState::PhrasesOffered, SessionState::PhraseSelected}, "select_phrase");
  const auto w1 = clean_word(raw_w1, "w1");
  const auto w2 = clean_word(raw_w2, "w2");
  const bool offered = std::any_of(s.phrase_offers.begin(), s.phrase_offers.end(), [&](const PhraseGroup& g) {
    return std::any_of(g.phrases.begin(), g.phrases.end(),
                       [&](const PhraseCandidate& p) { return p.w1 == w1 && p.w2 == w2; });
  });
  if (!offered) throw Error(ErrorCode::bad_request, "phrase (" + w1 + ", " + w2 + ") was not offered", w1 + " " + w2);
  commit(s, "phrase_selected", json{{"w1", w1}, {"w2", w2}});
}

void Engine::offer_antonyms(Session& s) const {
  require_state(s, {SessionState::PhraseSelected}, "offer_antonyms");
  const auto& g = *assets_->graph;
  auto convert = [](const std::vector<AntonymCandidate>& in) {
    std::vector<AntonymOffer> out;
    for (const auto& c : in) out.push_back({c.sense.lemma, c.weight, c.indirect, c.via});
    return out;
  };
  auto w3 = convert(antonyms(g, s.chosen_phrase->w1, Pos::adjective));
  auto w4 = convert(antonyms(g, s.chosen_phrase->w2, Pos::adjective));
  commit(s, "antonyms_offered",
         json{{"w3_offers", w3}, {"w4_offers", w4}, {"w3_manual_required", w3.empty()},
              {"w4_manual_required", w4.empty()}});
}

const CharacterSpace& Engine::complete(Session& s, std::string_view raw_w3, std::string_view raw_w4, bool manual_w3,
                                       bool manual_w4) const {
  require_state(s, {SessionState::AntonymsOffered}, "complete");
  const auto w3 = clean_word(raw_w3, "w3");
  const auto w4 = clean_word(raw_w4, "w4");
  auto offered = [](const std::vector<AntonymOffer>& offers, const std::string& w) {
    return std::any_of(offers.begin(), offers.end(), [&](const AntonymOffer& o) { return o.lemma == w; });
  };
  if (!manual_w3 && !offered(s.w3_offers, w3)) {
    throw Error(ErrorCode::bad_request, "w3 '" + w3 + "' was not offered; set manual_w3 to enter it manually", w3);
  }
  if (!manual_w4 && !offered(s.w4_offers, w4)) {
    throw Error(ErrorCode::bad_request, "w4 '" + w4 + "' was not offered; set manual_w4 to enter it manually", w4);
  }
  const auto& phrase = *s.chosen_phrase;
  const std::array<std::string, 4> poles{phrase.w1, phrase.w2, w3, w4};
  for (std::size_t i = 0; i < poles.size(); ++i) {
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (poles[i] == poles[j]) {
        throw Error(ErrorCode::bad_request, "poles must be distinct: w" + std::to_string(i + 1) + " and w" +
                                                std::to_string(j + 1) + " are both '" + poles[i] + "'");
      }
    }
  }
  CharacterSpace cs;
  cs.w1 = phrase.w1;
  cs.w2 = phrase.w2;
  cs.w2_noun = phrase.w2_noun;
  cs.w3 = w3;
  cs.w4 = w4;
  cs.w4_noun = nominalize(w4, assets_->nominalizations, assets_->graph.get());
  cs.manual_w3 = manual_w3;
  cs.manual_w4 = manual_w4;
  cs.quadrant_labels = {phrase.display, w3 + " " + cs.w2_noun, w3 + " " + cs.w4_noun, cs.w1 + " " + cs.w4_noun};
  commit(s, "completed", json{{"character_space", cs}});
  return *s.character_space;
}

}  // namespace csc

namespace csc {

const CharacterSpace& run_top1(const Engine& engine, Session& s) {
  const auto& offers = engine.offer_w1(s);
  if (offers.empty()) throw Error(ErrorCode::data_error, "no first-word candidates for this brief");
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < offers.size() && i < engine.config().max_pool; ++i) pool.push_back(offers[i].lemma);
  engine.select_w1_pool(s, pool);

  const PhraseCandidate* best = nullptr;
  std::size_t best_group = 0;
  const auto& groups = engine.offer_phrases(s);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& p : groups[g].phrases) {
      const bool better = best == nullptr || p.score > best->score ||
                          (p.score == best->score &&
                           (p.similarity > best->similarity ||
                            (p.similarity == best->similarity && (g < best_group || (g == best_group && p.w2 < best->w2)))));
      if (better) {
        best = &p;
        best_group = g;
      }
    }
  }
  if (best == nullptr) throw Error(ErrorCode::data_error, "no phrase passed the gate for the selected pool");
  const auto w1 = best->w1;
  const auto w2 = best->w2;
  engine.select_phrase(s, w1, w2);

  engine.offer_antonyms(s);
  auto pick = [](const std::vector<AntonymOffer>& list, std::initializer_list<std::string_view> taken,
                 const char* slot) -> std::string {
    for (const auto& o : list) {
      if (std::find(taken.begin(), taken.end(), o.lemma) == taken.end()) return o.lemma;
    }
    throw Error(ErrorCode::data_error, std::string("no antonym candidate for ") + slot);
  };
  const auto w3 = pick(s.w3_offers, {w1, w2}, "w3");
  const auto w4 = pick(s.w4_offers, {w1, w2, w3}, "w4");
  return engine.complete(s, w3, w4);
}

}  // namespace csc
