#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csc/embedding_index.hpp"
#include "csc/gbdt.hpp"

namespace csc {

// Adjectives with the number of raters (0-5) who judged them usable.
struct LabeledLexicon {
  std::vector<std::pair<std::string, int>> records;
  std::string provenance;
};

// TSV of (adjective, count); "#" comments and blank lines are skipped.
// Counts outside 0-5 and repeated adjectives are data errors.
LabeledLexicon load_lexicon(const std::filesystem::path& path);

using WordScorerModel = BoostedModel;

struct WordScorerTraining {
  TrainResult result;
  std::vector<std::string> dropped;  // lexicon entries with no embedding
  std::size_t used = 0;
};

inline constexpr std::size_t kMinTrainingRecords = 10;

// Features are the raw embedding dimensions of each adjective.
WordScorerTraining train_word_scorer(const LabeledLexicon& lexicon, const EmbeddingIndex& index,
                                     const BoostingConfig& config = {});

// Usefulness in the model's clip range. Throws MissingTermError for terms
// without an embedding.
double word_score(std::string_view adjective, const WordScorerModel& model, const EmbeddingIndex& index);

// Half-open similarity brackets [edges[i], edges[i+1]) with one score each;
// similarities outside every bracket get `default_score`.
struct BracketTable {
  std::vector<double> edges;
  std::vector<double> scores;
  double default_score = 0.0;

  BracketTable() = default;
  BracketTable(std::vector<double> edges, std::vector<double> scores, double default_score);

  double score(double similarity) const;

  static BracketTable defaults();
  // JSON object {"edges": [...], "scores": [...], "default": x}.
  static BracketTable from_file(const std::filesystem::path& path);
  static BracketTable from_json_text(std::string_view text);
  std::string to_json_text() const;
};

double phrase_score(std::string_view w1, std::string_view w2, const BracketTable& table, const EmbeddingIndex& index);

}  // namespace csc
