#include "csc/scoring.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "csc/error.hpp"
#include "csc/io.hpp"

namespace csc {

LabeledLexicon load_lexicon(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::io_error, "missing lexicon " + path.string(), path.string());
  LineReader reader(path);
  LabeledLexicon lex;
  lex.provenance = path.string();
  std::set<std::string> seen;
  std::string line;
  std::size_t n = 0;
  while (reader.next(line)) {
    ++n;
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(n);
    auto fields = split_ws(body);
    int count = -1;
    if (fields.size() != 2 ||
        std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), count).ec != std::errc{} ||
        count < 0 || count > 5) {
      throw Error(ErrorCode::data_error, where + ": expected '<adjective>\\t<count 0-5>'", where);
    }
    auto adj = ascii_lower(fields[0]);
    if (!seen.insert(adj).second) throw Error(ErrorCode::data_error, where + ": duplicate adjective " + adj, where);
    lex.records.emplace_back(std::move(adj), count);
  }
  return lex;
}

WordScorerTraining train_word_scorer(const LabeledLexicon& lexicon, const EmbeddingIndex& index,
                                     const BoostingConfig& config) {
  WordScorerTraining out;
  std::vector<std::pair<Eigen::Index, int>> usable;
  for (const auto& [adj, count] : lexicon.records) {
    if (auto row = index.find(adj)) {
      usable.emplace_back(*row, count);
    } else {
      out.dropped.push_back(adj);
    }
  }
  for (const auto& d : out.dropped) std::cerr << "warning: no embedding for lexicon adjective '" << d << "', dropped\n";
  if (usable.size() < kMinTrainingRecords) {
    throw Error(ErrorCode::data_error, "too few usable lexicon records: " + std::to_string(usable.size()) + " < " +
                                           std::to_string(kMinTrainingRecords));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(usable.size()), index.dim());
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto& [row, count] = usable[static_cast<std::size_t>(i)];
    x.row(i) = index.vectors().row(row).cast<double>();
    y(i) = count;
  }
  out.used = usable.size();
  out.result = train_boosted(x, y, config);
  return out;
}

double word_score(std::string_view adjective, const WordScorerModel& model, const EmbeddingIndex& index) {
  if (model.dim != index.dim()) {
    throw Error(ErrorCode::precondition, "model dimension " + std::to_string(model.dim) +
                                             " does not match embedding dimension " + std::to_string(index.dim()));
  }
  return model.predict(index.vector(adjective).cast<double>());
}

BracketTable::BracketTable(std::vector<double> e, std::vector<double> s, double d)
    : edges(std::move(e)), scores(std::move(s)), default_score(d) {
  if (edges.size() < 2 || scores.size() + 1 != edges.size()) {
    throw Error(ErrorCode::data_error, "bracket table needs n+1 edges for n scores");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i - 1] < edges[i])) throw Error(ErrorCode::data_error, "bracket edges must be strictly ascending");
  }
}

double BracketTable::score(double s) const {
  if (!(s >= edges.front()) || !(s < edges.back())) return default_score;
  const auto it = std::upper_bound(edges.begin(), edges.end(), s);
  return scores[static_cast<std::size_t>(it - edges.begin()) - 1];
}

BracketTable BracketTable::defaults() {
  return BracketTable({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
                      {1.0, 2.0, 3.0, 5.0, 5.0, 3.0, 2.0, 1.5, 1.0, 0.5}, 0.5);
}

BracketTable BracketTable::from_json_text(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text);
    return BracketTable(doc.at("edges").get<std::vector<double>>(), doc.at("scores").get<std::vector<double>>(),
                        doc.at("default").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::data_error, std::string("bracket table: ") + e.what());
  }
}

BracketTable BracketTable::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "missing bracket table " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string BracketTable::to_json_text() const {
  return nlohmann::json{{"edges", edges}, {"scores", scores}, {"default", default_score}}.dump();
}

double phrase_score(std::string_view w1, std::string_view w2, const BracketTable& table, const EmbeddingIndex& index) {
  return table.score(similarity(w1, w2, index));
}

}  // namespace csc
