#include <doctest.h>

#include <random>

#include "csc/gbdt.hpp"
#include "csc/scoring.hpp"
#include "support.hpp"

using namespace csc;
using namespace csc::testing;

namespace {

// Two unit vectors: "low" has x0 = 0.28, "high" has x0 = 0.8.
EmbeddingIndex two_term_index() {
  EmbeddingIndex::Matrix m(2, 2);
  m << 0.28f, 0.96f, 0.8f, 0.6f;
  return EmbeddingIndex({"low", "high"}, m, "hand", EmbeddingIndex::prenormalized);
}

// Root splits x0 <= 0.5; left leaf 1.0, right leaf 4.0.
BoostedModel three_node_model() {
  RegressionTree t;
  t.nodes = {TreeNode{0, 0.5, 1, 2, 0.0}, TreeNode{-1, 0.0, -1, -1, 1.0}, TreeNode{-1, 0.0, -1, -1, 4.0}};
  BoostedModel m;
  m.base_score = 0.5;
  m.learning_rate = 0.5;
  m.dim = 2;
  m.max_depth = 1;
  m.trees = {t};
  return m;
}

BoostedModel constant_model(double base, std::int32_t dim) {
  BoostedModel m;
  m.base_score = base;
  m.dim = dim;
  return m;
}

}  // namespace

TEST_CASE("constant model scores every term the same") {
  auto index = two_term_index();
  auto m = constant_model(3.0, 2);
  CHECK(word_score("low", m, index) == 3.0);
  CHECK(word_score("high", m, index) == 3.0);
}

TEST_CASE("hand-traced three-node tree") {
  auto index = two_term_index();
  auto m = three_node_model();
  CHECK(m.trees[0].depth() == 1);
  // low: 0.28 <= 0.5 -> leaf 1.0 -> 0.5 + 0.5 * 1.0
  CHECK(word_score("low", m, index) == 1.0);
  // high: 0.8 > 0.5 -> leaf 4.0 -> 0.5 + 0.5 * 4.0
  CHECK(word_score("high", m, index) == 2.5);
}

TEST_CASE("predictions are clipped to the model range") {
  auto index = two_term_index();
  auto m = three_node_model();
  m.base_score = 4.0;
  m.learning_rate = 1.0;
  CHECK(m.predict_raw(index.vector("high")) == 8.0);
  CHECK(word_score("high", m, index) == 5.0);
  m.base_score = -3.0;
  CHECK(word_score("low", m, index) == 0.0);
  m.clip = kNoClip;
  CHECK(m.predict(index.vector("low")) == -2.0);
}

TEST_CASE("word_score errors") {
  auto index = two_term_index();
  CHECK_THROWS_AS(word_score("missing", three_node_model(), index), MissingTermError);
  CHECK_THROWS_AS(word_score("low", constant_model(1.0, 3), index), Error);
}

TEST_CASE("single-bin bracket table") {
  BracketTable t({0.2, 0.5}, {1.0}, 0.3);
  CHECK(t.score(0.34) == 1.0);
  CHECK(t.score(0.2) == 1.0);
  CHECK(t.score(0.5) == 0.3);
  CHECK(t.score(0.1999) == 0.3);
  CHECK(t.score(-1.0) == 0.3);
}

TEST_CASE("bin edges belong to the bracket that starts there") {
  auto t = BracketTable::defaults();
  CHECK(t.score(0.0) == 1.0);
  CHECK(t.score(0.1) == 2.0);
  CHECK(t.score(0.3) == 5.0);
  CHECK(t.score(0.5) == 3.0);
  CHECK(t.score(std::nextafter(0.5, 0.0)) == 5.0);
  CHECK(t.score(0.9) == 0.5);
  CHECK(t.score(1.0) == t.default_score);
  CHECK(t.score(-0.2) == t.default_score);
}

TEST_CASE("bracket table validation and serialization") {
  CHECK_THROWS_AS(BracketTable({0.0, 0.5}, {1.0, 2.0}, 0.0), Error);
  CHECK_THROWS_AS(BracketTable({0.5, 0.5}, {1.0}, 0.0), Error);
  CHECK_THROWS_AS(BracketTable::from_json_text("{\"edges\": [0, 1]}"), Error);
  auto t = BracketTable::defaults();
  auto back = BracketTable::from_json_text(t.to_json_text());
  CHECK(back.edges == t.edges);
  CHECK(back.scores == t.scores);
  CHECK(back.default_score == t.default_score);
  auto file = BracketTable::from_file(data_dir() / "brackets.json");
  CHECK(file.edges == t.edges);
  CHECK(file.scores == t.scores);
}

TEST_CASE("phrase score for kinetic and warm is the bracket of the oracle similarity") {
  const auto& a = *fixture_assets();
  const double sim = oracle()["similarity"]["kinetic|warm"].get<double>();
  CHECK(phrase_score("kinetic", "warm", BracketTable::defaults(), *a.index) == BracketTable::defaults().score(sim));
  CHECK(phrase_score("kinetic", "warm", BracketTable::defaults(), *a.index) == 5.0);
}

TEST_CASE("constant labels give a constant model") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 5);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 3.0);
  auto r = train_boosted(x, y, BoostingConfig{});
  CHECK(r.model.trees.empty());
  CHECK(r.model.base_score == 3.0);
  REQUIRE_FALSE(r.report.train_rmse.empty());
  CHECK(r.report.train_rmse.back() == 0.0);
}

TEST_CASE("boosting fits a simple step and training error never rises") {
  Eigen::MatrixXd x(68, 2);
  Eigen::VectorXd y(68);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  // With 68 rows the 16 quantile cuts land on every fourth sorted value of
  // x0, so the step after row 32 is one of the split candidates.
  for (int i = 0; i < 68; ++i) {
    x(i, 0) = i / 68.0;
    x(i, 1) = u(rng);
    y(i) = i <= 32 ? 1.0 : 4.0;
  }
  BoostingConfig cfg;
  cfg.max_depth = 2;
  cfg.learning_rate = 0.3;
  cfg.clip = kNoClip;
  std::vector<double> rmse;
  auto m = fit_boosted(x, y, cfg, 30, &rmse);
  CHECK(m.trees.size() == 30);
  REQUIRE(rmse.size() == 31);
  for (std::size_t i = 1; i < rmse.size(); ++i) CHECK(rmse[i] <= rmse[i - 1]);
  CHECK(rmse.back() < 0.1 * rmse.front());
  for (const auto& t : m.trees) CHECK(t.depth() <= 2);
}

TEST_CASE("same seed and data give structurally identical models") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(80, 4);
  Eigen::VectorXd y = x.col(0) + 0.5 * x.col(2);
  BoostingConfig cfg;
  cfg.max_rounds = 40;
  cfg.folds = 4;
  auto a = train_boosted(x, y, cfg);
  auto b = train_boosted(x, y, cfg);
  CHECK(a.model == b.model);
  CHECK(a.report.mean_rmse == b.report.mean_rmse);
  CHECK(shuffled_indices(50, 11) == shuffled_indices(50, 11));
  CHECK(shuffled_indices(50, 11) != shuffled_indices(50, 12));
}

TEST_CASE("cross validation picks the earliest minimum and refits with that many trees") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(100, 3);
  Eigen::VectorXd y = x.col(0) - x.col(1);
  BoostingConfig cfg;
  cfg.max_rounds = 60;
  cfg.folds = 5;
  auto r = train_boosted(x, y, cfg);
  const auto& mean = r.report.mean_rmse;
  REQUIRE_FALSE(mean.empty());
  const auto best = static_cast<std::size_t>(std::min_element(mean.begin(), mean.end()) - mean.begin());
  CHECK(r.report.best_rounds == best);
  CHECK(r.model.trees.size() == best);
  CHECK(r.report.fold_rmse.size() == mean.size());
  CHECK(r.report.fold_rmse[0].size() == 5);
}

TEST_CASE("model files round-trip and reject damage") {
  TempDir dir;
  auto index = two_term_index();
  auto m = three_node_model();
  save_model(m, dir / "m.bin");
  auto back = load_model(dir / "m.bin");
  CHECK(back == m);
  CHECK(word_score("low", back, index) == 1.0);
  CHECK(word_score("high", back, index) == 2.5);

  auto bytes = read_file(dir / "m.bin");
  write_file(dir / "cut.bin", bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(load_model(dir / "cut.bin"), Error);
  write_file(dir / "magic.bin", "NOTAMODEL" + bytes);
  CHECK_THROWS_AS(load_model(dir / "magic.bin"), Error);
  auto bumped = bytes;
  bumped[kModelMagic.size()] = static_cast<char>(kModelVersion + 1);
  write_file(dir / "version.bin", bumped);
  try {
    load_model(dir / "version.bin");
    FAIL("expected a version error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::format_error);
  }
}

TEST_CASE("lexicon loading") {
  TempDir dir;
  write_file(dir / "l.tsv", "# labels\nwarm\t4\ncold\t0\n\n");
  auto lex = load_lexicon(dir / "l.tsv");
  CHECK(lex.records.size() == 2);
  CHECK(lex.records[0] == std::pair<std::string, int>{"warm", 4});
  write_file(dir / "range.tsv", "warm\t6\n");
  CHECK_THROWS_AS(load_lexicon(dir / "range.tsv"), Error);
  write_file(dir / "dup.tsv", "warm\t1\nwarm\t2\n");
  CHECK_THROWS_AS(load_lexicon(dir / "dup.tsv"), Error);
}

TEST_CASE("word scorer training on the fixture lexicon") {
  const auto& a = *fixture_assets();
  auto lex = load_lexicon(fixture_dir() / "lexicon.tsv");
  lex.records.emplace_back("notembedded", 2);
  BoostingConfig cfg;
  cfg.max_rounds = 20;
  auto t = train_word_scorer(lex, *a.index, cfg);
  CHECK(t.dropped == std::vector<std::string>{"notembedded"});
  CHECK(t.used == lex.records.size() - 1);
  CHECK(t.result.model.dim == a.index->dim());

  LabeledLexicon tiny;
  tiny.records = {{"warm", 4}, {"cold", 1}};
  CHECK_THROWS_AS(train_word_scorer(tiny, *a.index, cfg), Error);
}

TEST_CASE("bundled fixture model loads and matches the embedding dimension") {
  const auto& a = *fixture_assets();
  CHECK(a.model->dim == a.index->dim());
  const double w = word_score("warm", *a.model, *a.index);
  CHECK(w >= 0.0);
  CHECK(w <= 5.0);
}
