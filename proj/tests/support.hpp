// Shared helpers for the unit and acceptance tests.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csc/config.hpp"
#include "csc/engine.hpp"

namespace csc::testing {

inline std::filesystem::path data_dir() { return CSC_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return data_dir() / "fixture"; }
inline std::filesystem::path fixture_config() { return fixture_dir() / "config.json"; }
inline std::filesystem::path oracle_path() { return CSC_TEST_FIXTURES "/oracle.json"; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline const nlohmann::json& oracle() {
  static const nlohmann::json j = nlohmann::json::parse(read_file(oracle_path()));
  return j;
}

inline std::string brief_text(char which) {
  return read_file(data_dir() / "briefs" / (std::string("brief_") + which + ".txt"));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("csc-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Fixture assets loaded once per process.
inline std::shared_ptr<const Assets> fixture_assets() {
  static const auto assets = [] {
    auto config = ServiceConfig::from_file(fixture_config());
    return load_assets(config.assets);
  }();
  return assets;
}

// Copy of `base` with its word-score model replaced.
inline std::shared_ptr<const Assets> with_model(const std::shared_ptr<const Assets>& base, BoostedModel model) {
  auto copy = std::make_shared<Assets>(*base);
  copy->model = std::make_shared<const WordScorerModel>(std::move(model));
  return copy;
}

// Builds a model whose prediction for every term of `index` is exactly
// `scores[term]` (or `fallback` when absent). A single tree separates all
// rows by splitting on the widest-spread feature at the median gap; the
// leaf value passes through base 0 and learning rate 1 unchanged.
inline BoostedModel lookup_model(const EmbeddingIndex& index, const std::map<std::string, double>& scores,
                                 double fallback = 0.0) {
  const auto& X = index.vectors();
  RegressionTree tree;
  std::vector<Eigen::Index> all(index.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);

  auto value_of = [&](Eigen::Index r) {
    auto it = scores.find(index.terms()[static_cast<std::size_t>(r)]);
    return it == scores.end() ? fallback : it->second;
  };

  std::function<std::int32_t(std::vector<Eigen::Index>)> grow = [&](std::vector<Eigen::Index> rows) {
    const auto at = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (rows.size() == 1) {
      tree.nodes[static_cast<std::size_t>(at)].value = value_of(rows[0]);
      return at;
    }
    Eigen::Index best = 0;
    double spread = -1.0;
    for (Eigen::Index f = 0; f < X.cols(); ++f) {
      float lo = X(rows[0], f), hi = lo;
      for (auto r : rows) lo = std::min(lo, X(r, f)), hi = std::max(hi, X(r, f));
      if (hi - lo > spread) spread = hi - lo, best = f;
    }
    std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return X(a, best) < X(b, best); });
    std::size_t mid = rows.size() / 2;
    while (mid < rows.size() && X(rows[mid - 1], best) == X(rows[mid], best)) ++mid;
    if (mid == rows.size()) throw std::runtime_error("lookup_model: rows are not separable");
    const double threshold = (static_cast<double>(X(rows[mid - 1], best)) + X(rows[mid], best)) / 2.0;
    std::vector<Eigen::Index> left(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(mid));
    std::vector<Eigen::Index> right(rows.begin() + static_cast<std::ptrdiff_t>(mid), rows.end());
    const auto l = grow(std::move(left));
    const auto r = grow(std::move(right));
    auto& node = tree.nodes[static_cast<std::size_t>(at)];
    node.feature = static_cast<std::int32_t>(best);
    node.threshold = threshold;
    node.left = l;
    node.right = r;
    return at;
  };
  grow(all);

  BoostedModel m;
  m.base_score = 0.0;
  m.learning_rate = 1.0;
  m.dim = static_cast<std::int32_t>(index.dim());
  m.max_depth = tree.depth();
  m.trees.push_back(std::move(tree));
  return m;
}

inline ConceptGraph graph_of(const std::vector<Assertion>& assertions) {
  ConceptGraph g;
  for (const auto& a : assertions) g.add(a);
  g.finalize();
  return g;
}

inline Assertion edge(RelationKind kind, std::string a, std::optional<Pos> pa, std::string b, std::optional<Pos> pb,
                      double w) {
  return Assertion{Relation::of(kind), TermSense{std::move(a), pa, "en"}, TermSense{std::move(b), pb, "en"}, w};
}

// Seven-term world around "warm" with fixed usefulness scores: warmy 4
// (shares warm's stem), plain 3, cozy 1.7, balmy 1.6; "ghost" is in the
// graph but has no embedding and cozy has no antonyms.
inline std::shared_ptr<const Assets> mini_assets() {
  const std::vector<std::string> terms{"warm", "warmy", "cozy", "balmy", "plain", "cold", "kettle"};
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n;
  EmbeddingIndex::Matrix m(static_cast<Eigen::Index>(terms.size()), 8);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = n(rng);
  auto assets = std::make_shared<Assets>();
  assets->index = std::make_shared<const EmbeddingIndex>(terms, m, "mini");
  assets->graph = std::make_shared<const ConceptGraph>(graph_of({
      edge(RelationKind::RelatedTo, "warm", Pos::adjective, "warmy", Pos::adjective, 3.0),
      edge(RelationKind::RelatedTo, "warm", Pos::adjective, "cozy", Pos::adjective, 2.0),
      edge(RelationKind::RelatedTo, "warm", Pos::adjective, "balmy", Pos::adjective, 1.5),
      edge(RelationKind::RelatedTo, "warm", Pos::adjective, "ghost", Pos::adjective, 1.2),
      edge(RelationKind::RelatedTo, "warm", Pos::adjective, "plain", Pos::adjective, 1.0),
      edge(RelationKind::Antonym, "warm", Pos::adjective, "cold", Pos::adjective, 2.0),
      edge(RelationKind::RelatedTo, "kettle", Pos::noun, "warm", Pos::adjective, 1.0),
  }));
  assets->model = std::make_shared<const WordScorerModel>(lookup_model(
      *assets->index, {{"warm", 3.0}, {"warmy", 4.0}, {"cozy", 1.7}, {"balmy", 1.6}, {"plain", 3.0}, {"cold", 2.0}}));
  return assets;
}

// Deterministic session ids for byte-compare tests.
inline Engine::IdGenerator counter_ids(std::string prefix = "session-") {
  auto n = std::make_shared<int>(0);
  return [n, prefix] { return prefix + std::to_string(++*n); };
}

template <typename T>
std::vector<std::string> lemmas_of(const std::vector<T>& v) {
  std::vector<std::string> out;
  for (const auto& c : v) out.push_back(c.lemma);
  return out;
}

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace csc::testing
