#include "csc/gbdt.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "csc/error.hpp"
#include "csc/io.hpp"

namespace csc {
namespace {

constexpr double kMinGain = 1e-12;

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const BoostingConfig& config) {
  if (x.rows() != y.size()) throw Error(ErrorCode::precondition, "feature rows do not match label count");
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorCode::precondition, "empty training set");
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::data_error, "non-finite training data");
  if (config.max_depth < 1 || config.learning_rate <= 0.0 || config.max_rounds < 0 || config.cut_points < 1 ||
      config.cut_points > 255) {
    throw Error(ErrorCode::precondition, "invalid boosting configuration");
  }
}

bool constant(const Eigen::VectorXd& y) { return (y.array() == y(0)).all(); }

// Boosting state over a subset of rows. Features are pre-binned against
// per-feature quantile cuts so split search is a histogram scan.
class Booster {
 public:
  Booster(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<Eigen::Index> rows,
          const BoostingConfig& config)
      : x_(x), y_(y), rows_(std::move(rows)), config_(config) {
    const auto n = static_cast<Eigen::Index>(rows_.size());
    base_ = 0.0;
    for (auto r : rows_) base_ += y_(r);
    base_ /= static_cast<double>(n);
    tree_sum_ = Eigen::VectorXd::Zero(n);
    bin_features();
  }

  double base() const { return base_; }

  RegressionTree grow() {
    residual_.resize(static_cast<Eigen::Index>(rows_.size()));
    for (Eigen::Index i = 0; i < residual_.size(); ++i) residual_(i) = y_(rows_[i]) - prediction(i);
    RegressionTree tree;
    std::vector<Eigen::Index> local(rows_.size());
    std::iota(local.begin(), local.end(), Eigen::Index{0});
    build(tree, local, 0);
    for (Eigen::Index i = 0; i < tree_sum_.size(); ++i) tree_sum_(i) += tree.predict(x_.row(rows_[i]));
    return tree;
  }

  double train_rmse() const {
    double sse = 0.0;
    for (Eigen::Index i = 0; i < tree_sum_.size(); ++i) sse += std::pow(y_(rows_[i]) - prediction(i), 2);
    return std::sqrt(sse / static_cast<double>(tree_sum_.size()));
  }

 private:
  double prediction(Eigen::Index i) const { return base_ + config_.learning_rate * tree_sum_(i); }

  void bin_features() {
    const auto d = x_.cols();
    const auto n = rows_.size();
    cuts_.assign(static_cast<std::size_t>(d), {});
    bins_.resize(static_cast<Eigen::Index>(n), d);
    std::vector<double> values(n);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) values[i] = x_(rows_[i], j);
      std::sort(values.begin(), values.end());
      auto& cuts = cuts_[static_cast<std::size_t>(j)];
      const auto c = static_cast<std::size_t>(config_.cut_points);
      for (std::size_t k = 1; k <= c; ++k) {
        const double v = values[std::min(n - 1, k * n / (c + 1))];
        if (v < values.back() && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double v = x_(rows_[i], j);
        bins_(static_cast<Eigen::Index>(i), j) =
            static_cast<std::uint8_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
      }
    }
  }

  std::int32_t build(RegressionTree& tree, const std::vector<Eigen::Index>& local, int depth) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    double total = 0.0;
    for (auto i : local) total += residual_(i);
    const double count = static_cast<double>(local.size());
    tree.nodes.back().value = total / count;
    if (depth >= config_.max_depth || local.size() < 2) return id;

    double best_gain = kMinGain;
    Eigen::Index best_feature = -1;
    std::size_t best_cut = 0;
    const double parent = total * total / count;
    std::vector<double> sum;
    std::vector<std::size_t> cnt;
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      const auto& cuts = cuts_[static_cast<std::size_t>(j)];
      if (cuts.empty()) continue;
      sum.assign(cuts.size() + 1, 0.0);
      cnt.assign(cuts.size() + 1, 0);
      for (auto i : local) {
        const auto b = bins_(i, j);
        sum[b] += residual_(i);
        ++cnt[b];
      }
      double left_sum = 0.0;
      std::size_t left_cnt = 0;
      for (std::size_t c = 0; c < cuts.size(); ++c) {
        left_sum += sum[c];
        left_cnt += cnt[c];
        if (left_cnt == 0 || left_cnt == local.size()) continue;
        const double right_sum = total - left_sum;
        const auto right_cnt = local.size() - left_cnt;
        const double gain = left_sum * left_sum / static_cast<double>(left_cnt) +
                            right_sum * right_sum / static_cast<double>(right_cnt) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = j;
          best_cut = c;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Eigen::Index> left, right;
    for (auto i : local) (bins_(i, best_feature) <= best_cut ? left : right).push_back(i);
    const double threshold = cuts_[static_cast<std::size_t>(best_feature)][best_cut];
    const auto l = build(tree, left, depth + 1);
    const auto r = build(tree, right, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = threshold;
    node.left = l;
    node.right = r;
    node.value = 0.0;
    return id;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  std::vector<Eigen::Index> rows_;
  const BoostingConfig& config_;
  double base_ = 0.0;
  Eigen::VectorXd tree_sum_;
  Eigen::VectorXd residual_;
  std::vector<std::vector<double>> cuts_;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> bins_;
};

BoostedModel empty_model(double base, Eigen::Index dim, const BoostingConfig& config) {
  BoostedModel m;
  m.base_score = base;
  m.learning_rate = config.learning_rate;
  m.dim = static_cast<std::int32_t>(dim);
  m.max_depth = config.max_depth;
  m.clip = config.clip;
  return m;
}

int tree_depth(const RegressionTree& tree, std::int32_t node) {
  const auto& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.leaf()) return 0;
  return 1 + std::max(tree_depth(tree, n.left), tree_depth(tree, n.right));
}

}  // namespace

int RegressionTree::depth() const { return nodes.empty() ? 0 : tree_depth(*this, 0); }

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
  return idx;
}

BoostedModel fit_boosted(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, const BoostingConfig& config,
                         int rounds, std::vector<double>* train_rmse) {
  check_inputs(features, labels, config);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  Booster booster(features, labels, rows, config);
  auto model = empty_model(booster.base(), features.cols(), config);
  if (train_rmse) train_rmse->assign(1, booster.train_rmse());
  if (constant(labels)) return model;
  for (int r = 0; r < rounds; ++r) {
    model.trees.push_back(booster.grow());
    if (train_rmse) train_rmse->push_back(booster.train_rmse());
  }
  return model;
}

TrainResult train_boosted(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                          const BoostingConfig& config) {
  check_inputs(features, labels, config);
  TrainResult result;
  auto& report = result.report;
  const auto n = static_cast<std::size_t>(features.rows());

  if (constant(labels)) {
    result.model = fit_boosted(features, labels, config, 0, &report.train_rmse);
    return result;
  }

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(config.folds, 2)), n);
  if (k < 2) throw Error(ErrorCode::precondition, "cross validation needs at least two rows");
  report.folds = static_cast<int>(k);

  const auto order = shuffled_indices(n, config.seed);
  std::vector<std::vector<Eigen::Index>> train_rows(k), valid_rows(k);
  for (std::size_t p = 0; p < n; ++p) {
    const auto row = static_cast<Eigen::Index>(order[p]);
    for (std::size_t f = 0; f < k; ++f) (f == p % k ? valid_rows[f] : train_rows[f]).push_back(row);
  }

  std::vector<Booster> boosters;
  std::vector<Eigen::VectorXd> valid_sum(k);
  boosters.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    boosters.emplace_back(features, labels, train_rows[f], config);
    valid_sum[f] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(valid_rows[f].size()));
  }

  auto record_round = [&] {
    std::vector<double> fold(k);
    for (std::size_t f = 0; f < k; ++f) {
      double sse = 0.0;
      for (std::size_t i = 0; i < valid_rows[f].size(); ++i) {
        const double raw = boosters[f].base() + config.learning_rate * valid_sum[f](static_cast<Eigen::Index>(i));
        sse += std::pow(labels(valid_rows[f][i]) - std::clamp(raw, config.clip.lo, config.clip.hi), 2);
      }
      fold[f] = std::sqrt(sse / static_cast<double>(valid_rows[f].size()));
    }
    report.mean_rmse.push_back(std::accumulate(fold.begin(), fold.end(), 0.0) / static_cast<double>(k));
    report.fold_rmse.push_back(std::move(fold));
  };

  record_round();
  double best = report.mean_rmse[0];
  for (int r = 1; r <= config.max_rounds; ++r) {
    for (std::size_t f = 0; f < k; ++f) {
      const auto tree = boosters[f].grow();
      for (std::size_t i = 0; i < valid_rows[f].size(); ++i) {
        valid_sum[f](static_cast<Eigen::Index>(i)) += tree.predict(features.row(valid_rows[f][i]));
      }
    }
    record_round();
    if (report.mean_rmse.back() < best) {
      best = report.mean_rmse.back();
      report.best_rounds = static_cast<std::size_t>(r);
    } else if (static_cast<std::size_t>(r) - report.best_rounds >= static_cast<std::size_t>(config.early_stop_rounds)) {
      break;
    }
  }

  result.model = fit_boosted(features, labels, config, static_cast<int>(report.best_rounds), &report.train_rmse);
  return result;
}

void save_model(const BoostedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string(), path.string());
  out.write(kModelMagic.data(), static_cast<std::streamsize>(kModelMagic.size()));
  binary::write_u32(out, kModelVersion);
  binary::write_f64(out, model.base_score);
  binary::write_f64(out, model.learning_rate);
  binary::write_u32(out, static_cast<std::uint32_t>(model.dim));
  binary::write_f64(out, model.clip.lo);
  binary::write_f64(out, model.clip.hi);
  binary::write_u32(out, static_cast<std::uint32_t>(model.max_depth));
  binary::write_u32(out, static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    binary::write_u32(out, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& n : tree.nodes) {
      binary::write_i32(out, n.feature);
      binary::write_f64(out, n.threshold);
      binary::write_i32(out, n.left);
      binary::write_i32(out, n.right);
      binary::write_f64(out, n.value);
    }
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string(), path.string());
}

BoostedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string(), path.string());
  binary::expect_magic(in, kModelMagic, "model " + path.string());
  const auto version = binary::read_u32(in);
  if (version != kModelVersion) {
    throw Error(ErrorCode::format_error, "unsupported model version " + std::to_string(version), path.string());
  }
  BoostedModel m;
  m.base_score = binary::read_f64(in);
  m.learning_rate = binary::read_f64(in);
  m.dim = static_cast<std::int32_t>(binary::read_u32(in));
  m.clip.lo = binary::read_f64(in);
  m.clip.hi = binary::read_f64(in);
  m.max_depth = static_cast<std::int32_t>(binary::read_u32(in));
  const auto trees = binary::read_u32(in);
  auto bad = [&](const std::string& why) { return Error(ErrorCode::format_error, "model: " + why, path.string()); };
  if (m.dim <= 0 || !(m.clip.lo <= m.clip.hi)) throw bad("invalid header");
  for (std::uint32_t t = 0; t < trees; ++t) {
    RegressionTree tree;
    const auto count = binary::read_u32(in);
    if (count == 0 || count > (1u << 20)) throw bad("invalid node count");
    tree.nodes.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      auto& n = tree.nodes[i];
      n.feature = binary::read_i32(in);
      n.threshold = binary::read_f64(in);
      n.left = binary::read_i32(in);
      n.right = binary::read_i32(in);
      n.value = binary::read_f64(in);
      // Pre-order layout: children always follow their parent, so every
      // prediction path terminates.
      if (!n.leaf() && (n.feature >= m.dim || n.left <= static_cast<std::int32_t>(i) ||
                        n.right <= static_cast<std::int32_t>(i) || n.left >= static_cast<std::int32_t>(count) ||
                        n.right >= static_cast<std::int32_t>(count))) {
        throw bad("invalid node " + std::to_string(i));
      }
    }
    if (tree.depth() > m.max_depth) throw bad("tree deeper than max_depth");
    m.trees.push_back(std::move(tree));
  }
  return m;
}

}  // namespace csc
