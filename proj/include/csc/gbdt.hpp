#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string_view>
#include <vector>

namespace csc {

// One node of a regression tree. A node with feature < 0 is a leaf carrying
// `value`; otherwise rows with x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Nodes are stored in pre-order; node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& x) const {
    std::int32_t i = 0;
    while (!nodes[static_cast<std::size_t>(i)].leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = static_cast<double>(x(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  int depth() const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct ClipRange {
  double lo = 0.0;
  double hi = 5.0;
  friend bool operator==(const ClipRange&, const ClipRange&) = default;
};

inline constexpr ClipRange kNoClip{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

// Squared-error boosted ensemble: clip(base + learning_rate * sum(trees)).
struct BoostedModel {
  double base_score = 0.0;
  double learning_rate = 0.05;
  std::int32_t dim = 0;
  std::int32_t max_depth = 6;
  ClipRange clip;
  std::vector<RegressionTree> trees;

  template <typename Derived>
  double predict_raw(const Eigen::MatrixBase<Derived>& x, std::size_t rounds) const {
    double sum = 0.0;
    for (std::size_t t = 0; t < rounds && t < trees.size(); ++t) sum += trees[t].predict(x);
    return base_score + learning_rate * sum;
  }

  template <typename Derived>
  double predict_raw(const Eigen::MatrixBase<Derived>& x) const {
    return predict_raw(x, trees.size());
  }

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& x) const {
    return std::clamp(predict_raw(x), clip.lo, clip.hi);
  }

  friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

struct BoostingConfig {
  int max_depth = 6;
  double learning_rate = 0.05;
  int max_rounds = 200;
  int folds = 10;
  int early_stop_rounds = 10;
  int cut_points = 16;  // quantile split candidates per feature
  std::uint64_t seed = 20211022;
  ClipRange clip;
};

struct CvReport {
  int folds = 0;
  // fold_rmse[r][f]: validation RMSE of fold f after r trees (r = 0 is the
  // base score alone).
  std::vector<std::vector<double>> fold_rmse;
  std::vector<double> mean_rmse;
  std::size_t best_rounds = 0;
  // RMSE of the final model on all training rows after r trees, unclipped.
  std::vector<double> train_rmse;
};

struct TrainResult {
  BoostedModel model;
  CvReport report;
};

// Rounds are chosen by k-fold cross validation (earliest minimum of the mean
// validation RMSE, stopping after `early_stop_rounds` without improvement);
// the returned model is then refit on every row with that many rounds.
TrainResult train_boosted(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, const BoostingConfig& config);

// Fits exactly `rounds` trees without cross validation. train_rmse, if
// given, receives rounds + 1 values.
BoostedModel fit_boosted(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, const BoostingConfig& config,
                         int rounds, std::vector<double>* train_rmse = nullptr);

// Index permutation used for fold assignment; identical on every platform.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

inline constexpr std::string_view kModelMagic = "CSGBT1";
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(const BoostedModel& model, const std::filesystem::path& path);
BoostedModel load_model(const std::filesystem::path& path);

}  // namespace csc
