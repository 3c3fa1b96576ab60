#pragma once

// Binned-feature decision trees shared by the random forest (Gini
// classification trees) and gradient boosting (second-order regression trees).

#include "churn/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace churn {

/// Per-column integer codes. With at most `max_bins` distinct values a column
/// is coded exactly (cuts at midpoints between neighbours); otherwise cuts are
/// taken at quantiles. For every row, code <= b  <=>  value <= cuts[b].
struct BinnedFeatures {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<std::uint8_t> codes;  ///< column-major
  std::vector<std::vector<double>> cuts;

  std::uint8_t code(Eigen::Index row, Eigen::Index col) const {
    return codes[static_cast<std::size_t>(col * rows + row)];
  }
  const std::uint8_t* column(Eigen::Index col) const { return codes.data() + col * rows; }
};

constexpr int kMaxBins = 256;

BinnedFeatures bin_features(const Eigen::MatrixXd& rows, int max_bins = kMaxBins);

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  int bin = 0;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  /// Goes left when row[feature] <= threshold.
  template <typename Row>
  double predict(const Row& row) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }
  double predict_binned(const BinnedFeatures& binned, Eigen::Index row) const;
  int depth() const;
  std::size_t leaf_count() const;

  void save(std::ostream& out) const;
  static DecisionTree load(std::istream& in);
};

/// Gini impurity 1 - p^2 - q^2 of a node with the given class weights.
double gini_impurity(double positive, double negative);

struct GiniTreeOptions {
  int features_per_split = 1;
  int max_depth = 0;  ///< 0 = unlimited
  int min_leaf = 1;
};

/// Grows a classification tree on rows with positive `weights` (bootstrap
/// multiplicities). labels are +/-1; leaves hold the weighted majority label,
/// ties going to +1. Splits with zero impurity decrease are allowed so that
/// impure nodes keep splitting while any feature varies.
DecisionTree grow_gini_tree(const BinnedFeatures& binned, const Eigen::VectorXi& labels,
                            const std::vector<int>& weights, const GiniTreeOptions& options, Rng& rng);

struct GradientTreeOptions {
  int max_depth = 3;
  double l2 = 1.0;
  int min_leaf = 1;
};

/// Grows a regression tree maximizing the second-order gain
/// G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G^2/(H+l2); leaves hold -G/(H+l2).
DecisionTree grow_gradient_tree(const BinnedFeatures& binned, const Eigen::VectorXd& gradient,
                                const Eigen::VectorXd& hessian, const GradientTreeOptions& options);

}  // namespace churn
