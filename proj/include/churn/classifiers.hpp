#pragma once

// The five classifier families. Each takes rows x features and +/-1 labels;
// decision_score >= 0 means +1 (active).

#include "churn/tree.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace churn {

struct NaiveBayesParams {
  double variance_floor = 1e-9;
  bool operator==(const NaiveBayesParams&) const = default;
};

/// Gaussian naive Bayes with maximum-likelihood (population) variances.
class GaussianNaiveBayes {
 public:
  static GaussianNaiveBayes fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels,
                                const NaiveBayesParams& params);

  /// log P(+1 | x) - log P(-1 | x).
  Eigen::VectorXd decision_score(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd posterior_active(const Eigen::MatrixXd& rows) const;

  /// Row 0 is the +1 class, row 1 the -1 class.
  const Eigen::MatrixXd& means() const { return means_; }
  const Eigen::MatrixXd& variances() const { return variances_; }
  const Eigen::Vector2d& priors() const { return priors_; }

  void save(std::ostream& out) const;
  static GaussianNaiveBayes load(std::istream& in);

 private:
  Eigen::MatrixXd means_;
  Eigen::MatrixXd variances_;
  Eigen::Vector2d priors_ = Eigen::Vector2d::Zero();
};

struct SvmParams {
  double l2 = 1e-3;
  int iterations = 500;
  double step = 0.1;
  bool operator==(const SvmParams&) const = default;
};

/// Linear SVM minimizing l2/2 |w|^2 + mean hinge loss by full-batch
/// subgradient descent (step / sqrt(t)), keeping the best objective seen.
class LinearSvm {
 public:
  static LinearSvm fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels, const SvmParams& params);

  Eigen::VectorXd decision_score(const Eigen::MatrixXd& rows) const;
  static double objective(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels, const Eigen::VectorXd& weights,
                          double bias, double l2);

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }

  void save(std::ostream& out) const;
  static LinearSvm load(std::istream& in);

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
};

struct MlpParams {
  int hidden = 64;
  int epochs = 200;
  double step = 0.01;
  int batch_size = 32;
  bool operator==(const MlpParams&) const = default;
};

/// One hidden ReLU layer and a logistic output, trained with mini-batch SGD
/// on mean binary cross-entropy.
class Mlp {
 public:
  /// Random He-uniform initialization.
  static Mlp initialize(Eigen::Index inputs, int hidden, Rng& rng);
  static Mlp fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels, const MlpParams& params,
                 std::uint64_t seed);

  /// Output logit; sign agrees with predict.
  Eigen::VectorXd decision_score(const Eigen::MatrixXd& rows) const;

  /// Mean cross-entropy and its gradient with respect to parameters().
  std::pair<double, Eigen::VectorXd> loss_and_gradient(const Eigen::MatrixXd& rows,
                                                       const Eigen::VectorXi& labels) const;
  double loss(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels) const;

  /// Flattened [W1 (row-major), b1, w2, b2].
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  Eigen::Index inputs() const { return w1_.cols(); }

  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

 private:
  Eigen::MatrixXd w1_;  // hidden x inputs
  Eigen::VectorXd b1_;
  Eigen::VectorXd w2_;
  double b2_ = 0.0;
};

struct ForestParams {
  int trees = 300;
  int features_per_split = 0;  ///< 0 = floor(sqrt(width))
  int max_depth = 0;           ///< 0 = unlimited
  int min_leaf = 1;
  bool operator==(const ForestParams&) const = default;
};

/// Bagged Gini trees; each tree votes its leaf's majority label.
class RandomForest {
 public:
  static RandomForest fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels, const ForestParams& params,
                          std::uint64_t seed);

  /// (votes for +1 - votes for -1) / trees.
  Eigen::VectorXd decision_score(const Eigen::MatrixXd& rows) const;
  /// Fraction of training rows misclassified by the trees that did not see
  /// them (rows that were in every bootstrap sample are skipped).
  double oob_error() const { return oob_error_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  void save(std::ostream& out) const;
  static RandomForest load(std::istream& in);

 private:
  std::vector<DecisionTree> trees_;
  double oob_error_ = 0.0;
};

struct BoostingParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double l2 = 1.0;
  bool operator==(const BoostingParams&) const = default;
};

/// Gradient boosting on logistic loss with Newton-step regression trees.
class GradientBoosting {
 public:
  static GradientBoosting fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels,
                              const BoostingParams& params);

  /// Additive log-odds of +1.
  Eigen::VectorXd decision_score(const Eigen::MatrixXd& rows) const;
  /// Mean training logistic loss before the first round and after each round.
  const std::vector<double>& training_loss() const { return training_loss_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  void save(std::ostream& out) const;
  static GradientBoosting load(std::istream& in);

 private:
  double intercept_ = 0.0;
  std::vector<DecisionTree> trees_;  // leaf values already scaled by the learning rate
  std::vector<double> training_loss_;
};

}  // namespace churn
