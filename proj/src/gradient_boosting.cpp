#include "churn/classifiers.hpp"

#include "text_io.hpp"

#include <algorithm>
#include <cmath>

namespace churn {

namespace {

double mean_logistic_loss(const Eigen::ArrayXd& score, const Eigen::ArrayXd& t) {
  return (score.cwiseMax(0.0) + (-score.abs()).exp().log1p() - t * score).mean();
}

}  // namespace

GradientBoosting GradientBoosting::fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels,
                                       const BoostingParams& params) {
  const auto binned = bin_features(rows);
  const Eigen::ArrayXd t = (labels.array() > 0).cast<double>();
  const double prior = std::clamp(t.mean(), 1e-6, 1.0 - 1e-6);

  GradientBoosting gb;
  gb.intercept_ = std::log(prior / (1.0 - prior));
  Eigen::ArrayXd score = Eigen::ArrayXd::Constant(rows.rows(), gb.intercept_);
  gb.training_loss_.push_back(mean_logistic_loss(score, t));

  GradientTreeOptions options;
  options.max_depth = params.max_depth;
  options.l2 = params.l2;
  for (int r = 0; r < params.rounds; ++r) {
    const Eigen::ArrayXd p = 1.0 / (1.0 + (-score).exp());
    const Eigen::VectorXd gradient = (p - t).matrix();
    const Eigen::VectorXd hessian = (p * (1.0 - p)).cwiseMax(1e-16).matrix();
    auto tree = grow_gradient_tree(binned, gradient, hessian, options);
    for (auto& node : tree.nodes) node.value *= params.learning_rate;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) score[i] += tree.predict_binned(binned, i);
    gb.training_loss_.push_back(mean_logistic_loss(score, t));
    gb.trees_.push_back(std::move(tree));
  }
  return gb;
}

Eigen::VectorXd GradientBoosting::decision_score(const Eigen::MatrixXd& rows) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(rows.rows(), intercept_);
  Eigen::RowVectorXd row;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    row = rows.row(i);
    for (const auto& tree : trees_) out[i] += tree.predict(row);
  }
  return out;
}

void GradientBoosting::save(std::ostream& out) const {
  out << io::format_double(intercept_) << ' ' << trees_.size() << '\n';
  for (const auto& t : trees_) t.save(out);
}

GradientBoosting GradientBoosting::load(std::istream& in) {
  GradientBoosting gb;
  gb.intercept_ = io::read<double>(in, "boosting intercept");
  const auto count = io::read<std::size_t>(in, "tree count");
  for (std::size_t t = 0; t < count; ++t) gb.trees_.push_back(DecisionTree::load(in));
  return gb;
}

}  // namespace churn
