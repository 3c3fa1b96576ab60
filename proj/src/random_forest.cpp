#include "churn/classifiers.hpp"

#include "text_io.hpp"

#include <cmath>

namespace churn {

RandomForest RandomForest::fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels,
                               const ForestParams& params, std::uint64_t seed) {
  const Eigen::Index n = rows.rows();
  const auto binned = bin_features(rows);
  GiniTreeOptions options;
  options.features_per_split =
      params.features_per_split > 0
          ? std::min<int>(params.features_per_split, static_cast<int>(rows.cols()))
          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(rows.cols())))));
  options.max_depth = params.max_depth;
  options.min_leaf = params.min_leaf;

  RandomForest forest;
  forest.trees_.reserve(static_cast<std::size_t>(params.trees));
  std::vector<int> oob_pos(static_cast<std::size_t>(n), 0), oob_neg(static_cast<std::size_t>(n), 0);
  std::vector<int> weights(static_cast<std::size_t>(n));
  for (int t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::fill(weights.begin(), weights.end(), 0);
    for (Eigen::Index k = 0; k < n; ++k) ++weights[uniform_below(rng, static_cast<std::uint64_t>(n))];
    auto tree = grow_gini_tree(binned, labels, weights, options, rng);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights[static_cast<std::size_t>(i)] > 0) continue;
      ++(tree.predict_binned(binned, i) > 0 ? oob_pos : oob_neg)[static_cast<std::size_t>(i)];
    }
    forest.trees_.push_back(std::move(tree));
  }

  Eigen::Index counted = 0, wrong = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (oob_pos[k] + oob_neg[k] == 0) continue;
    ++counted;
    if ((oob_pos[k] >= oob_neg[k] ? 1 : -1) != labels[i]) ++wrong;
  }
  forest.oob_error_ = counted ? static_cast<double>(wrong) / static_cast<double>(counted) : 0.0;
  return forest;
}

Eigen::VectorXd RandomForest::decision_score(const Eigen::MatrixXd& rows) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows.rows());
  Eigen::RowVectorXd row;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    row = rows.row(i);
    double votes = 0.0;
    for (const auto& tree : trees_) votes += tree.predict(row);
    out[i] = votes / static_cast<double>(trees_.size());
  }
  return out;
}

void RandomForest::save(std::ostream& out) const {
  out << io::format_double(oob_error_) << ' ' << trees_.size() << '\n';
  for (const auto& t : trees_) t.save(out);
}

RandomForest RandomForest::load(std::istream& in) {
  RandomForest forest;
  forest.oob_error_ = io::read<double>(in, "oob error");
  const auto count = io::read<std::size_t>(in, "tree count");
  if (count == 0) throw ParseError(0, "model: forest without trees");
  for (std::size_t t = 0; t < count; ++t) forest.trees_.push_back(DecisionTree::load(in));
  return forest;
}

}  // namespace churn
