#include "churn/classifiers.hpp"

#include "text_io.hpp"

#include <cmath>
#include <numbers>

namespace churn {

GaussianNaiveBayes GaussianNaiveBayes::fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels,
                                           const NaiveBayesParams& params) {
  const Eigen::Index d = rows.cols();
  GaussianNaiveBayes nb;
  nb.means_ = Eigen::MatrixXd::Zero(2, d);
  nb.variances_ = Eigen::MatrixXd::Zero(2, d);
  Eigen::Vector2d counts = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const int c = labels[i] > 0 ? 0 : 1;
    nb.means_.row(c) += rows.row(i);
    counts[c] += 1.0;
  }
  for (int c = 0; c < 2; ++c)
    if (counts[c] > 0) nb.means_.row(c) /= counts[c];
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const int c = labels[i] > 0 ? 0 : 1;
    nb.variances_.row(c) += (rows.row(i) - nb.means_.row(c)).array().square().matrix();
  }
  for (int c = 0; c < 2; ++c)
    if (counts[c] > 0) nb.variances_.row(c) /= counts[c];
  nb.variances_ = nb.variances_.cwiseMax(params.variance_floor);
  nb.priors_ = counts / static_cast<double>(rows.rows());
  return nb;
}

Eigen::VectorXd GaussianNaiveBayes::decision_score(const Eigen::MatrixXd& rows) const {
  Eigen::VectorXd ll[2];
  for (int c = 0; c < 2; ++c) {
    const Eigen::RowVectorXd mu = means_.row(c);
    const Eigen::ArrayXXd var = variances_.row(c).array();
    const double norm = (2.0 * std::numbers::pi * variances_.row(c).array()).log().sum();
    const Eigen::ArrayXXd z = (rows.rowwise() - mu).array().square().rowwise() / var.row(0);
    ll[c] = (std::log(priors_[c]) - 0.5 * (z.rowwise().sum() + norm)).matrix();
  }
  return ll[0] - ll[1];
}

Eigen::VectorXd GaussianNaiveBayes::posterior_active(const Eigen::MatrixXd& rows) const {
  return (1.0 / (1.0 + (-decision_score(rows).array()).exp())).matrix();
}

void GaussianNaiveBayes::save(std::ostream& out) const {
  io::write_matrix(out, means_);
  io::write_matrix(out, variances_);
  io::write_vector(out, priors_);
}

GaussianNaiveBayes GaussianNaiveBayes::load(std::istream& in) {
  GaussianNaiveBayes nb;
  nb.means_ = io::read_matrix(in, "class means");
  nb.variances_ = io::read_matrix(in, "class variances");
  const auto priors = io::read_vector(in, "priors");
  if (nb.means_.rows() != 2 || nb.variances_.rows() != 2 || nb.means_.cols() != nb.variances_.cols() ||
      priors.size() != 2)
    throw ParseError(0, "model: inconsistent naive Bayes shapes");
  nb.priors_ = priors;
  return nb;
}

}  // namespace churn
