#include "churn/classifiers.hpp"

#include "text_io.hpp"

#include <cmath>
#include <limits>

namespace churn {

double LinearSvm::objective(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels,
                            const Eigen::VectorXd& weights, double bias, double l2) {
  const Eigen::ArrayXd margins = labels.cast<double>().array() * ((rows * weights).array() + bias);
  return 0.5 * l2 * weights.squaredNorm() + (1.0 - margins).cwiseMax(0.0).mean();
}

LinearSvm LinearSvm::fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels, const SvmParams& params) {
  const auto n = static_cast<double>(rows.rows());
  const Eigen::ArrayXd y = labels.cast<double>().array();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(rows.cols());
  double b = 0.0;

  LinearSvm best;
  double best_objective = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= params.iterations + 1; ++t) {
    const Eigen::ArrayXd margins = y * ((rows * w).array() + b);
    const double obj = 0.5 * params.l2 * w.squaredNorm() + (1.0 - margins).cwiseMax(0.0).mean();
    if (obj < best_objective) {
      best_objective = obj;
      best.weights_ = w;
      best.bias_ = b;
    }
    if (t > params.iterations) break;
    // Subgradient: rows inside the margin contribute -y x.
    const Eigen::VectorXd coef = ((margins < 1.0).cast<double>() * y).matrix() / n;
    const Eigen::VectorXd grad_w = params.l2 * w - rows.transpose() * coef;
    const double grad_b = -coef.sum();
    const double eta = params.step / std::sqrt(static_cast<double>(t));
    w -= eta * grad_w;
    b -= eta * grad_b;
  }
  return best;
}

Eigen::VectorXd LinearSvm::decision_score(const Eigen::MatrixXd& rows) const {
  return (rows * weights_).array() + bias_;
}

void LinearSvm::save(std::ostream& out) const {
  io::write_vector(out, weights_);
  out << io::format_double(bias_) << '\n';
}

LinearSvm LinearSvm::load(std::istream& in) {
  LinearSvm svm;
  svm.weights_ = io::read_vector(in, "svm weights");
  svm.bias_ = io::read<double>(in, "svm bias");
  return svm;
}

}  // namespace churn
