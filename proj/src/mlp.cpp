#include "churn/classifiers.hpp"

#include "text_io.hpp"

#include <cmath>
#include <numeric>

namespace churn {

namespace {

struct Gradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

// log(1 + e^z) without overflow.
Eigen::ArrayXd softplus(const Eigen::ArrayXd& z) { return z.cwiseMax(0.0) + (-z.abs()).exp().log1p(); }

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

Eigen::ArrayXd targets(const Eigen::VectorXi& labels) { return (labels.array() > 0).cast<double>(); }

}  // namespace

Mlp Mlp::initialize(Eigen::Index inputs, int hidden, Rng& rng) {
  Mlp m;
  const auto uniform = [&](double limit) { return limit * (2.0 * uniform01(rng) - 1.0); };
  const double lim1 = std::sqrt(6.0 / static_cast<double>(std::max<Eigen::Index>(1, inputs)));
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  m.w1_.resize(hidden, inputs);
  for (Eigen::Index i = 0; i < m.w1_.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w1_.cols(); ++j) m.w1_(i, j) = uniform(lim1);
  m.b1_ = Eigen::VectorXd::Zero(hidden);
  m.w2_.resize(hidden);
  for (Eigen::Index i = 0; i < hidden; ++i) m.w2_[i] = uniform(lim2);
  m.b2_ = 0.0;
  return m;
}

Eigen::VectorXd Mlp::decision_score(const Eigen::MatrixXd& rows) const {
  const Eigen::MatrixXd hidden = ((rows * w1_.transpose()).rowwise() + b1_.transpose()).cwiseMax(0.0);
  return (hidden * w2_).array() + b2_;
}

double Mlp::loss(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels) const {
  const Eigen::ArrayXd z = decision_score(rows).array();
  return (softplus(z) - targets(labels) * z).mean();
}

namespace {

// Mean cross-entropy gradient over `rows`; writes the loss if requested.
Gradient backprop(const Eigen::MatrixXd& w1, const Eigen::VectorXd& b1, const Eigen::VectorXd& w2, double b2,
                  const Eigen::MatrixXd& rows, const Eigen::ArrayXd& t, double* loss) {
  const Eigen::MatrixXd pre = (rows * w1.transpose()).rowwise() + b1.transpose();
  const Eigen::MatrixXd act = pre.cwiseMax(0.0);
  const Eigen::ArrayXd z = (act * w2).array() + b2;
  if (loss) *loss = (softplus(z) - t * z).mean();
  const Eigen::VectorXd dz = ((sigmoid(z) - t) / static_cast<double>(rows.rows())).matrix();
  Gradient g;
  g.w2 = act.transpose() * dz;
  g.b2 = dz.sum();
  const Eigen::MatrixXd dpre = ((dz * w2.transpose()).array() * (pre.array() > 0.0).cast<double>()).matrix();
  g.w1 = dpre.transpose() * rows;
  g.b1 = dpre.colwise().sum().transpose();
  return g;
}

}  // namespace

std::pair<double, Eigen::VectorXd> Mlp::loss_and_gradient(const Eigen::MatrixXd& rows,
                                                          const Eigen::VectorXi& labels) const {
  double l = 0.0;
  const Gradient g = backprop(w1_, b1_, w2_, b2_, rows, targets(labels), &l);
  Mlp packed;
  packed.w1_ = g.w1;
  packed.b1_ = g.b1;
  packed.w2_ = g.w2;
  packed.b2_ = g.b2;
  return {l, packed.parameters()};
}

Eigen::VectorXd Mlp::parameters() const {
  const Eigen::Index h = w1_.rows(), d = w1_.cols();
  Eigen::VectorXd flat(h * d + 2 * h + 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < d; ++j) flat[k++] = w1_(i, j);
  flat.segment(k, h) = b1_;
  k += h;
  flat.segment(k, h) = w2_;
  k += h;
  flat[k] = b2_;
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  const Eigen::Index h = w1_.rows(), d = w1_.cols();
  if (flat.size() != h * d + 2 * h + 1) throw ShapeError("MLP parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < d; ++j) w1_(i, j) = flat[k++];
  b1_ = flat.segment(k, h);
  k += h;
  w2_ = flat.segment(k, h);
  k += h;
  b2_ = flat[k];
}

Mlp Mlp::fit(const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels, const MlpParams& params,
             std::uint64_t seed) {
  Rng rng(seed);
  Mlp m = initialize(rows.cols(), params.hidden, rng);
  const Eigen::ArrayXd t = targets(labels);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<std::size_t>(std::max(1, params.batch_size));
  Eigen::MatrixXd xb;
  Eigen::ArrayXd tb;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle_in_place(order, rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      xb.resize(static_cast<Eigen::Index>(len), rows.cols());
      tb.resize(static_cast<Eigen::Index>(len));
      for (std::size_t k = 0; k < len; ++k) {
        xb.row(static_cast<Eigen::Index>(k)) = rows.row(order[start + k]);
        tb[static_cast<Eigen::Index>(k)] = t[order[start + k]];
      }
      const Gradient g = backprop(m.w1_, m.b1_, m.w2_, m.b2_, xb, tb, nullptr);
      m.w1_ -= params.step * g.w1;
      m.b1_ -= params.step * g.b1;
      m.w2_ -= params.step * g.w2;
      m.b2_ -= params.step * g.b2;
    }
  }
  return m;
}

void Mlp::save(std::ostream& out) const {
  io::write_matrix(out, w1_);
  io::write_vector(out, b1_);
  io::write_vector(out, w2_);
  out << io::format_double(b2_) << '\n';
}

Mlp Mlp::load(std::istream& in) {
  Mlp m;
  m.w1_ = io::read_matrix(in, "mlp input weights");
  m.b1_ = io::read_vector(in, "mlp hidden bias");
  m.w2_ = io::read_vector(in, "mlp output weights");
  m.b2_ = io::read<double>(in, "mlp output bias");
  if (m.b1_.size() != m.w1_.rows() || m.w2_.size() != m.w1_.rows())
    throw ParseError(0, "model: inconsistent MLP shapes");
  return m;
}

}  // namespace churn
