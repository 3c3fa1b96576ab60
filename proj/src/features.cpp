#include "churn/features.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace churn {

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::downsample ? "downsample" : "moving_average";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "downsample") return FeatureMode::downsample;
  if (text == "moving_average") return FeatureMode::moving_average;
  throw DomainError("unknown feature mode '" + std::string(text) + "'");
}

Eigen::Index FeatureConfig::width() const {
  if (mode == FeatureMode::downsample) return resample_days >= 1 ? window_days / resample_days : 0;
  return window_days - ma_window + 1;
}

void FeatureConfig::validate() const {
  if (window_days < 1) throw DomainError("window_days must be positive");
  if (lag_days < 0) throw DomainError("lag_days must be non-negative");
  if (mode == FeatureMode::downsample) {
    if (resample_days < 1) throw DomainError("resample_days must be at least 1");
    if (resample_days > window_days)
      throw DomainError("resample window " + std::to_string(resample_days) + " leaves no features in a " +
                        std::to_string(window_days) + "-day window");
  } else {
    if (ma_window < 1) throw DomainError("ma_window must be at least 1");
    if (ma_window > window_days)
      throw DomainError("moving-average window " + std::to_string(ma_window) + " leaves no features in a " +
                        std::to_string(window_days) + "-day window");
  }
}

Eigen::VectorXd feature_row(const Eigen::VectorXd& counts, const FeatureConfig& config) {
  const auto window = observation_window(counts, config.window_days, config.lag_days);
  return config.mode == FeatureMode::downsample ? resample(window, config.resample_days)
                                                : moving_average(window, config.ma_window);
}

FeatureMatrix build_matrix(const LabeledDataset& dataset, const FeatureConfig& config) {
  config.validate();
  if (dataset.entries.empty()) throw EmptyDatasetError("no labeled customers to build features from");
  const auto n = static_cast<Eigen::Index>(dataset.entries.size());
  FeatureMatrix out;
  out.config = config;
  out.rows.resize(n, config.width());
  out.labels.resize(n);
  out.customer_ids.reserve(dataset.entries.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = dataset.entries[static_cast<std::size_t>(i)];
    out.rows.row(i) = feature_row(e.counts, config).transpose();
    out.labels[i] = e.label == ActivityLabel::Active ? 1 : -1;
    out.customer_ids.push_back(e.customer_id);
  }
  return out;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size())
    throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) + " columns, got " +
                     std::to_string(rows.cols()));
  Eigen::MatrixXd out = rows.rowwise() - mean.transpose();
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    if (!degenerate[static_cast<std::size_t>(j)]) out.col(j) /= stddev[j];
  return out;
}

Standardizer fit_standardizer(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw DomainError("cannot fit a standardizer on zero rows");
  Standardizer s;
  s.mean = rows.colwise().mean().transpose();
  s.stddev = ((rows.rowwise() - s.mean.transpose()).array().square().colwise().sum() / static_cast<double>(rows.rows()))
                 .sqrt()
                 .transpose();
  s.degenerate.resize(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index j = 0; j < rows.cols(); ++j) s.degenerate[static_cast<std::size_t>(j)] = s.stddev[j] < 1e-12;
  return s;
}

Standardizer fit_standardizer(const FeatureMatrix& matrix) { return fit_standardizer(matrix.rows); }

FeatureMatrix apply_standardizer(const FeatureMatrix& matrix, const Standardizer& params) {
  FeatureMatrix out = matrix;
  out.rows = params.apply(matrix.rows);
  out.standardization = params;
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& matrix, const std::vector<Eigen::Index>& indices) {
  FeatureMatrix out;
  out.config = matrix.config;
  out.standardization = matrix.standardization;
  out.rows.resize(static_cast<Eigen::Index>(indices.size()), matrix.width());
  out.labels.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = indices[k];
    out.rows.row(static_cast<Eigen::Index>(k)) = matrix.rows.row(i);
    out.labels[static_cast<Eigen::Index>(k)] = matrix.labels[i];
    if (!matrix.customer_ids.empty()) out.customer_ids.push_back(matrix.customer_ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix) {
  out << "customer_id,label";
  for (Eigen::Index j = 0; j < matrix.width(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < matrix.size(); ++i) {
    out << (matrix.customer_ids.empty() ? std::to_string(i) : matrix.customer_ids[static_cast<std::size_t>(i)]) << ','
        << matrix.labels[i];
    for (Eigen::Index j = 0; j < matrix.width(); ++j) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, matrix.rows(i, j));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace churn
