#pragma once

#include "churn/error.hpp"
#include "churn/labeling.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace churn {

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Drops the most recent `lag` days; empty when lag >= length.
template <typename Derived>
Series<typename Derived::Scalar> lag_truncate(const Eigen::MatrixBase<Derived>& counts, Eigen::Index lag) {
  if (lag < 0) throw DomainError("lag must be non-negative");
  const Eigen::Index keep = std::max<Eigen::Index>(0, counts.size() - lag);
  return counts.head(keep);
}

/// Sums consecutive non-overlapping blocks of `block` days, right-aligned so
/// the most recent block is complete. A leading partial block is dropped.
template <typename Derived>
Series<typename Derived::Scalar> resample(const Eigen::MatrixBase<Derived>& counts, Eigen::Index block) {
  if (block < 1) throw DomainError("resample window must be at least 1");
  const Eigen::Index bins = counts.size() / block;
  const Eigen::Index offset = counts.size() - bins * block;
  Series<typename Derived::Scalar> out(bins);
  for (Eigen::Index j = 0; j < bins; ++j) out[j] = counts.segment(offset + j * block, block).sum();
  return out;
}

/// Valid-mode square-window mean: element j averages inputs j..j+window-1.
template <typename Derived>
Series<typename Derived::Scalar> moving_average(const Eigen::MatrixBase<Derived>& counts, Eigen::Index window) {
  if (window < 1) throw DomainError("moving-average window must be at least 1");
  if (window > counts.size())
    throw DomainError("moving-average window " + std::to_string(window) + " exceeds series length " +
                      std::to_string(counts.size()));
  Series<typename Derived::Scalar> out(counts.size() - window + 1);
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = counts.segment(j, window).mean();
  return out;
}

/// Trailing `window` days of `counts` after dropping `lag` days, left-padded with zeros.
template <typename Derived>
Series<typename Derived::Scalar> observation_window(const Eigen::MatrixBase<Derived>& counts, Eigen::Index window,
                                                    Eigen::Index lag) {
  const auto kept = lag_truncate(counts, lag);
  Series<typename Derived::Scalar> out = Series<typename Derived::Scalar>::Zero(window);
  const Eigen::Index take = std::min(window, kept.size());
  out.tail(take) = kept.tail(take);
  return out;
}

enum class FeatureMode { downsample, moving_average };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

struct FeatureConfig {
  int window_days = 540;
  int resample_days = 1;
  int lag_days = 0;
  FeatureMode mode = FeatureMode::downsample;
  int ma_window = 7;

  /// floor(W / resample_days) or W - ma_window + 1.
  Eigen::Index width() const;
  /// Throws DomainError for a configuration with no features.
  void validate() const;
};

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  /// Columns with stddev < 1e-12; they are centered but not scaled.
  std::vector<bool> degenerate;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

struct FeatureMatrix {
  Eigen::MatrixXd rows;
  Eigen::VectorXi labels;  ///< +1 active, -1 inactive
  std::vector<std::string> customer_ids;
  FeatureConfig config;
  std::optional<Standardizer> standardization;

  Eigen::Index size() const { return rows.rows(); }
  Eigen::Index width() const { return rows.cols(); }
};

/// The feature row of a single aligned series under `config`.
Eigen::VectorXd feature_row(const Eigen::VectorXd& counts, const FeatureConfig& config);

/// lag_truncate -> trailing window (zero-padded) -> resample or moving average.
FeatureMatrix build_matrix(const LabeledDataset& dataset, const FeatureConfig& config);

/// Population mean and stddev per column.
Standardizer fit_standardizer(const Eigen::MatrixXd& rows);
Standardizer fit_standardizer(const FeatureMatrix& matrix);
FeatureMatrix apply_standardizer(const FeatureMatrix& matrix, const Standardizer& params);

/// Row subset, preserving order of `indices`.
FeatureMatrix select_rows(const FeatureMatrix& matrix, const std::vector<Eigen::Index>& indices);

/// Header `customer_id,label,f0..f{k-1}`.
void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix);

}  // namespace churn
