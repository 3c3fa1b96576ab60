#pragma once

#include <Eigen/Core>

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace churn {

using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`; throws DomainError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Exact equality that is false (rather than asserting) on a size mismatch.
inline bool equal_values(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

/// Daily download counts of one customer over consecutive days.
struct DownloadSeries {
  std::string customer_id;
  Date start_date{};
  Eigen::VectorXd counts;

  Date last_date() const { return start_date + std::chrono::days{counts.size() - 1}; }
  /// Exact element-wise equality; series of different lengths compare unequal.
  friend bool operator==(const DownloadSeries& a, const DownloadSeries& b);
};

struct RawDataset {
  /// Sorted by customer_id, ids unique.
  std::vector<DownloadSeries> series;
  Date observation_end{};

  const DownloadSeries* find(std::string_view customer_id) const;
  bool operator==(const RawDataset&) const = default;
};

/// Checks the series and dataset invariants; throws DomainError.
void validate(const DownloadSeries& series);
void validate(const RawDataset& dataset);

/// Reads long-form `customer_id,date,ftd` CSV. Dates missing inside a
/// customer's observed range become zero-download days.
RawDataset parse_long_csv(std::istream& in);
/// Writes every materialized day, so parse_long_csv reproduces the input.
void write_long_csv(std::ostream& out, const RawDataset& dataset);

/// Rescales to a maximum of 1 and adds uniform jitter in [0, jitter_epsilon].
DownloadSeries anonymize(const DownloadSeries& series, double jitter_epsilon, std::uint64_t seed);

struct SynthConfig {
  int n_customers = 1000;
  double churn_fraction = 0.45;
  int horizon_days = 1460;
  /// Log-normal parameters of the per-customer base daily volume.
  double size_mu = 1.5;
  double size_sigma = 1.5;
  /// Monday..Sunday multipliers.
  std::array<double, 7> weekly_profile{1.0, 1.0, 1.05, 1.0, 0.85, 0.5, 0.6};
  /// Week-of-year indices (1..53) that get `annual_dip_multiplier`.
  std::vector<int> annual_dip_weeks{30, 31, 32, 51, 52, 53};
  double annual_dip_multiplier = 0.6;
  int churn_decay_days = 120;
  /// Var = m + dispersion * m^2 (gamma-mixed Poisson).
  double noise_dispersion = 1.0;
  /// Base-volume multiplier applied to churners; 1 plants no volume signal.
  double churner_volume_ratio = 1.0;
  /// Earliest churn day offset; the effective floor is max(this, churn_decay_days).
  int min_churn_day = 0;
  Date start_date = Date{std::chrono::year{2015} / 1 / 5};
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

struct SyntheticDataset {
  RawDataset data;
  /// customer_id -> churn date (first all-zero day); nullopt for non-churners.
  std::map<std::string, std::optional<Date>> churn_dates;
};

/// Deterministic under config.seed. Churn dates are drawn uniformly from
/// [max(min_churn_day, churn_decay_days), horizon_days - 30] (upper bound
/// clamped to the lower one), as day offsets from start_date.
SyntheticDataset generate_synthetic(const SynthConfig& config);

void write_ground_truth_csv(std::ostream& out, const SyntheticDataset& synth);
std::map<std::string, std::optional<Date>> parse_ground_truth_csv(std::istream& in);

}  // namespace churn
