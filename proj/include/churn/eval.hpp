#pragma once

#include "churn/features.hpp"
#include "churn/labeling.hpp"
#include "churn/models.hpp"
#include "churn/stats.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace churn {

using Fold = std::vector<Eigen::Index>;

/// Shuffles each class with `seed` and deals it round-robin over k folds.
/// Folds partition 0..n-1 and per-class fold counts differ by at most one.
/// Throws StratificationError when a class has fewer than k members.
std::vector<Fold> stratified_kfold(const Eigen::VectorXi& labels, int k, std::uint64_t seed);

/// Everything fitted on one fold's training rows.
struct FoldModel {
  std::optional<Standardizer> standardizer;
  ClassifierModel model;

  Eigen::VectorXi predict(const Eigen::MatrixXd& rows) const;
};

/// Fits the standardizer (SVM and MLP only) and the model on `train` rows only.
FoldModel fit_fold(const FeatureMatrix& matrix, const Fold& train, const ClassifierSpec& spec);

/// Held-out accuracy per fold, in fold order.
std::vector<double> cross_validate(const FeatureMatrix& matrix, const ClassifierSpec& spec, int k,
                                   std::uint64_t seed);

/// build_matrix followed by cross_validate. Errors carry the cell coordinates.
std::vector<double> evaluate_cell(const LabeledDataset& dataset, const FeatureConfig& config,
                                  const ClassifierSpec& spec, int k, std::uint64_t seed);

/// Values from `first` to `last` inclusive in steps of `stride`.
std::vector<int> inclusive_range(int first, int last, int stride = 1);

struct GridSpec {
  /// Resample windows in downsample mode, moving-average lengths otherwise.
  std::vector<int> resample_range = inclusive_range(1, 30);
  std::vector<int> lag_range = inclusive_range(0, 365, 5);
  std::vector<ClassifierSpec> families{ClassifierSpec::defaults(Family::random_forest)};
  int folds = 5;
  std::uint64_t seed = 0;
  FeatureMode mode = FeatureMode::downsample;
  int window_days = 540;

  void validate() const;
};

struct GridCell {
  FeatureMode mode = FeatureMode::downsample;
  int resample = 1;  ///< resample window, or moving-average length
  int lag = 0;
  Family family = Family::random_forest;
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

struct GridResult {
  /// Ordered by resample, then lag, then family position in the GridSpec.
  std::vector<GridCell> cells;

  std::size_t failed() const;
  bool operator==(const GridResult&) const;
};

/// Seed of the cell (resample, lag, family) under a global seed.
std::uint64_t cell_seed(std::uint64_t global_seed, int resample, int lag, Family family);

/// Evaluates every (resample, lag, family) cell. Cell failures are recorded,
/// not thrown. The result is independent of `parallelism` (0 = hardware).
GridResult run_grid(const LabeledDataset& dataset, const GridSpec& grid, unsigned parallelism = 0);

/// Successful cells by mean accuracy descending; ties prefer smaller lag, then
/// smaller resample.
std::vector<GridCell> best_cells(const GridResult& result);

struct CutPoint {
  int axis = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Accuracy versus resample window at a fixed lag.
std::vector<CutPoint> cut_at_lag(const GridResult& result, int lag, Family family);
/// Accuracy versus lag at a fixed resample window.
std::vector<CutPoint> cut_at_resample(const GridResult& result, int resample, Family family);

/// `mode,resample,lag,family,fold,accuracy`
void write_grid_long_csv(std::ostream& out, const GridResult& result);
/// `mode,resample,lag,family,mean,std`; failed cells have empty mean and std.
void write_grid_summary_csv(std::ostream& out, const GridResult& result);

struct PopulationStats {
  std::vector<double> bin_edges;  ///< log-spaced, shared by both histograms
  std::vector<double> active_histogram;
  std::vector<double> inactive_histogram;
  double active_median = 0.0;
  double inactive_median = 0.0;
  double overlap_coefficient = 0.0;
  stats::RankTest rank_test;
  std::size_t active_days = 0;
  std::size_t inactive_days = 0;
};

/// Positive daily counts pooled over the entries carrying `label`.
std::vector<double> nonzero_days(const LabeledDataset& dataset, ActivityLabel label);

/// Compares the positive values of two samples. Throws DomainError when a
/// sample has no positive value or bins < 1.
PopulationStats compare_samples(std::span<const double> active, std::span<const double> inactive, int bins);
PopulationStats compare_populations(const LabeledDataset& dataset, int bins);

/// JSON report with bin edges, masses, medians, overlap, U and p.
void write_population_report(std::ostream& out, const PopulationStats& stats);

}  // namespace churn
