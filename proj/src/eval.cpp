#include "churn/eval.hpp"

#include "churn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

namespace churn {

std::vector<Fold> stratified_kfold(const Eigen::VectorXi& labels, int k, std::uint64_t seed) {
  if (k < 2) throw StratificationError("need at least 2 folds, got " + std::to_string(k));
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k))
    throw StratificationError("each class needs at least " + std::to_string(k) + " members (have " +
                              std::to_string(pos.size()) + " active, " + std::to_string(neg.size()) + " inactive)");
  Rng rng(seed);
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (const auto* cls : {&pos, &neg})
    for (auto i : *cls) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Eigen::VectorXi FoldModel::predict(const Eigen::MatrixXd& rows) const {
  return standardizer ? model.predict(standardizer->apply(rows)) : model.predict(rows);
}

FoldModel fit_fold(const FeatureMatrix& matrix, const Fold& train, const ClassifierSpec& spec) {
  const FeatureMatrix subset = select_rows(matrix, train);
  if (!needs_standardization(spec.family)) return FoldModel{std::nullopt, fit(spec, subset.rows, subset.labels)};
  auto standardizer = fit_standardizer(subset.rows);
  auto model = fit(spec, standardizer.apply(subset.rows), subset.labels);
  return FoldModel{std::move(standardizer), std::move(model)};
}

std::vector<double> cross_validate(const FeatureMatrix& matrix, const ClassifierSpec& spec, int k,
                                   std::uint64_t seed) {
  const auto folds = stratified_kfold(matrix.labels, k, seed);
  std::vector<double> accuracies;
  accuracies.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    Fold train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    const auto fold_model = fit_fold(matrix, train, spec);
    const FeatureMatrix test = select_rows(matrix, folds[f]);
    accuracies.push_back(accuracy(fold_model.predict(test.rows), test.labels));
  }
  return accuracies;
}

namespace {

std::string cell_name(const FeatureConfig& config, Family family) {
  const int r = config.mode == FeatureMode::downsample ? config.resample_days : config.ma_window;
  return "cell (" + std::string(to_string(config.mode)) + ", resample " + std::to_string(r) + ", lag " +
         std::to_string(config.lag_days) + ", " + std::string(to_string(family)) + "): ";
}

}  // namespace

std::vector<double> evaluate_cell(const LabeledDataset& dataset, const FeatureConfig& config,
                                  const ClassifierSpec& spec, int k, std::uint64_t seed) {
  try {
    return cross_validate(build_matrix(dataset, config), spec, k, seed);
  } catch (const Error& e) {
    throw Error(cell_name(config, spec.family) + e.what());
  }
}

std::vector<int> inclusive_range(int first, int last, int stride) {
  if (stride < 1) throw ConfigError("range stride must be at least 1");
  std::vector<int> out;
  for (int v = first; v <= last; v += stride) out.push_back(v);
  return out;
}

void GridSpec::validate() const {
  if (resample_range.empty()) throw ConfigError("grid: resample range is empty");
  if (lag_range.empty()) throw ConfigError("grid: lag range is empty");
  if (families.empty()) throw ConfigError("grid: no classifier families");
  if (folds < 2) throw ConfigError("grid: folds must be at least 2");
  if (window_days < 1) throw ConfigError("grid: window_days must be positive");
  for (int r : resample_range)
    if (r < 1) throw ConfigError("grid: resample values must be at least 1");
  for (int n : lag_range)
    if (n < 0) throw ConfigError("grid: lags must be non-negative");
  for (const auto& spec : families) spec.validate();
}

std::size_t GridResult::failed() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const GridCell& c) { return !c.ok(); }));
}

bool GridResult::operator==(const GridResult& other) const {
  if (cells.size() != other.cells.size()) return false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto &a = cells[i], &b = other.cells[i];
    if (a.mode != b.mode || a.resample != b.resample || a.lag != b.lag || a.family != b.family ||
        a.fold_accuracies != b.fold_accuracies || a.error != b.error)
      return false;
    if (a.ok() && (a.mean != b.mean || a.stddev != b.stddev)) return false;
  }
  return true;
}

std::uint64_t cell_seed(std::uint64_t global_seed, int resample, int lag, Family family) {
  return derive_seed(global_seed, {static_cast<std::uint64_t>(resample), static_cast<std::uint64_t>(lag),
                                   static_cast<std::uint64_t>(family)});
}

GridResult run_grid(const LabeledDataset& dataset, const GridSpec& grid, unsigned parallelism) {
  grid.validate();
  const auto active = dataset.count(ActivityLabel::Active);
  const auto inactive = dataset.count(ActivityLabel::Inactive);
  if (std::min(active, inactive) < static_cast<std::size_t>(grid.folds))
    throw StratificationError("grid: " + std::to_string(grid.folds) + " folds need at least that many customers in each class");

  const std::size_t n_lags = grid.lag_range.size(), n_fam = grid.families.size();
  const std::size_t groups = grid.resample_range.size() * n_lags;
  GridResult result;
  result.cells.resize(groups * n_fam);

  // One task per (resample, lag): the feature matrix is shared by the families.
  const auto run_group = [&](std::size_t g) {
    const int r = grid.resample_range[g / n_lags];
    const int n = grid.lag_range[g % n_lags];
    FeatureConfig config;
    config.window_days = grid.window_days;
    config.mode = grid.mode;
    config.lag_days = n;
    if (grid.mode == FeatureMode::downsample) config.resample_days = r;
    else config.ma_window = r;

    std::optional<FeatureMatrix> matrix;
    std::string matrix_error;
    try {
      matrix = build_matrix(dataset, config);
    } catch (const std::exception& e) {
      matrix_error = e.what();
    }
    for (std::size_t j = 0; j < n_fam; ++j) {
      GridCell& cell = result.cells[g * n_fam + j];
      const auto& base = grid.families[j];
      cell.mode = grid.mode;
      cell.resample = r;
      cell.lag = n;
      cell.family = base.family;
      if (!matrix) {
        cell.error = cell_name(config, base.family) + matrix_error;
        continue;
      }
      const auto seed = cell_seed(grid.seed, r, n, base.family);
      ClassifierSpec spec = base;
      spec.seed = derive_seed(seed, {base.seed});
      try {
        cell.fold_accuracies = cross_validate(*matrix, spec, grid.folds, seed);
        cell.mean = stats::mean(cell.fold_accuracies);
        cell.stddev = stats::stddev(cell.fold_accuracies);
      } catch (const std::exception& e) {
        cell.fold_accuracies.clear();
        cell.error = cell_name(config, base.family) + e.what();
      }
    }
  };

  unsigned workers = parallelism ? parallelism : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, groups));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t g = next++; g < groups; g = next++) run_group(g);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return result;
}

std::vector<GridCell> best_cells(const GridResult& result) {
  std::vector<GridCell> out;
  for (const auto& c : result.cells)
    if (c.ok()) out.push_back(c);
  std::stable_sort(out.begin(), out.end(), [](const GridCell& a, const GridCell& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    if (a.lag != b.lag) return a.lag < b.lag;
    return a.resample < b.resample;
  });
  return out;
}

std::vector<CutPoint> cut_at_lag(const GridResult& result, int lag, Family family) {
  std::vector<CutPoint> out;
  for (const auto& c : result.cells)
    if (c.ok() && c.lag == lag && c.family == family) out.push_back({c.resample, c.mean, c.stddev});
  std::stable_sort(out.begin(), out.end(), [](const CutPoint& a, const CutPoint& b) { return a.axis < b.axis; });
  return out;
}

std::vector<CutPoint> cut_at_resample(const GridResult& result, int resample, Family family) {
  std::vector<CutPoint> out;
  for (const auto& c : result.cells)
    if (c.ok() && c.resample == resample && c.family == family) out.push_back({c.lag, c.mean, c.stddev});
  std::stable_sort(out.begin(), out.end(), [](const CutPoint& a, const CutPoint& b) { return a.axis < b.axis; });
  return out;
}

namespace {

std::string shortest(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void write_grid_long_csv(std::ostream& out, const GridResult& result) {
  out << "mode,resample,lag,family,fold,accuracy\n";
  for (const auto& c : result.cells)
    for (std::size_t f = 0; f < c.fold_accuracies.size(); ++f)
      out << to_string(c.mode) << ',' << c.resample << ',' << c.lag << ',' << to_string(c.family) << ',' << f << ','
          << shortest(c.fold_accuracies[f]) << '\n';
}

void write_grid_summary_csv(std::ostream& out, const GridResult& result) {
  out << "mode,resample,lag,family,mean,std\n";
  for (const auto& c : result.cells) {
    out << to_string(c.mode) << ',' << c.resample << ',' << c.lag << ',' << to_string(c.family) << ',';
    if (c.ok()) out << shortest(c.mean) << ',' << shortest(c.stddev);
    else out << ',';
    out << '\n';
  }
}

std::vector<double> nonzero_days(const LabeledDataset& dataset, ActivityLabel label) {
  std::vector<double> out;
  for (const auto& e : dataset.entries) {
    if (e.label != label) continue;
    for (Eigen::Index i = 0; i < e.counts.size(); ++i)
      if (e.counts[i] > 0.0) out.push_back(e.counts[i]);
  }
  return out;
}

PopulationStats compare_samples(std::span<const double> active, std::span<const double> inactive, int bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  std::vector<double> a, b;
  for (double v : active)
    if (v > 0.0) a.push_back(v);
  for (double v : inactive)
    if (v > 0.0) b.push_back(v);
  if (a.empty()) throw DomainError("active population has no nonzero days");
  if (b.empty()) throw DomainError("inactive population has no nonzero days");

  const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  if (!(hi > lo)) hi = 2.0 * lo;
  const double log_lo = std::log(lo), step = (std::log(hi) - log_lo) / bins;

  PopulationStats out;
  out.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) out.bin_edges[static_cast<std::size_t>(i)] = std::exp(log_lo + step * i);
  out.bin_edges.front() = lo;
  out.bin_edges.back() = hi;
  const auto histogram = [&](const std::vector<double>& values) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
      const auto k = std::clamp(static_cast<long>(std::floor((std::log(v) - log_lo) / step)), 0L, long{bins} - 1);
      h[static_cast<std::size_t>(k)] += 1.0;
    }
    for (auto& m : h) m /= static_cast<double>(values.size());
    return h;
  };
  out.active_histogram = histogram(a);
  out.inactive_histogram = histogram(b);
  for (std::size_t k = 0; k < out.active_histogram.size(); ++k)
    out.overlap_coefficient += std::min(out.active_histogram[k], out.inactive_histogram[k]);
  out.active_median = stats::median(a);
  out.inactive_median = stats::median(b);
  out.rank_test = stats::mann_whitney_u(a, b);
  out.active_days = a.size();
  out.inactive_days = b.size();
  return out;
}

PopulationStats compare_populations(const LabeledDataset& dataset, int bins) {
  const auto active = nonzero_days(dataset, ActivityLabel::Active);
  const auto inactive = nonzero_days(dataset, ActivityLabel::Inactive);
  return compare_samples(active, inactive, bins);
}

void write_population_report(std::ostream& out, const PopulationStats& s) {
  nlohmann::ordered_json j;
  j["bin_edges"] = s.bin_edges;
  j["active_mass"] = s.active_histogram;
  j["inactive_mass"] = s.inactive_histogram;
  j["active_median"] = s.active_median;
  j["inactive_median"] = s.inactive_median;
  j["overlap_coefficient"] = s.overlap_coefficient;
  j["mann_whitney"] = {{"u", s.rank_test.u}, {"z", s.rank_test.z}, {"p_value", s.rank_test.p_value}};
  j["active_days"] = s.active_days;
  j["inactive_days"] = s.inactive_days;
  out << j.dump(2) << '\n';
}

}  // namespace churn
