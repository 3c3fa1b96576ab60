// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include "churn/dataset.hpp"
#include "churn/eval.hpp"
#include "churn/features.hpp"
#include "churn/labeling.hpp"
#include "churn/models.hpp"
#include "churn/random.hpp"
#include "churn/stats.hpp"
#include "support.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

using namespace churn;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

// ---- 1 -------------------------------------------------------------------

void resampling_oracle(Verdict& v) {
  Rng rng(101);
  long mismatches = 0, mass_errors = 0, checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int length = test::uniform_int(rng, 1, 600);
    const auto x = test::random_counts(rng, length, 50);
    for (int block = 1; block <= 30; ++block) {
      const auto r = resample(x, block);
      // Right-aligned enumeration: blocks end at the last element and walk back.
      std::vector<double> expected;
      for (int end = length; end - block >= 0; end -= block) {
        double s = 0;
        for (int i = end - block; i < end; ++i) s += x[i];
        expected.push_back(s);
      }
      std::reverse(expected.begin(), expected.end());
      ++checks;
      if (r.size() != static_cast<Eigen::Index>(expected.size()) ||
          !std::equal(expected.begin(), expected.end(), r.data()))
        ++mismatches;
      double tail = 0;
      for (int i = length - static_cast<int>(expected.size()) * block; i < length; ++i) tail += x[i];
      if (r.sum() != tail) ++mass_errors;
    }
  }
  v.require(mismatches == 0, "block sums match the enumeration");
  v.require(mass_errors == 0, "mass conserved");
  v.detail << checks << " (sequence, window) pairs, " << mismatches << " mismatches, " << mass_errors
           << " mass errors";
}

// ---- 2 -------------------------------------------------------------------

double nb_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Eigen::RowVectorXd& q, double floor) {
  double log_joint[2];
  for (int c = 0; c < 2; ++c) {
    const int label = c == 0 ? 1 : -1;
    double n = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) n += y[i] == label;
    double lj = std::log(n / static_cast<double>(y.size()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double mu = 0, var = 0;
      for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] == label) mu += x(i, j);
      mu /= n;
      for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] == label) var += (x(i, j) - mu) * (x(i, j) - mu);
      var = std::max(var / n, floor);
      lj += -0.5 * std::log(2 * std::numbers::pi * var) - (q[j] - mu) * (q[j] - mu) / (2 * var);
    }
    log_joint[c] = lj;
  }
  return 1.0 / (1.0 + std::exp(log_joint[1] - log_joint[0]));
}

void classifier_oracles(Verdict& v) {
  Rng rng(202);
  double nb_worst = 0;
  int instances = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Index n = test::uniform_int(rng, 2, 20), d = test::uniform_int(rng, 1, 4);
    const Eigen::MatrixXd x = test::random_matrix(rng, n, d, 3.0);
    const auto y = test::random_labels(rng, n);
    const auto nb = GaussianNaiveBayes::fit(x, y, {});
    const Eigen::MatrixXd q = test::random_matrix(rng, 4, d, 3.0);
    const auto post = nb.posterior_active(q);
    for (Eigen::Index i = 0; i < q.rows(); ++i)
      nb_worst = std::max(nb_worst, std::abs(post[i] - nb_posterior(x, y, q.row(i), 1e-9)));
    ++instances;
  }
  v.require(nb_worst <= 1e-9, "NB posterior within 1e-9");

  double mlp_worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index inputs = test::uniform_int(rng, 1, 5);
    const auto mlp = Mlp::initialize(inputs, test::uniform_int(rng, 1, 8), rng);
    const Eigen::MatrixXd x = test::random_matrix(rng, 16, inputs);
    const auto y = test::random_labels(rng, 16);
    const Eigen::VectorXd grad = mlp.loss_and_gradient(x, y).second;
    const Eigen::VectorXd theta = mlp.parameters();
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Mlp plus = mlp, minus = mlp;
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      plus.set_parameters(tp);
      minus.set_parameters(tm);
      const double numeric = (plus.loss(x, y) - minus.loss(x, y)) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(grad[k]), 1e-7});
      mlp_worst = std::max(mlp_worst, std::abs(numeric - grad[k]) / scale);
    }
  }
  v.require(mlp_worst <= 1e-4, "MLP gradient relative error <= 1e-4");

  const auto xor4 = test::xor4();
  const double rf_xor =
      accuracy(fit(ClassifierSpec::defaults(Family::random_forest, 1), xor4.x, xor4.y).predict(xor4.x), xor4.y);
  const double svm_xor = accuracy(fit(ClassifierSpec::defaults(Family::svm), xor4.x, xor4.y).predict(xor4.x), xor4.y);
  v.require(rf_xor == 1.0, "RF fits XOR");
  v.require(svm_xor <= 0.75, "linear SVM <= 0.75 on XOR");

  const auto train = test::make_blobs(500, 2, 4.0, 21);
  const auto held = test::make_blobs(500, 2, 4.0, 22);
  v.detail << "NB worst " << nb_worst << " over " << instances << " instances; MLP worst rel " << mlp_worst
           << "; XOR rf " << rf_xor << " svm " << svm_xor << "; held-out";
  for (auto f : kAllFamilies) {
    const auto model = fit(ClassifierSpec::defaults(f, 5), train.x, train.y);
    const double acc = accuracy(model.predict(held.x), held.y);
    v.require(acc >= 0.95, std::string(to_string(f)) + " held-out >= 0.95");
    v.detail << ' ' << to_string(f) << '=' << fixed(acc, 3);
  }
}

// ---- 3 -------------------------------------------------------------------

FeatureMatrix as_matrix(const test::Blobs& b) {
  FeatureMatrix m;
  m.rows = b.x;
  m.labels = b.y;
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) m.customer_ids.push_back("p" + std::to_string(i));
  return m;
}

void oob_consistency(Verdict& v) {
  const auto blobs = test::make_blobs(2000, 2, 2.0, 31);
  const auto spec = ClassifierSpec::defaults(Family::random_forest, 7);
  const double oob = *fit(spec, blobs.x, blobs.y).oob_error();
  const auto folds = cross_validate(as_matrix(blobs), spec, 5, 8);
  const double cv_error = 1.0 - stats::mean(folds);
  v.require(std::abs(oob - cv_error) <= 0.05, "|OOB - CV error| <= 0.05");
  v.detail << "OOB " << fixed(oob) << ", 5-fold CV error " << fixed(cv_error);
}

// ---- 4 -------------------------------------------------------------------

void null_signal(Verdict& v) {
  SynthConfig sc;
  sc.n_customers = 1000;
  sc.seed = 41;
  const auto labeled = align_and_label(generate_synthetic(sc).data, 30);
  FeatureConfig fc;
  fc.resample_days = 17;
  auto m = build_matrix(labeled, fc);
  Rng rng(42);
  std::vector<int> y(m.labels.data(), m.labels.data() + m.labels.size());
  shuffle_in_place(y, rng);
  m.labels = Eigen::Map<Eigen::VectorXi>(y.data(), static_cast<Eigen::Index>(y.size()));
  v.detail << m.size() << " customers, shuffled labels:";
  for (auto f : kAllFamilies) {
    const double acc = stats::mean(cross_validate(m, ClassifierSpec::defaults(f, 43), 5, 44));
    v.require(std::abs(acc - 0.5) <= 0.07, std::string(to_string(f)) + " in 0.5 +/- 0.07");
    v.detail << ' ' << to_string(f) << '=' << fixed(acc, 3);
  }
}

// ---- 5 -------------------------------------------------------------------

SynthConfig planted(double mu, double sigma, double ratio, std::uint64_t seed) {
  SynthConfig c;
  c.n_customers = 2000;
  c.horizon_days = 1460;
  c.churn_decay_days = 120;
  c.min_churn_day = 1000;
  c.size_mu = mu;
  c.size_sigma = sigma;
  c.noise_dispersion = 4.0;
  c.churner_volume_ratio = ratio;
  c.seed = seed;
  return c;
}

double cell_mean(const GridResult& g, int resample, int lag) {
  for (const auto& c : g.cells)
    if (c.resample == resample && c.lag == lag) return c.ok() ? c.mean : std::nan("");
  return std::nan("");
}

void planted_grid_shape(Verdict& v) {
  const std::vector<int> resamples{1, 2, 5, 10, 17, 25, 30}, lags{0, 90, 180, 365};
  GridSpec grid;
  grid.resample_range = resamples;
  grid.lag_range = lags;

  // Volume decay before churn only (no base-rate difference): the n = 0 cut.
  std::vector<double> avg0(resamples.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    grid.seed = seed;
    const auto g = run_grid(align_and_label(generate_synthetic(planted(2.5, 0.8, 0.8, seed)).data, 30), grid);
    v.require(g.failed() == 0, "no failed cells");
    std::size_t best = 0;
    for (std::size_t i = 0; i < resamples.size(); ++i) {
      const double a = cell_mean(g, resamples[i], 0);
      avg0[i] += a / 5.0;
      if (a > cell_mean(g, resamples[best], 0)) best = i;
    }
    const double gain = cell_mean(g, resamples[best], 0) - cell_mean(g, 1, 0);
    v.require(resamples[best] >= 5 && resamples[best] <= 30, "seed " + std::to_string(seed) + " peak in [5, 30]");
    v.require(gain >= 0.02, "seed " + std::to_string(seed) + " peak beats daily by >= 0.02");
    v.detail << "seed " << seed << ": peak " << resamples[best] << " +" << fixed(gain, 3) << "; ";
  }
  v.detail << "mean n=0 cut";
  for (std::size_t i = 0; i < resamples.size(); ++i) v.detail << ' ' << resamples[i] << ':' << fixed(avg0[i], 3);

  // Base-rate signal over the whole history: lag tolerance.
  double worst_gap = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    grid.seed = seed;
    const auto g = run_grid(align_and_label(generate_synthetic(planted(3.0, 0.4, 0.2, seed)).data, 30), grid);
    v.require(g.failed() == 0, "no failed cells");
    double at0 = 0, at365 = 0;
    for (int r : resamples) {
      at0 += cell_mean(g, r, 0) / static_cast<double>(resamples.size());
      at365 += cell_mean(g, r, 365) / static_cast<double>(resamples.size());
    }
    worst_gap = std::max(worst_gap, std::abs(at0 - at365));
    v.require(std::abs(at0 - at365) <= 0.10, "seed " + std::to_string(seed) + " n=365 within 0.10 of n=0");
    v.detail << (seed == 1 ? "; base-rate data" : "") << " seed " << seed << ": n=0 " << fixed(at0, 3) << " n=365 "
             << fixed(at365, 3);
  }
  v.detail << "; worst |n=0 - n=365| " << fixed(worst_gap, 3);
}

// ---- 6 -------------------------------------------------------------------

double mean_adjacent_correlation(const Eigen::MatrixXd& rows) {
  double total = 0;
  for (Eigen::Index j = 0; j + 1 < rows.cols(); ++j) {
    const Eigen::VectorXd a = rows.col(j), b = rows.col(j + 1);
    total += stats::pearson({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())});
  }
  return total / static_cast<double>(rows.cols() - 1);
}

void moving_average_mechanism(Verdict& v) {
  constexpr int kReplicates = 20, kSeries = 200, kWindow = 540;
  Rng rng(61);
  std::poisson_distribution<int> noise(5.0);
  for (int L : {7, 14, 30}) {
    FeatureConfig ma, ds;
    ma.mode = FeatureMode::moving_average;
    ma.ma_window = L;
    ds.resample_days = L;
    int wins = 0;
    double ma_sum = 0, ds_sum = 0;
    for (int rep = 0; rep < kReplicates; ++rep) {
      Eigen::MatrixXd ma_rows(kSeries, ma.width()), ds_rows(kSeries, ds.width());
      for (int s = 0; s < kSeries; ++s) {
        Eigen::VectorXd x(kWindow);
        for (auto& value : x) value = noise(rng);
        ma_rows.row(s) = feature_row(x, ma).transpose();
        ds_rows.row(s) = feature_row(x, ds).transpose();
      }
      const double cm = mean_adjacent_correlation(ma_rows), cd = mean_adjacent_correlation(ds_rows);
      wins += cm > cd;
      ma_sum += cm;
      ds_sum += cd;
    }
    const double p = stats::sign_test_p_value(wins, kReplicates);
    v.require(p < 0.01, "L=" + std::to_string(L) + " sign test p < 0.01");
    v.detail << "L=" << L << ": MA " << fixed(ma_sum / kReplicates, 3) << " vs DS " << fixed(ds_sum / kReplicates, 3)
             << ", " << wins << '/' << kReplicates << " p=" << p << "; ";
  }
}

// ---- 7 -------------------------------------------------------------------

void labeling_recovery(Verdict& v) {
  SynthConfig c;
  c.n_customers = 2000;
  c.size_mu = 3.0;
  c.size_sigma = 0.5;
  c.seed = 71;
  const auto synth = generate_synthetic(c);
  const auto& raw = synth.data;
  int correct = 0, total = 0;
  for (const auto& s : raw.series) {
    const auto label = classify_activity(s, raw.observation_end, 30);
    const auto& churn = synth.churn_dates.at(s.customer_id);
    if (churn) v.require(raw.observation_end - *churn >= std::chrono::days{30}, "churn >= 30 days before end");
    correct += (label == (churn ? ActivityLabel::Inactive : ActivityLabel::Active));
    ++total;
  }
  v.require(correct == total, "100% ground-truth recovery");
  const auto labeled = align_and_label(raw, 30);
  std::set<std::string> seen;
  for (const auto& e : labeled.entries) seen.insert(e.customer_id);
  for (const auto& id : labeled.excluded_ids) seen.insert(id);
  v.require(seen.size() == raw.series.size() &&
                labeled.entries.size() + labeled.excluded_ids.size() == raw.series.size(),
            "exact partition");
  const auto again = align_and_label(to_raw(labeled), 30);
  v.require(again.entries == labeled.entries && again.excluded_ids.empty(), "idempotent");
  v.detail << correct << '/' << total << " recovered; active " << labeled.count(ActivityLabel::Active) << " inactive "
           << labeled.count(ActivityLabel::Inactive) << " excluded " << labeled.excluded_ids.size();
}

// ---- 8 -------------------------------------------------------------------

void population_statistics(Verdict& v) {
  SynthConfig c;
  c.n_customers = 1000;
  c.seed = 81;
  const auto same = align_and_label(generate_synthetic(c).data, 30);
  const auto active = nonzero_days(same, ActivityLabel::Active);
  const auto self = compare_samples(active, active, 40);
  v.require(std::abs(self.overlap_coefficient - 1.0) <= 1e-9, "self overlap 1 +/- 1e-9");
  v.require(self.rank_test.p_value > 0.05, "self p > 0.05");

  c.churner_volume_ratio = 0.5;
  const auto planted = compare_populations(align_and_label(generate_synthetic(c).data, 30), 40);
  v.require(planted.active_median >= planted.inactive_median, "active median >= inactive median");
  v.require(planted.overlap_coefficient > 0.5, "overlap > 0.5");
  v.detail << "self overlap " << self.overlap_coefficient << " p " << self.rank_test.p_value << "; planted medians "
           << planted.active_median << " vs " << planted.inactive_median << ", overlap "
           << fixed(planted.overlap_coefficient, 3) << ", p " << planted.rank_test.p_value;
}

// ---- 9 -------------------------------------------------------------------

int run(const std::string& args) {
  const int raw = std::system((std::string("\"") + CHURN_CLI_PATH + "\" " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void end_to_end_determinism(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / ("churn_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const std::string d = dir.string();
  v.require(run("synth --seed 91 --customers 300 --horizon-days 800 --output-dir " + d + "/synth") == 0, "synth");
  v.require(run("label --input " + d + "/synth/dataset.csv --output-dir " + d + "/label") == 0, "label");
  const unsigned max_threads = std::max(4u, std::thread::hardware_concurrency());
  const std::string grid = "grid --seed 91 --input " + d +
                           "/synth/dataset.csv --resample-range 1,5,17 --lag-range 0,90 --families all"
                           " --rf-trees 50 --gb-rounds 30 --mlp-epochs 30 --svm-iterations 200 --output-dir ";
  v.require(run(grid + d + "/g1 --parallelism 1") == 0, "grid run 1");
  v.require(run(grid + d + "/g2 --parallelism 1") == 0, "grid run 2");
  v.require(run(grid + d + "/gmax --parallelism " + std::to_string(max_threads)) == 0, "grid run max");
  const auto a = slurp(dir / "g1/grid_summary.csv");
  v.require(!a.empty(), "summary written");
  v.require(a == slurp(dir / "g2/grid_summary.csv"), "identical across runs");
  v.require(a == slurp(dir / "gmax/grid_summary.csv"), "identical across parallelism 1 and " +
                                                           std::to_string(max_threads));
  v.require(slurp(dir / "g1/grid_long.csv") == slurp(dir / "gmax/grid_long.csv"), "long CSV identical");
  v.detail << "summary " << a.size() << " bytes, identical across two runs and parallelism 1 vs " << max_threads;
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"resampling oracle", resampling_oracle},
      {"classifier oracles", classifier_oracles},
      {"OOB consistency", oob_consistency},
      {"null-signal sanity", null_signal},
      {"planted-signal grid shape", planted_grid_shape},
      {"moving-average correlation", moving_average_mechanism},
      {"labeling ground truth", labeling_recovery},
      {"population statistics", population_statistics},
      {"end-to-end determinism", end_to_end_determinism},
  };
  // Runtime ceilings in seconds; 0 means none stated.
  const double limits[] = {10, 120, 0, 0, 1800, 0, 0, 0, 0};

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[i] > 0 && seconds >= limits[i]) v.require(false, "runtime < " + fixed(limits[i], 0) + " s");
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first
              << "): " << v.detail.str() << " [" << fixed(seconds, 1) << " s]" << std::endl;
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
