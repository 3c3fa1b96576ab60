#pragma once

// Experiment files are plain text, one `key = value` per line. Lines whose
// first non-blank character is `#` are comments. Integer lists accept
// `1,2,5`, `1..30` and `0..365:5` (inclusive, with a stride), and mixtures
// such as `1..5,10,20..30:5`.

#include "churn/dataset.hpp"
#include "churn/eval.hpp"
#include "churn/features.hpp"
#include "churn/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace churn {

struct RunConfig {
  std::optional<std::uint64_t> seed;
  /// Dataset CSV; when empty, `grid` and `stats` synthesize from `synth`.
  std::string input;
  std::string output_dir = "churn-out";

  SynthConfig synth;
  bool anonymize = false;
  double jitter = 0.001;

  int gap_days = 30;

  FeatureMode mode = FeatureMode::downsample;
  int window_days = 540;
  std::vector<int> resample_range = inclusive_range(1, 30);
  std::vector<int> lag_range = inclusive_range(0, 365, 5);
  std::vector<Family> families{Family::random_forest};
  int folds = 5;
  /// 0 means all hardware threads.
  unsigned parallelism = 0;
  std::vector<int> cut_lags{0};
  std::vector<int> cut_resamples{17};

  int rf_trees = 300;
  int gb_rounds = 100;
  int mlp_epochs = 200;
  int svm_iterations = 500;

  int bins = 40;
  bool self_compare = false;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Every accepted key, in echo order.
const std::vector<std::string_view>& run_config_keys();

/// Sets one key from its text form; throws ConfigError for unknown keys or
/// bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Throws ConfigError (with the line number) on syntax errors, unknown or
/// repeated keys and bad values.
RunConfig parse_run_config(std::istream& in);

/// Fully resolved echo; parse_run_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

/// Integer list syntax described above.
std::vector<int> parse_int_list(std::string_view text);

/// Classifier specs for the configured families and budgets. Requires a seed.
GridSpec grid_spec(const RunConfig& config);

}  // namespace churn
