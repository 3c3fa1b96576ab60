#include "churn/run_config.hpp"

#include "churn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

namespace churn {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  for (;;) {
    const auto p = s.find(sep);
    out.push_back(trim(s.substr(0, p)));
    if (p == std::string_view::npos) return out;
    s.remove_prefix(p + 1);
  }
}

template <typename T>
T parse_number(std::string_view text) {
  text = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("'" + std::string(text) + "' is not a valid number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw ConfigError("'" + std::string(text) + "' is not finite");
  return v;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("'" + std::string(text) + "' is not a boolean (true/false)");
}

std::string format_number(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& values, auto&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format(values[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  return join(v, [](int x) { return std::to_string(x); });
}

struct Field {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field integer(std::string_view key, T RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v) { c.*member = parse_number<T>(v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

template <typename T>
Field synth_integer(std::string_view key, T SynthConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v) { c.synth.*member = parse_number<T>(v); },
          [member](const RunConfig& c) { return std::to_string(c.synth.*member); }};
}

Field synth_real(std::string_view key, double SynthConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v) { c.synth.*member = parse_number<double>(v); },
          [member](const RunConfig& c) { return format_number(c.synth.*member); }};
}

Field int_list(std::string_view key, std::vector<int> RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v) { c.*member = parse_int_list(v); },
          [member](const RunConfig& c) { return join_ints(c.*member); }};
}

Field flag(std::string_view key, bool RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v) { c.*member = parse_bool(v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed",
       [](RunConfig& c, std::string_view v) {
         c.seed = parse_number<std::uint64_t>(v);
         c.synth.seed = *c.seed;
       },
       [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }},
      {"input", [](RunConfig& c, std::string_view v) { c.input = std::string(trim(v)); },
       [](const RunConfig& c) { return c.input; }},
      {"output_dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
       [](const RunConfig& c) { return c.output_dir; }},
      synth_integer("customers", &SynthConfig::n_customers),
      synth_real("churn_fraction", &SynthConfig::churn_fraction),
      synth_integer("horizon_days", &SynthConfig::horizon_days),
      synth_real("size_mu", &SynthConfig::size_mu),
      synth_real("size_sigma", &SynthConfig::size_sigma),
      {"weekly_profile",
       [](RunConfig& c, std::string_view v) {
         const auto parts = split(v, ',');
         if (parts.size() != 7) throw ConfigError("weekly_profile needs exactly 7 values");
         for (std::size_t i = 0; i < 7; ++i) c.synth.weekly_profile[i] = parse_number<double>(parts[i]);
       },
       [](const RunConfig& c) {
         return join(std::vector<double>(c.synth.weekly_profile.begin(), c.synth.weekly_profile.end()), format_number);
       }},
      {"annual_dip_weeks", [](RunConfig& c, std::string_view v) { c.synth.annual_dip_weeks = parse_int_list(v); },
       [](const RunConfig& c) { return join_ints(c.synth.annual_dip_weeks); }},
      synth_real("annual_dip_multiplier", &SynthConfig::annual_dip_multiplier),
      synth_integer("churn_decay_days", &SynthConfig::churn_decay_days),
      synth_real("noise_dispersion", &SynthConfig::noise_dispersion),
      synth_real("churner_volume_ratio", &SynthConfig::churner_volume_ratio),
      synth_integer("min_churn_day", &SynthConfig::min_churn_day),
      {"start_date",
       [](RunConfig& c, std::string_view v) {
         try {
           c.synth.start_date = parse_date(trim(v));
         } catch (const DomainError& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return format_date(c.synth.start_date); }},
      flag("anonymize", &RunConfig::anonymize),
      {"jitter", [](RunConfig& c, std::string_view v) { c.jitter = parse_number<double>(v); },
       [](const RunConfig& c) { return format_number(c.jitter); }},
      integer("gap_days", &RunConfig::gap_days),
      {"mode",
       [](RunConfig& c, std::string_view v) {
         try {
           c.mode = parse_feature_mode(trim(v));
         } catch (const Error& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return std::string(to_string(c.mode)); }},
      integer("window_days", &RunConfig::window_days),
      int_list("resample_range", &RunConfig::resample_range),
      int_list("lag_range", &RunConfig::lag_range),
      {"families",
       [](RunConfig& c, std::string_view v) {
         c.families.clear();
         if (trim(v) == "all") {
           c.families.assign(std::begin(kAllFamilies), std::end(kAllFamilies));
           return;
         }
         for (auto name : split(v, ',')) c.families.push_back(parse_family(name));
       },
       [](const RunConfig& c) { return join(c.families, [](Family f) { return std::string(to_string(f)); }); }},
      integer("folds", &RunConfig::folds),
      integer("parallelism", &RunConfig::parallelism),
      int_list("cut_lags", &RunConfig::cut_lags),
      int_list("cut_resamples", &RunConfig::cut_resamples),
      integer("rf_trees", &RunConfig::rf_trees),
      integer("gb_rounds", &RunConfig::gb_rounds),
      integer("mlp_epochs", &RunConfig::mlp_epochs),
      integer("svm_iterations", &RunConfig::svm_iterations),
      integer("bins", &RunConfig::bins),
      flag("self_compare", &RunConfig::self_compare),
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto item : split(text, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_number<int>(item));
      continue;
    }
    auto rest = item.substr(dots + 2);
    int stride = 1;
    if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
      stride = parse_number<int>(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const int first = parse_number<int>(item.substr(0, dots)), last = parse_number<int>(rest);
    if (stride < 1) throw ConfigError("range stride must be at least 1 in '" + std::string(item) + "'");
    if (last < first) throw ConfigError("empty range '" + std::string(item) + "'");
    const auto range = inclusive_range(first, last, stride);
    out.insert(out.end(), range.begin(), range.end());
  }
  return out;
}

const std::vector<std::string_view>& run_config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    f->set(config, value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    if (!seen.insert(std::string(key)).second) throw ConfigError(where + "key '" + std::string(key) + "' repeated");
    try {
      apply_setting(config, key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

std::string to_text(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& f : fields()) {
    if (f.key == "seed" && !config.seed) continue;
    out << f.key << " = " << f.get(config) << '\n';
  }
  return out.str();
}

void RunConfig::validate() const {
  try {
    synth.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (output_dir.empty()) fail("output_dir must not be empty");
  if (!(jitter >= 0.0)) fail("jitter must be non-negative");
  if (gap_days < 1) fail("gap_days must be at least 1");
  if (window_days < 1) fail("window_days must be at least 1");
  if (folds < 2) fail("folds must be at least 2");
  if (bins < 1) fail("bins must be at least 1");
  if (families.empty()) fail("families must not be empty");
  if (resample_range.empty()) fail("resample_range must not be empty");
  if (lag_range.empty()) fail("lag_range must not be empty");
  for (int r : resample_range)
    if (r < 1) fail("resample_range values must be at least 1");
  for (int n : lag_range)
    if (n < 0) fail("lag_range values must be non-negative");
  if (rf_trees < 1 || gb_rounds < 1 || mlp_epochs < 1 || svm_iterations < 1)
    fail("rf_trees, gb_rounds, mlp_epochs and svm_iterations must be at least 1");
}

GridSpec grid_spec(const RunConfig& config) {
  if (!config.seed) throw ConfigError("grid requires a global seed (seed = <integer>)");
  GridSpec grid;
  grid.resample_range = config.resample_range;
  grid.lag_range = config.lag_range;
  grid.folds = config.folds;
  grid.seed = *config.seed;
  grid.mode = config.mode;
  grid.window_days = config.window_days;
  grid.families.clear();
  for (Family f : config.families) {
    auto spec = ClassifierSpec::defaults(f);
    if (auto* p = std::get_if<ForestParams>(&spec.hyperparameters)) p->trees = config.rf_trees;
    if (auto* p = std::get_if<BoostingParams>(&spec.hyperparameters)) p->rounds = config.gb_rounds;
    if (auto* p = std::get_if<MlpParams>(&spec.hyperparameters)) p->epochs = config.mlp_epochs;
    if (auto* p = std::get_if<SvmParams>(&spec.hyperparameters)) p->iterations = config.svm_iterations;
    grid.families.push_back(spec);
  }
  return grid;
}

}  // namespace churn
