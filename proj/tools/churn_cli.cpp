#include "churn/dataset.hpp"
#include "churn/error.hpp"
#include "churn/eval.hpp"
#include "churn/labeling.hpp"
#include "churn/plot.hpp"
#include "churn/random.hpp"
#include "churn/run_config.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace fs = std::filesystem;
using namespace churn;

namespace {

// Exit codes.
constexpr int kOk = 0, kRuntime = 1, kUsage = 2;

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

std::string flag_name(std::string_view key) {
  std::string s(key);
  for (auto& c : s)
    if (c == '_') c = '-';
  return "--" + s;
}

Command& add_command(CLI::App& app, std::vector<std::unique_ptr<Command>>& commands, const std::string& name,
                     const std::string& description) {
  auto& cmd = *commands.emplace_back(std::make_unique<Command>());
  cmd.app = app.add_subcommand(name, description);
  cmd.app->add_option("-c,--config", cmd.config_path, "Experiment file (key = value lines)");
  for (auto key : run_config_keys()) {
    const std::string k(key);
    cmd.options[k] = cmd.app->add_option(flag_name(key), cmd.values[k], "Overrides config key " + k);
  }
  return cmd;
}

RunConfig resolve(const Command& cmd) {
  RunConfig config;
  if (!cmd.config_path.empty()) {
    std::ifstream in(cmd.config_path);
    if (!in) throw ConfigError("cannot open config file '" + cmd.config_path + "'");
    config = parse_run_config(in);
  }
  // Apply in key order so that `seed` is set before anything else reads it.
  for (auto key : run_config_keys()) {
    const std::string k(key);
    if (cmd.options.at(k)->count() > 0) apply_setting(config, k, cmd.values.at(k));
  }
  config.validate();
  return config;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

fs::path prepare_output(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_file(dir / "resolved_config.txt", to_text(config));
  return dir;
}

RawDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file '" + path + "'");
  try {
    auto data = parse_long_csv(in);
    validate(data);
    return data;
  } catch (const ParseError& e) {
    throw Error(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

RawDataset require_input(const RunConfig& config) {
  if (config.input.empty()) throw ConfigError("this command needs an input dataset (--input)");
  return read_dataset(config.input);
}

RawDataset input_or_synthetic(const RunConfig& config) {
  return config.input.empty() ? generate_synthetic(config.synth).data : read_dataset(config.input);
}

int run_synth(const RunConfig& config) {
  auto synth = generate_synthetic(config.synth);
  if (config.anonymize) {
    for (std::size_t i = 0; i < synth.data.series.size(); ++i) {
      auto& s = synth.data.series[i];
      if (s.counts.maxCoeff() > 0.0) s = anonymize(s, config.jitter, derive_seed(config.synth.seed, {i}));
    }
  }
  const auto dir = prepare_output(config);
  write_with(dir / "dataset.csv", [&](std::ostream& o) { write_long_csv(o, synth.data); });
  write_with(dir / "ground_truth.csv", [&](std::ostream& o) { write_ground_truth_csv(o, synth); });
  std::cout << "customers=" << synth.data.series.size() << " days=" << config.synth.horizon_days
            << " output=" << dir.string() << '\n';
  return kOk;
}

int run_ingest_validate(const RunConfig& config) {
  const auto data = require_input(config);
  std::size_t days = 0;
  for (const auto& s : data.series) days += static_cast<std::size_t>(s.counts.size());
  std::cout << "customers=" << data.series.size() << " days=" << days;
  if (!data.series.empty()) std::cout << " observation_end=" << format_date(data.observation_end);
  std::cout << '\n';
  return kOk;
}

int run_label(const RunConfig& config) {
  const auto labeled = align_and_label(require_input(config), config.gap_days);
  const auto dir = prepare_output(config);
  write_with(dir / "labels.csv", [&](std::ostream& o) { write_labels_csv(o, labeled); });
  std::cout << "active=" << labeled.count(ActivityLabel::Active)
            << " inactive=" << labeled.count(ActivityLabel::Inactive) << " excluded=" << labeled.excluded_ids.size()
            << '\n';
  return kOk;
}

int run_grid_command(const RunConfig& config) {
  const auto grid = grid_spec(config);
  const auto labeled = align_and_label(input_or_synthetic(config), config.gap_days);
  const auto result = run_grid(labeled, grid, config.parallelism);

  const auto dir = prepare_output(config);
  write_with(dir / "grid_long.csv", [&](std::ostream& o) { write_grid_long_csv(o, result); });
  write_with(dir / "grid_summary.csv", [&](std::ostream& o) { write_grid_summary_csv(o, result); });
  std::set<Family> families(config.families.begin(), config.families.end());
  for (Family f : families) {
    const std::string name(to_string(f));
    write_file(dir / ("heatmap_" + name + ".svg"), plot::heatmap_svg(result, f));
    for (int n : config.cut_lags)
      write_file(dir / ("cut_lag_" + std::to_string(n) + "_" + name + ".svg"),
                 plot::cut_svg(cut_at_lag(result, n, f), name + ", lag " + std::to_string(n), "resample (days)"));
    for (int r : config.cut_resamples)
      write_file(dir / ("cut_resample_" + std::to_string(r) + "_" + name + ".svg"),
                 plot::cut_svg(cut_at_resample(result, r, f), name + ", resample " + std::to_string(r),
                               "lag (days)"));
  }

  std::cout << "cells=" << result.cells.size() << " failed=" << result.failed() << '\n';
  const auto ranked = best_cells(result);
  if (ranked.empty()) {
    std::cerr << "error: every grid cell failed";
    if (!result.cells.empty() && result.cells.front().error) std::cerr << "; first: " << *result.cells.front().error;
    std::cerr << '\n';
    return kRuntime;
  }
  const auto& best = ranked.front();
  std::cout << "best family=" << to_string(best.family) << " resample=" << best.resample << " lag=" << best.lag
            << " mean=" << best.mean << " std=" << best.stddev << '\n';
  return kOk;
}

int run_stats(const RunConfig& config) {
  const auto labeled = align_and_label(input_or_synthetic(config), config.gap_days);
  const auto active = nonzero_days(labeled, ActivityLabel::Active);
  const auto stats = config.self_compare ? compare_samples(active, active, config.bins)
                                         : compare_samples(active, nonzero_days(labeled, ActivityLabel::Inactive),
                                                           config.bins);
  const auto dir = prepare_output(config);
  write_with(dir / "population.json", [&](std::ostream& o) { write_population_report(o, stats); });
  write_file(dir / "population.svg", plot::histogram_svg(stats));
  std::cout << "active_median=" << stats.active_median << " inactive_median=" << stats.inactive_median
            << " overlap=" << stats.overlap_coefficient << " p_value=" << stats.rank_test.p_value << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Churn prediction experiments on daily download counts"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  auto& synth = add_command(app, commands, "synth", "Generate a synthetic dataset and its ground truth");
  auto& ingest = add_command(app, commands, "ingest-validate", "Parse and check a long-form dataset CSV");
  auto& label = add_command(app, commands, "label", "Label customers active, inactive or excluded");
  auto& grid = add_command(app, commands, "grid", "Sweep resample windows and lags with cross validation");
  auto& stats = add_command(app, commands, "stats", "Compare active and inactive download volumes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const auto run = [&](const Command& cmd, int (*body)(const RunConfig&)) { return body(resolve(cmd)); };
    if (synth.app->parsed()) return run(synth, run_synth);
    if (ingest.app->parsed()) return run(ingest, run_ingest_validate);
    if (label.app->parsed()) return run(label, run_label);
    if (grid.app->parsed()) return run(grid, run_grid_command);
    if (stats.app->parsed()) return run(stats, run_stats);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
