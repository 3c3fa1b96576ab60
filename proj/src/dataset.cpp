#include "churn/dataset.hpp"

#include "churn/error.hpp"
#include "churn/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace churn {

namespace {

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

bool parse_double(std::string_view text, double& value) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string format_count(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int week_of_year(Date d) {
  const std::chrono::year_month_day ymd{d};
  const Date jan1{ymd.year() / 1 / 1};
  return static_cast<int>((d - jan1).count() / 7) + 1;
}

}  // namespace

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  const auto bad = [&] { return DomainError("invalid ISO date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  const char* s = text.data();
  if (std::from_chars(s, s + 4, y).ptr != s + 4) throw bad();
  if (std::from_chars(s + 5, s + 7, m).ptr != s + 7) throw bad();
  if (std::from_chars(s + 8, s + 10, d).ptr != s + 10) throw bad();
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool operator==(const DownloadSeries& a, const DownloadSeries& b) {
  return a.customer_id == b.customer_id && a.start_date == b.start_date && equal_values(a.counts, b.counts);
}

const DownloadSeries* RawDataset::find(std::string_view customer_id) const {
  const auto it = std::lower_bound(series.begin(), series.end(), customer_id,
                                   [](const DownloadSeries& s, std::string_view id) { return s.customer_id < id; });
  return (it != series.end() && it->customer_id == customer_id) ? &*it : nullptr;
}

void validate(const DownloadSeries& series) {
  if (series.counts.size() == 0) throw DomainError("series '" + series.customer_id + "' is empty");
  for (Eigen::Index i = 0; i < series.counts.size(); ++i) {
    const double c = series.counts[i];
    if (!std::isfinite(c) || c < 0.0)
      throw DomainError("series '" + series.customer_id + "' has an invalid count at day " + std::to_string(i));
  }
}

void validate(const RawDataset& dataset) {
  for (std::size_t i = 0; i < dataset.series.size(); ++i) {
    const auto& s = dataset.series[i];
    validate(s);
    if (i > 0 && !(dataset.series[i - 1].customer_id < s.customer_id))
      throw DomainError("customer ids must be unique and sorted (at '" + s.customer_id + "')");
    if (s.last_date() > dataset.observation_end)
      throw DomainError("series '" + s.customer_id + "' extends past the observation end");
  }
}

RawDataset parse_long_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  if (trim_cr(line) != "customer_id,date,ftd")
    throw ParseError(line_no, "expected header 'customer_id,date,ftd'");

  std::map<std::string, std::map<Date, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto fields = split_commas(text);
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(line_no, "empty customer_id");
    Date date;
    try {
      date = parse_date(fields[1]);
    } catch (const DomainError& e) {
      throw ParseError(line_no, e.what());
    }
    double ftd = 0.0;
    if (!parse_double(fields[2], ftd) || !std::isfinite(ftd))
      throw ParseError(line_no, "invalid ftd '" + std::string(fields[2]) + "'");
    if (ftd < 0.0) throw DomainError("line " + std::to_string(line_no) + ": negative ftd");
    auto& per_customer = rows[std::string(fields[0])];
    if (!per_customer.emplace(date, ftd).second)
      throw DuplicateKeyError(line_no, "duplicate (customer_id, date) pair '" + std::string(fields[0]) + "," +
                                           std::string(fields[1]) + "'");
  }

  RawDataset out;
  bool any = false;
  for (auto& [id, days] : rows) {
    const Date first = days.begin()->first;
    const Date last = days.rbegin()->first;
    DownloadSeries s{id, first, Eigen::VectorXd::Zero((last - first).count() + 1)};
    for (const auto& [date, ftd] : days) s.counts[(date - first).count()] = ftd;
    out.observation_end = any ? std::max(out.observation_end, last) : last;
    any = true;
    out.series.push_back(std::move(s));
  }
  return out;
}

void write_long_csv(std::ostream& out, const RawDataset& dataset) {
  out << "customer_id,date,ftd\n";
  for (const auto& s : dataset.series) {
    for (Eigen::Index i = 0; i < s.counts.size(); ++i)
      out << s.customer_id << ',' << format_date(s.start_date + std::chrono::days{i}) << ','
          << format_count(s.counts[i]) << '\n';
  }
}

DownloadSeries anonymize(const DownloadSeries& series, double jitter_epsilon, std::uint64_t seed) {
  if (!(jitter_epsilon >= 0.0) || !std::isfinite(jitter_epsilon))
    throw DomainError("jitter epsilon must be a non-negative real");
  const double peak = series.counts.size() ? series.counts.maxCoeff() : 0.0;
  if (!(peak > 0.0)) throw DomainError("cannot anonymize an all-zero series '" + series.customer_id + "'");
  DownloadSeries out = series;
  out.counts /= peak;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < out.counts.size(); ++i) out.counts[i] += jitter_epsilon * uniform01(rng);
  return out;
}

void SynthConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw DomainError("synth config: " + msg); };
  if (n_customers < 1) fail("n_customers must be positive");
  if (!(churn_fraction >= 0.0 && churn_fraction <= 1.0)) fail("churn_fraction must lie in [0, 1]");
  if (horizon_days < 1) fail("horizon_days must be positive");
  if (!std::isfinite(size_mu)) fail("size_mu must be finite");
  if (!(size_sigma >= 0.0) || !std::isfinite(size_sigma)) fail("size_sigma must be non-negative");
  bool any_positive = false;
  for (double w : weekly_profile) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("weekly_profile entries must be non-negative");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) fail("weekly_profile needs at least one positive entry");
  for (int w : annual_dip_weeks)
    if (w < 1 || w > 53) fail("annual_dip_weeks entries must lie in 1..53");
  if (!(annual_dip_multiplier >= 0.0) || !std::isfinite(annual_dip_multiplier))
    fail("annual_dip_multiplier must be non-negative");
  if (churn_decay_days < 1) fail("churn_decay_days must be positive");
  if (churn_decay_days >= horizon_days) fail("churn_decay_days must be less than horizon_days");
  if (!(noise_dispersion > 0.0) || !std::isfinite(noise_dispersion)) fail("noise_dispersion must be positive");
  if (!(churner_volume_ratio > 0.0) || !std::isfinite(churner_volume_ratio))
    fail("churner_volume_ratio must be positive");
  if (min_churn_day < 0 || min_churn_day >= horizon_days) fail("min_churn_day must lie in [0, horizon_days)");
}

SyntheticDataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  const int n = config.n_customers;
  const int horizon = config.horizon_days;

  Rng master(derive_seed(config.seed, {0}));
  const auto n_churn = static_cast<std::size_t>(std::llround(config.churn_fraction * n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  shuffle_in_place(order, master);
  std::vector<bool> churner(static_cast<std::size_t>(n), false);
  for (std::size_t i = 0; i < n_churn; ++i) churner[static_cast<std::size_t>(order[i])] = true;

  const int churn_lo = std::max(config.min_churn_day, config.churn_decay_days);
  const int churn_hi = std::max(churn_lo, horizon - 30);

  // Day-level multipliers shared by all customers.
  std::set<int> dip_weeks(config.annual_dip_weeks.begin(), config.annual_dip_weeks.end());
  Eigen::VectorXd seasonal(horizon);
  for (int t = 0; t < horizon; ++t) {
    const Date d = config.start_date + std::chrono::days{t};
    const unsigned dow = std::chrono::weekday{d}.iso_encoding() - 1;
    const double annual = dip_weeks.count(week_of_year(d)) ? config.annual_dip_multiplier : 1.0;
    seasonal[t] = config.weekly_profile[dow] * annual;
  }

  const int width = std::max(5, static_cast<int>(std::to_string(n).size()));
  SyntheticDataset out;
  out.data.observation_end = config.start_date + std::chrono::days{horizon - 1};
  out.data.series.reserve(static_cast<std::size_t>(n));
  const double shape = 1.0 / config.noise_dispersion;

  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(config.seed, {1, static_cast<std::uint64_t>(i)}));
    std::string id = std::to_string(i);
    id = "C" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;

    const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
    double base = std::exp(config.size_mu + config.size_sigma * z);
    const bool churns = churner[static_cast<std::size_t>(i)];
    int churn_day = horizon;
    if (churns) {
      base *= config.churner_volume_ratio;
      churn_day = churn_lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(churn_hi - churn_lo + 1)));
    }

    DownloadSeries s{id, config.start_date, Eigen::VectorXd::Zero(horizon)};
    for (int t = 0; t < std::min(churn_day, horizon); ++t) {
      double rate = base * seasonal[t];
      const int to_churn = churn_day - t;
      if (churns && to_churn <= config.churn_decay_days)
        rate *= static_cast<double>(to_churn) / config.churn_decay_days;
      if (rate <= 0.0) continue;
      const double mixed = std::gamma_distribution<double>(shape, rate / shape)(rng);
      if (mixed <= 0.0) continue;
      s.counts[t] = static_cast<double>(std::poisson_distribution<long long>(mixed)(rng));
    }
    out.churn_dates.emplace(id, churns ? std::optional<Date>(config.start_date + std::chrono::days{churn_day})
                                       : std::nullopt);
    out.data.series.push_back(std::move(s));
  }
  return out;
}

void write_ground_truth_csv(std::ostream& out, const SyntheticDataset& synth) {
  out << "customer_id,churn_date\n";
  for (const auto& [id, date] : synth.churn_dates) out << id << ',' << (date ? format_date(*date) : "") << '\n';
}

std::map<std::string, std::optional<Date>> parse_ground_truth_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || trim_cr(line) != "customer_id,churn_date")
    throw ParseError(1, "expected header 'customer_id,churn_date'");
  std::map<std::string, std::optional<Date>> out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto fields = split_commas(text);
    if (fields.size() != 2 || fields[0].empty()) throw ParseError(line_no, "expected 'customer_id,churn_date'");
    std::optional<Date> date;
    if (!fields[1].empty()) {
      try {
        date = parse_date(fields[1]);
      } catch (const DomainError& e) {
        throw ParseError(line_no, e.what());
      }
    }
    if (!out.emplace(std::string(fields[0]), date).second)
      throw DuplicateKeyError(line_no, "duplicate customer_id '" + std::string(fields[0]) + "'");
  }
  return out;
}

}  // namespace churn
