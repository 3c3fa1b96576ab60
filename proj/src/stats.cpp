#include "churn/stats.hpp"

#include "churn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace churn::stats {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("pearson: samples differ in length");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

RankTest mann_whitney_u(std::span<const double> first, std::span<const double> second) {
  const double n1 = static_cast<double>(first.size()), n2 = static_cast<double>(second.size());
  if (first.empty() || second.empty()) throw DomainError("rank test needs two non-empty samples");
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(first.size() + second.size());
  for (double v : first) pooled.emplace_back(v, 0);
  for (double v : second) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());

  double rank_sum_first = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) rank_sum_first += avg_rank;
    i = j;
  }
  RankTest out;
  out.u = rank_sum_first - n1 * (n1 + 1.0) / 2.0;
  const double n = n1 + n2;
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return out;
  const double diff = out.u - mu;
  const double corrected = std::max(0.0, std::abs(diff) - 0.5);
  out.z = std::copysign(corrected / std::sqrt(var), diff);
  out.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(out.z)));
  return out;
}

double sign_test_p_value(int successes, int trials) {
  if (trials < 0 || successes < 0 || successes > trials) throw DomainError("sign test: invalid counts");
  // Sum in log space to stay finite for large trial counts.
  double p = 0.0;
  for (int k = successes; k <= trials; ++k)
    p += std::exp(std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) -
                  trials * std::log(2.0));
  return std::min(1.0, p);
}

}  // namespace churn::stats
