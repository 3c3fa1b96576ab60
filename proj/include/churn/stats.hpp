#pragma once

#include <span>
#include <vector>

namespace churn::stats {

double mean(std::span<const double> values);
/// Population standard deviation (divides by n).
double stddev(std::span<const double> values);
/// Average of the middle two values for even n; throws DomainError when empty.
double median(std::vector<double> values);
/// Pearson correlation; 0 when either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);

double normal_cdf(double z);

struct RankTest {
  double u = 0.0;        ///< U statistic of the first sample
  double z = 0.0;
  double p_value = 1.0;  ///< two-sided, normal approximation with tie and continuity correction
};

/// Mann-Whitney U (Wilcoxon rank-sum) test.
RankTest mann_whitney_u(std::span<const double> first, std::span<const double> second);

/// One-sided P(X >= successes) for X ~ Binomial(trials, 1/2).
double sign_test_p_value(int successes, int trials);

}  // namespace churn::stats
