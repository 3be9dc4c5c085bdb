#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace pucopula::testing {

/// Kolmogorov-Smirnov distance between the empirical CDF of `x` and Uniform(0, 1).
inline double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    d = std::max({d, (k + 1.0) / n - x[k], x[k] - k / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// Asymptotic KS critical value at level `alpha / tests` (Bonferroni over `tests` checks).
inline double ks_critical(std::size_t n, double alpha, std::size_t tests) {
  const double level = alpha / static_cast<double>(tests);
  return std::sqrt(std::log(2.0 / level) / 2.0) / std::sqrt(static_cast<double>(n));
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace pucopula::testing
