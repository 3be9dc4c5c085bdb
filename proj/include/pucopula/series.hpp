#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"

namespace pucopula {

enum class TailBound {
  /// Stop once |t_i| r / (1 - r) <= tol |S|, r the (bounded) term ratio.
  GeometricRatio,
  /// Stop once |t_i| <= tol |S|.
  TermMagnitude,
};

/// Truncation rules for the infinite series behind the copula densities.
struct SeriesPolicy {
  double rel_tolerance = 1e-12;
  std::size_t max_terms = 10000;
  TailBound tail_bound = TailBound::GeometricRatio;

  /// Throws ParameterError unless tolerance is in (0, 1e-3] and max_terms >= 10.
  void validate() const;

  /// Default policy with max_terms taken from PUCOPULA_MAX_TERMS when set.
  static SeriesPolicy from_environment();
};

struct SeriesResult {
  double value = 0.0;
  std::size_t terms = 0;
};

namespace detail {
inline constexpr std::size_t kSeriesWarmup = 4;
}

/// Sums term(first) + term(first + 1) + ... with compensated accumulation.
///
/// `ratio_bound` is a caller-supplied bound on the limit of |t_{i+1}/t_i|
/// (e.g. uv for the negative binomial and log-series kernels); the tail
/// bound uses max(observed ratio, ratio_bound), so a series whose ratio
/// climbs toward its limit from below is still certified. A run of two exact
/// zeros after the warm-up window ends the sum (finite supports).
template <typename TermFn>
SeriesResult sum_series(TermFn&& term, const SeriesPolicy& policy, std::size_t first = 0,
                        double ratio_bound = 0.0) {
  CompensatedSum sum;
  double previous = std::numeric_limits<double>::quiet_NaN();
  double previous_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < policy.max_terms; ++n) {
    const double t = term(first + n);
    if (!std::isfinite(t)) {
      throw TruncationError("series term is not finite at index " + std::to_string(first + n),
                            sum.value(), n);
    }
    sum += t;
    const double s = std::abs(sum.value());
    const double at = std::abs(t);
    if (n + 1 >= detail::kSeriesWarmup) {
      if (at == 0.0 && previous == 0.0) return {sum.value(), n + 1};
      if (policy.tail_bound == TailBound::TermMagnitude) {
        if (at <= policy.rel_tolerance * s) return {sum.value(), n + 1};
      } else if (previous != 0.0) {
        const double ratio = at / std::abs(previous);
        const double bound = std::max(ratio, ratio_bound);
        // The observed ratio only bounds the tail once it stops growing.
        const bool monotone = ratio <= previous_ratio * (1.0 + 1e-12) || ratio_bound >= ratio;
        if (bound < 1.0 && monotone && at * bound / (1.0 - bound) <= policy.rel_tolerance * s) {
          return {sum.value(), n + 1};
        }
        previous_ratio = ratio;
      }
    }
    previous = at;
  }
  throw TruncationError("series did not reach tolerance within " +
                            std::to_string(policy.max_terms) + " terms",
                        sum.value(), policy.max_terms);
}

}  // namespace pucopula
