#include "pucopula/variates.hpp"

#include <cmath>
#include <limits>

#include "pucopula/errors.hpp"

namespace pucopula {
namespace {

constexpr double kMaxIndex = 9.0e18;

std::uint64_t saturate_index(double x) {
  if (!(x < kMaxIndex)) return static_cast<std::uint64_t>(kMaxIndex);
  return static_cast<std::uint64_t>(x);
}

}  // namespace

double clamp_open_unit(double x) {
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  if (!(x > 0.0)) return lo;
  if (!(x < 1.0)) return hi;
  return x;
}

double normal_sample(RandomStream& rng) {
  while (true) {
    const double x = 2.0 * rng.uniform() - 1.0;
    const double y = 2.0 * rng.uniform() - 1.0;
    const double s = x * x + y * y;
    if (s > 0.0 && s < 1.0) return x * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double exponential_sample(RandomStream& rng) { return -std::log(rng.uniform()); }

double gamma_sample(double shape, double scale, RandomStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    throw ParameterError("gamma_sample requires shape > 0 and scale > 0");
  }
  if (shape < 1.0) {
    const double g = gamma_sample(shape + 1.0, 1.0, rng);
    return scale * g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = normal_sample(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double beta_sample(double a, double b, RandomStream& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("beta_sample requires a, b > 0");
  const double x = gamma_sample(a, 1.0, rng);
  const double y = gamma_sample(b, 1.0, rng);
  return clamp_open_unit(x / (x + y));
}

std::uint64_t geometric_sample(double p, RandomStream& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("geometric_sample requires p in (0, 1]");
  if (p == 1.0) return 0;
  return saturate_index(std::floor(std::log(rng.uniform()) / std::log1p(-p)));
}

std::uint64_t log_series_sample(double p, RandomStream& rng) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("log_series_sample requires p in (0, 1)");
  const double v = rng.uniform();
  if (v >= p) return 1;
  const double q = -std::expm1(rng.uniform() * std::log1p(-p));
  if (q <= 0.0) return 1;
  const double k = std::floor(1.0 + std::log(v) / std::log(q));
  return k < 1.0 ? 1 : saturate_index(k);
}

}  // namespace pucopula
