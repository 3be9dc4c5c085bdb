#pragma once

#include <cstdint>

#include "pucopula/random.hpp"

namespace pucopula {

/// Standard normal variate (Marsaglia polar method).
double normal_sample(RandomStream& rng);

/// Exponential variate with mean 1.
double exponential_sample(RandomStream& rng);

/// Gamma(shape, scale) variate: Marsaglia-Tsang squeeze for shape >= 1,
/// boosted through U^(1/shape) for shape < 1.
double gamma_sample(double shape, double scale, RandomStream& rng);

/// Beta(a, b) variate as G_a / (G_a + G_b), clamped into the open interval.
double beta_sample(double a, double b, RandomStream& rng);

/// Number of failures before the first success, success probability p in (0, 1].
std::uint64_t geometric_sample(double p, RandomStream& rng);

/// Log-series variate on {1, 2, ...} with P(k) = -p^k / (k ln(1 - p)), p in (0, 1)
/// (Kemp's second algorithm).
std::uint64_t log_series_sample(double p, RandomStream& rng);

/// Clamps x into the open unit interval.
double clamp_open_unit(double x);

}  // namespace pucopula
