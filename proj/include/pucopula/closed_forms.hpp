#pragma once

#include <cstddef>

#include "pucopula/rational.hpp"
#include "pucopula/series.hpp"

namespace pucopula {

/// Upper tail dependence coefficient: exact rational and its double value.
struct TailDepResult {
  Rational exact;
  double value = 0.0;
};

/// Largest integer beta accepted by negbin_density_finite.
inline constexpr int kMaxFiniteDensityBeta = 64;
/// Largest integer beta accepted by negbin_lambda_u.
inline constexpr int kMaxLambdaBeta = 32;

/// Diagonal negative binomial copula density for integer beta as a finite sum:
/// (beta+1) ((1-u)(1-v))^beta / (1-uv)^(2 beta+1) * sum_i C(beta-1,i) C(beta+1,i) (uv)^i.
double negbin_density_finite(int beta, double u, double v);

/// lambda_U of the diagonal negative binomial copula, evaluated exactly.
TailDepResult negbin_lambda_u(int beta);

/// Grade correlation rho(beta) = 3 beta (2 (beta+1)^2 trigamma(beta+2) - 2 beta - 1).
double negbin_rho(double beta);

/// rho(beta) from the partial sums 12 beta sum_{i<N} (i+1)^2 / ((beta+i)(beta+i+1)(beta+i+2)^2) - 3
/// at N = terms/4, terms/2, terms, with two Richardson steps removing the
/// 1/N and 1/N^2 truncation terms.
double negbin_rho_series(double beta, std::size_t terms = 1'000'000);

/// First derivative of the digamma function. DomainError for z <= 0.
double trigamma(double z);

/// Diagonal Poisson copula density
/// (1+gamma)(1-u)^gamma (1-v)^gamma sum_i (gamma (1+gamma) L(u) L(v))^i / (i!)^2.
double poisson_density(double gamma, double u, double v,
                       const SeriesPolicy& policy = SeriesPolicy::from_environment());

/// Upper bound (1+gamma) (1-u)^K (1-v)^K with K = gamma - sqrt(gamma (1+gamma)).
double poisson_density_bound(double gamma, double u, double v);

/// Diagonal log-series copula density (1 / (L(u) L(v))) sum_{i>=1} (uv)^i / (i beta_i).
double logseries_density(double u, double v,
                         const SeriesPolicy& policy = SeriesPolicy::from_environment());

/// Asymmetric negative binomial (beta = 1) copula with the 5x5 block M4.
double example5_density(double u, double v);
/// Polynomial factor H(u, v) of example5_density.
double example5_polynomial(double u, double v);

/// Asymmetric copula pairing negative binomial beta = 1 rows with beta = 2 columns.
double example6_density(double u, double v);
double example6_cdf(double x, double y);
Rational lambda_u_example6();

/// Bernstein copula density m sum_i C(m-1,i)^2 (uv)^i ((1-u)(1-v))^(m-1-i).
double bernstein_density(int m, double u, double v);

/// True iff sum_i C(beta-1,i) C(beta+1,i) = C(2 beta, beta-1) in exact arithmetic.
bool vandermonde_check(int beta);

}  // namespace pucopula
