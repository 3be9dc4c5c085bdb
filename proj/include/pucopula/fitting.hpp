#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pucopula/copula.hpp"
#include "pucopula/random.hpp"
#include "pucopula/sampling.hpp"

namespace pucopula {

enum class TiePolicy {
  /// Tied values share the mean of their ranks.
  Average,
  /// Ties are ranked in order of appearance.
  First,
};

/// Column-wise normalized ranks rank / (n + 1).
struct PseudoObservations {
  std::vector<std::vector<double>> columns;
  TiePolicy tie_policy = TiePolicy::Average;
  std::size_t rows = 0;

  std::size_t dimension() const { return columns.size(); }
};

/// `data` holds one vector per column, all of equal length n >= 2.
/// ParameterError on non-finite entries or a constant column.
PseudoObservations pseudo_observations(const std::vector<std::vector<double>>& data,
                                       TiePolicy policy = TiePolicy::Average);

/// Pearson correlation of the two pseudo-observation columns.
double empirical_correlation(const PseudoObservations& pobs);

/// Bracket searched by fit_negbin_beta.
inline constexpr double kNegBinBetaMin = 0.01;
inline constexpr double kNegBinBetaMax = 500.0;

/// beta with rho(beta) = target_rho, |rho(beta) - target| <= 1e-6.
/// ParameterError when the target lies outside [rho(0.01), rho(500)].
double fit_negbin_beta(double target_rho);

/// Grade correlation 12 E[UV] - 3 of the diagonal Poisson copula, evaluated
/// exactly from the mixture: with q = gamma/(1+gamma) and r = (1+gamma)/(2+gamma),
/// E[UV] = 1 - 2 r (1-q)/(1-qr) + r^2 (1-q)/(1-qr^2).
double poisson_grade_correlation(double gamma);

struct CorrelationEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of the Poisson grade correlation as 12 mean(UV) - 3
/// from `samples` copula draws.
CorrelationEstimate poisson_grade_correlation_mc(double gamma, std::size_t samples,
                                                 RandomStream rng);

inline constexpr double kPoissonGammaMin = 0.01;
inline constexpr double kPoissonGammaMax = 200.0;

enum class PoissonFitMethod {
  /// Root of the exact grade correlation curve.
  Exact,
  /// Stochastic bisection on Monte Carlo estimates with common random numbers.
  MonteCarlo,
};

struct PoissonFitOptions {
  PoissonFitMethod method = PoissonFitMethod::Exact;
  /// Total number of copula draws across all Monte Carlo evaluations.
  std::size_t mc_budget = 1'000'000;
  /// Bisection steps of the Monte Carlo method.
  int iterations = 16;
};

struct PoissonFit {
  double gamma = 0.0;
  double achieved_rho = 0.0;
  /// Standard error of achieved_rho (zero for the exact method).
  double standard_error = 0.0;
  int iterations = 0;
};

/// gamma whose Poisson copula grade correlation matches target_rho.
/// ParameterError for unattainable targets; ConvergenceError (carrying the
/// best iterate) when the Monte Carlo fit ends far from the target.
PoissonFit fit_poisson_gamma(double target_rho, const PoissonFitOptions& options,
                             RandomStream& rng);

/// Box-count Bernstein fit with marginals adjusted to 1/m.
struct BernsteinFit {
  int m = 0;
  std::vector<std::vector<double>> P;
  int sweeps = 0;

  FiniteMatrixWeights weights() const { return {P}; }
  /// Copula with Binomial{m} margins and P as its joint weights.
  PuCopula to_copula() const;
};

inline constexpr int kMaxIpfSweeps = 10'000;
inline constexpr double kIpfTolerance = 1e-13;

BernsteinFit bernstein_fit(const PseudoObservations& pobs, int m);

enum class Tail { Upper, Lower };

/// Tail quotient K(t) with its standard error (sample estimates) or error
/// bound (copula evaluation).
struct TailEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t exceedances = 0;
  /// Fewer than kMinTailCount joint exceedances.
  bool low_count = false;
};

inline constexpr std::size_t kMinTailCount = 100;

/// Upper: P(U > t, V > t) / (1 - t). Lower: P(U < t', V < t') / t' with t' = 1 - t.
/// Requires t in (0.5, 1).
TailEstimate lambda_hat(std::span<const double> u, std::span<const double> v, double t,
                        Tail tail = Tail::Upper);
TailEstimate lambda_hat(const SampleBatch& batch, double t, Tail tail = Tail::Upper);
TailEstimate lambda_hat(const PseudoObservations& pobs, double t, Tail tail = Tail::Upper);
TailEstimate lambda_hat(const PuCopula& copula, double t, Tail tail = Tail::Upper);

}  // namespace pucopula
