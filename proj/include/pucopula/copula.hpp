#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pucopula/errors.hpp"
#include "pucopula/families.hpp"
#include "pucopula/quadrature.hpp"
#include "pucopula/series.hpp"

namespace pucopula {

/// p_ij = alpha_i delta_ij; every axis carries the same family.
struct DiagonalWeights {
  friend bool operator==(const DiagonalWeights&, const DiagonalWeights&) = default;
};

/// Explicit block p_ij for i, j <= n, continued by the diagonal p_ii = alpha_i for i > n.
struct FiniteMatrixWeights {
  std::vector<std::vector<double>> entries;

  std::size_t order() const { return entries.empty() ? 0 : entries.size() - 1; }
  friend bool operator==(const FiniteMatrixWeights&, const FiniteMatrixWeights&) = default;
};

/// p_{i,2i} = beta_{2i}, p_{i,2i+1} = beta_{2i+1}, zero otherwise; requires
/// beta_{2i} + beta_{2i+1} = alpha_i.
struct Banded2to1Weights {
  friend bool operator==(const Banded2to1Weights&, const Banded2to1Weights&) = default;
};

using JointWeights = std::variant<DiagonalWeights, FiniteMatrixWeights, Banded2to1Weights>;

/// Tolerance on FiniteMatrix row and column sums.
inline constexpr double kMarginalTolerance = 1e-12;
/// Number of rows checked for the Banded2to1 identity.
inline constexpr std::size_t kBandedCheckRows = 50;

/// Outcome of checking joint weights against their families.
struct ValidationReport {
  bool passed = true;
  /// Row and column sums of a FiniteMatrix block, and sum minus alpha_i.
  std::vector<double> row_sums;
  std::vector<double> column_sums;
  std::vector<double> row_residuals;
  std::vector<double> column_residuals;
  std::vector<std::size_t> failing_rows;
  std::vector<std::size_t> failing_columns;
  std::vector<std::string> problems;

  /// Multi-line human-readable summary.
  std::string to_string() const;
};

ValidationReport validate(const JointWeights& weights, const std::vector<PartitionFamily>& families);

/// Raised when a copula is constructed from weights that fail validation.
class ValidationError : public ParameterError {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Generalized partition-of-unity copula: one family per axis plus joint
/// weights. Immutable; construction validates the weights.
class PuCopula {
 public:
  PuCopula(std::vector<PartitionFamily> families, JointWeights weights,
           SeriesPolicy policy = SeriesPolicy::from_environment());

  static PuCopula diagonal(const PartitionFamily& family, std::size_t dimension = 2,
                           SeriesPolicy policy = SeriesPolicy::from_environment());

  std::size_t dimension() const { return families_.size(); }
  const std::vector<PartitionFamily>& families() const { return families_; }
  const JointWeights& weights() const { return weights_; }
  const SeriesPolicy& policy() const { return policy_; }

  /// Descriptor such as "diagonal[negbin(beta=2) x negbin(beta=2)]".
  std::string describe() const;

 private:
  std::vector<PartitionFamily> families_;
  JointWeights weights_;
  SeriesPolicy policy_;
};

/// 5x5 block of the asymmetric negative binomial (beta = 1) example.
FiniteMatrixWeights example5_matrix();
/// Negative binomial beta = 1 copula with the example5_matrix block.
PuCopula example5_copula(SeriesPolicy policy = SeriesPolicy::from_environment());
/// Banded copula with negative binomial beta = 1 rows and beta = 2 columns.
PuCopula example6_copula(SeriesPolicy policy = SeriesPolicy::from_environment());

/// Copula density at an interior point. Diagonal bivariate negative binomial
/// copulas with integer beta <= 64 use the finite-sum closed form, both
/// directly and for the diagonal tail of a FiniteMatrix block. The banded
/// copula with beta = 1 rows and beta = 2 columns uses example6_density.
double density(const PuCopula& copula, std::span<const double> point);
double density(const PuCopula& copula, double u, double v);

/// Density from the series alone, never substituting a closed form.
double series_density(const PuCopula& copula, std::span<const double> point);
double series_density(const PuCopula& copula, double u, double v);

/// Densities on the interior grid ((i+0.5)/k, (j+0.5)/k), j fastest.
struct DensityGrid {
  std::size_t k = 0;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> c;
};

DensityGrid density_grid(const std::function<double(double, double)>& density, std::size_t k);
DensityGrid density_grid(const PuCopula& copula, std::size_t k);

enum class ClosedFormKind { Fgm2, NegBinomial, Example6 };

/// Identifies a copula whose distribution function is known explicitly.
struct ClosedFormId {
  ClosedFormKind kind = ClosedFormKind::Fgm2;
  int beta = 0;

  static ClosedFormId fgm2() { return {ClosedFormKind::Fgm2, 0}; }
  static ClosedFormId negbin(int beta) { return {ClosedFormKind::NegBinomial, beta}; }
  static ClosedFormId example6() { return {ClosedFormKind::Example6, 0}; }
};

/// C(x, y) on [0, 1]^2. UnsupportedError for negative binomial beta outside {1, 2}.
double cdf_closed_form(const ClosedFormId& id, double x, double y);

struct TailMassOptions {
  double abs_tol = 1e-9;
  std::size_t max_terms = 2'000'000;
};

/// A tail mass with a rigorous bound on its truncation error.
struct TailMass {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t terms = 0;
};

/// Integral of c over [t, 1]^d, summed component by component from the
/// mixture representation: each component contributes a product of its
/// one-dimensional upper masses. The tail of the index sum is bounded through
/// the partition identity sum_i (lower mass of component i) = t.
TailMass survival_mass(const PuCopula& copula, double t, const TailMassOptions& options = {});

/// Integral of c over (0, t]^d = C(t, ..., t), by the same scheme.
TailMass lower_mass(const PuCopula& copula, double t, const TailMassOptions& options = {});

/// Integral of a bivariate density over [t, 1]^2 by iterated adaptive
/// quadrature on the reflected square s = 1 - u, w = 1 - v.
QuadratureResult survival_mass_quadrature(const std::function<double(double, double)>& density,
                                          double t, const QuadratureOptions& options = {});
QuadratureResult survival_mass_quadrature(const PuCopula& copula, double t,
                                          const QuadratureOptions& options = {});

}  // namespace pucopula
