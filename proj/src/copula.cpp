#include "pucopula/copula.hpp"

#include <cmath>
#include <sstream>

#include "pucopula/closed_forms.hpp"
#include "pucopula/compensated.hpp"
#include "pucopula/format.hpp"

namespace pucopula {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_point(std::span<const double> point, std::size_t dimension) {
  if (point.size() != dimension) {
    throw DomainError("point has " + std::to_string(point.size()) + " coordinates, copula has " +
                      std::to_string(dimension));
  }
  for (double x : point) {
    if (!(x > 0.0 && x < 1.0)) {
      throw DomainError("coordinates must lie strictly inside (0, 1), got " + format_double(x));
    }
  }
}

void check_level(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw DomainError("tail level t must lie strictly inside (0, 1), got " + format_double(t));
  }
}

// Integer beta for which the finite-sum density applies, or 0.
int finite_sum_beta(const PartitionFamily& family) {
  if (!family.is<NegBinomial>()) return 0;
  const double beta = family.as<NegBinomial>().beta;
  if (beta != std::floor(beta) || beta < 1.0 || beta > kMaxFiniteDensityBeta) return 0;
  return static_cast<int>(beta);
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// Sum over i >= first of prod_k phi_i(x_k) / alpha_i^(d-1).
double diagonal_sum(const PartitionFamily& family, std::span<const double> point,
                    std::size_t first, const SeriesPolicy& policy) {
  const std::size_t d = point.size();
  first = std::max(first, family.first_index());
  if (const auto last = family.last_index()) {
    CompensatedSum sum;
    for (std::size_t i = first; i <= *last; ++i) {
      double term = 1.0;
      for (double x : point) term *= point_mass(family, i, x);
      for (std::size_t k = 1; k < d; ++k) term /= weight(family, i);
      sum += term;
    }
    return sum.value();
  }
  std::vector<PointMassSequence> sequences;
  sequences.reserve(d);
  double ratio = 1.0;
  for (double x : point) {
    sequences.emplace_back(family, x, first);
    ratio *= ratio_limit(family, x);
  }
  bool started = false;
  auto term = [&](std::size_t i) {
    if (started) {
      for (auto& s : sequences) s.advance();
    }
    started = true;
    double product = 1.0;
    for (const auto& s : sequences) product *= s.value();
    const double a = weight(family, i);
    if (std::isnormal(product) && std::isnormal(a)) {
      double t = product;
      for (std::size_t k = 1; k < d; ++k) t /= a;
      if (std::isnormal(t)) return t;
    }
    double log_t = -static_cast<double>(d - 1) * log_weight(family, i);
    for (const auto& s : sequences) log_t += s.log_value();
    return std::exp(log_t);
  };
  return sum_series(term, policy, first, ratio).value;
}

double finite_matrix_density(const PuCopula& copula, const FiniteMatrixWeights& weights,
                             double u, double v, bool allow_closed_form) {
  const PartitionFamily& family = copula.families()[0];
  const std::size_t n = weights.order();
  std::vector<double> fu(n + 1);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = weight_or_zero(family, i);
    fu[i] = a > 0.0 ? point_mass(family, i, u) / a : 0.0;
    fv[i] = a > 0.0 ? point_mass(family, i, v) / a : 0.0;
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (weights.entries[i][j] != 0.0) sum += weights.entries[i][j] * fu[i] * fv[j];
    }
  }
  const int beta = allow_closed_form ? finite_sum_beta(family) : 0;
  if (beta > 0) {
    sum += negbin_density_finite(beta, u, v);
    for (std::size_t i = 0; i <= n; ++i) sum -= weight_or_zero(family, i) * fu[i] * fv[i];
  } else {
    const double point[2] = {u, v};
    sum += diagonal_sum(family, point, n + 1, copula.policy());
  }
  return sum.value();
}

double banded_density(const PuCopula& copula, double u, double v) {
  const PartitionFamily& rows = copula.families()[0];
  const PartitionFamily& cols = copula.families()[1];
  if (const auto last = rows.last_index()) {
    CompensatedSum sum;
    for (std::size_t i = rows.first_index(); i <= *last; ++i) {
      sum += point_mass(rows, i, u) / weight(rows, i) *
             (point_mass(cols, 2 * i, v) + point_mass(cols, 2 * i + 1, v));
    }
    return sum.value();
  }
  const std::size_t first = rows.first_index();
  PointMassSequence row(rows, u, first);
  PointMassSequence col(cols, v, 2 * first);
  const double ratio = ratio_limit(rows, u) * ratio_limit(cols, v) * ratio_limit(cols, v);
  bool started = false;
  auto term = [&](std::size_t i) {
    if (started) {
      row.advance();
      col.advance();
    }
    started = true;
    const double even = col.value();
    const double log_even = col.log_value();
    col.advance();
    const double odd = col.value();
    const double log_odd = col.log_value();
    const double a = weight(rows, i);
    const double t = row.value() / a * (even + odd);
    if (std::isnormal(t) && std::isnormal(a)) return t;
    return std::exp(row.log_value() - log_weight(rows, i) + log_add(log_even, log_odd));
  };
  return sum_series(term, copula.policy(), first, ratio).value;
}

bool is_example6(const PuCopula& copula) {
  return copula.families()[0] == PartitionFamily::negative_binomial(1.0) &&
         copula.families()[1] == PartitionFamily::negative_binomial(2.0);
}

double evaluate(const PuCopula& copula, std::span<const double> point, bool allow_closed_form) {
  check_point(point, copula.dimension());
  return std::visit(
      Overloaded{
          [&](const DiagonalWeights&) {
            const PartitionFamily& family = copula.families()[0];
            const int beta = allow_closed_form && point.size() == 2 ? finite_sum_beta(family) : 0;
            if (beta > 0) return negbin_density_finite(beta, point[0], point[1]);
            return diagonal_sum(family, point, family.first_index(), copula.policy());
          },
          [&](const FiniteMatrixWeights& w) {
            return finite_matrix_density(copula, w, point[0], point[1], allow_closed_form);
          },
          [&](const Banded2to1Weights&) {
            if (allow_closed_form && is_example6(copula)) {
              return example6_density(point[0], point[1]);
            }
            return banded_density(copula, point[0], point[1]);
          },
      },
      copula.weights());
}

enum class Side { Lower, Upper };

double side_mass(const ComponentMasses& m, Side side) {
  return side == Side::Upper ? m.upper : m.lower;
}

[[noreturn]] void tail_budget_exhausted(double partial, std::size_t terms) {
  throw TruncationError("tail mass did not reach its error target within " +
                            std::to_string(terms) + " components",
                        partial, terms);
}

TailMass diagonal_tail(const PartitionFamily& family, std::size_t d, double t, Side side,
                       const TailMassOptions& options) {
  CompensatedSum value;
  CompensatedSum lower_total;
  std::size_t terms = 0;
  const auto last = family.last_index();
  for (std::size_t i = family.first_index();; ++i) {
    if (last && i > *last) return {value.value(), 0.0, terms};
    if (terms >= options.max_terms) tail_budget_exhausted(value.value(), terms);
    const ComponentMasses m = component_masses(family, i, t);
    const double a = weight(family, i);
    const double part = side_mass(m, side);
    double term = part;
    for (std::size_t k = 1; k < d; ++k) term *= part / a;
    value += term;
    lower_total += m.lower;
    ++terms;
    if (last) continue;
    const double rest = std::max(0.0, t - lower_total.value());
    const double bound = side == Side::Upper ? static_cast<double>(d) * rest : rest;
    if (bound <= options.abs_tol) {
      const double remainder = side == Side::Upper ? weight_tail(family, i + 1) : 0.0;
      return {value.value() + remainder, bound, terms};
    }
  }
}

TailMass matrix_tail(const PartitionFamily& family, const FiniteMatrixWeights& weights, double t,
                     Side side, const TailMassOptions& options) {
  const std::size_t n = weights.order();
  CompensatedSum value;
  CompensatedSum lower_total;
  std::vector<double> scaled(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    if (!family.in_support(i)) continue;
    const ComponentMasses m = component_masses(family, i, t);
    scaled[i] = side_mass(m, side) / weight(family, i);
    lower_total += m.lower;
  }
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) value += weights.entries[i][j] * scaled[i] * scaled[j];
  }
  std::size_t terms = n + 1;
  const auto last = family.last_index();
  for (std::size_t i = n + 1;; ++i) {
    if (last && i > *last) return {value.value(), 0.0, terms};
    if (!last) {
      const double rest = std::max(0.0, t - lower_total.value());
      const double bound = side == Side::Upper ? 2.0 * rest : rest;
      if (bound <= options.abs_tol) {
        const double remainder = side == Side::Upper ? weight_tail(family, i) : 0.0;
        return {value.value() + remainder, bound, terms};
      }
    }
    if (terms >= options.max_terms) tail_budget_exhausted(value.value(), terms);
    const ComponentMasses m = component_masses(family, i, t);
    const double part = side_mass(m, side);
    value += part * part / weight(family, i);
    lower_total += m.lower;
    ++terms;
  }
}

TailMass banded_tail(const PartitionFamily& rows, const PartitionFamily& cols, double t, Side side,
                     const TailMassOptions& options) {
  CompensatedSum value;
  CompensatedSum row_lower;
  CompensatedSum col_lower;
  std::size_t terms = 0;
  const auto last = rows.last_index();
  for (std::size_t j = 0; j < 2 * rows.first_index(); ++j) {
    if (cols.in_support(j)) col_lower += component_masses(cols, j, t).lower;
  }
  for (std::size_t i = rows.first_index();; ++i) {
    if (last && i > *last) return {value.value(), 0.0, terms};
    if (terms >= options.max_terms) tail_budget_exhausted(value.value(), terms);
    const ComponentMasses m = component_masses(rows, i, t);
    const ComponentMasses even = component_masses(cols, 2 * i, t);
    const ComponentMasses odd = component_masses(cols, 2 * i + 1, t);
    value += side_mass(m, side) / weight(rows, i) * (side_mass(even, side) + side_mass(odd, side));
    row_lower += m.lower;
    col_lower += even.lower + odd.lower;
    ++terms;
    if (last) continue;
    const double row_rest = std::max(0.0, t - row_lower.value());
    const double col_rest = std::max(0.0, t - col_lower.value());
    const double bound = side == Side::Upper ? row_rest + col_rest : row_rest;
    if (bound <= options.abs_tol) {
      const double remainder = side == Side::Upper ? weight_tail(rows, i + 1) : 0.0;
      return {value.value() + remainder, bound, terms};
    }
  }
}

TailMass tail_mass(const PuCopula& copula, double t, Side side, const TailMassOptions& options) {
  check_level(t);
  if (!(options.abs_tol > 0.0)) throw ParameterError("tail mass tolerance must be positive");
  return std::visit(
      Overloaded{
          [&](const DiagonalWeights&) {
            return diagonal_tail(copula.families()[0], copula.dimension(), t, side, options);
          },
          [&](const FiniteMatrixWeights& w) {
            return matrix_tail(copula.families()[0], w, t, side, options);
          },
          [&](const Banded2to1Weights&) {
            return banded_tail(copula.families()[0], copula.families()[1], t, side, options);
          },
      },
      copula.weights());
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  os << (passed ? "validation passed" : "validation failed") << '\n';
  for (std::size_t i = 0; i < row_sums.size(); ++i) {
    os << "row " << i << ": sum=" << format_double(row_sums[i])
       << " residual=" << format_double(row_residuals[i]) << '\n';
  }
  for (std::size_t j = 0; j < column_sums.size(); ++j) {
    os << "column " << j << ": sum=" << format_double(column_sums[j])
       << " residual=" << format_double(column_residuals[j]) << '\n';
  }
  for (const auto& p : problems) os << "problem: " << p << '\n';
  return os.str();
}

ValidationReport validate(const JointWeights& weights,
                          const std::vector<PartitionFamily>& families) {
  ValidationReport report;
  auto fail = [&](const std::string& problem) {
    report.passed = false;
    report.problems.push_back(problem);
  };
  if (families.size() < 2) {
    fail("a copula needs at least two families, got " + std::to_string(families.size()));
    return report;
  }
  auto require_bivariate = [&](const char* name) {
    if (families.size() != 2) {
      fail(std::string(name) + " weights are defined for d = 2 only, got d = " +
           std::to_string(families.size()));
      return false;
    }
    return true;
  };
  std::visit(
      Overloaded{
          [&](const DiagonalWeights&) {
            for (std::size_t k = 1; k < families.size(); ++k) {
              if (!(families[k] == families[0])) {
                fail("diagonal weights need identical families, axis " + std::to_string(k) +
                     " is " + families[k].describe() + " but axis 0 is " +
                     families[0].describe());
              }
            }
          },
          [&](const FiniteMatrixWeights& w) {
            if (!require_bivariate("matrix")) return;
            if (!(families[1] == families[0])) {
              fail("matrix weights need identical families on both axes");
            }
            const std::size_t size = w.entries.size();
            if (size == 0) {
              fail("matrix is empty");
              return;
            }
            for (std::size_t i = 0; i < size; ++i) {
              if (w.entries[i].size() != size) {
                fail("matrix row " + std::to_string(i) + " has " +
                     std::to_string(w.entries[i].size()) + " entries, expected " +
                     std::to_string(size));
                return;
              }
            }
            const PartitionFamily& family = families[0];
            for (std::size_t i = 0; i < size; ++i) {
              CompensatedSum row;
              CompensatedSum col;
              for (std::size_t j = 0; j < size; ++j) {
                const double e = w.entries[i][j];
                if (!std::isfinite(e) || e < 0.0) {
                  fail("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") is negative or not finite");
                }
                row += e;
                col += w.entries[j][i];
              }
              const double alpha = weight_or_zero(family, i);
              report.row_sums.push_back(row.value());
              report.column_sums.push_back(col.value());
              report.row_residuals.push_back(row.value() - alpha);
              report.column_residuals.push_back(col.value() - alpha);
              if (!family.in_support(i)) {
                fail("index " + std::to_string(i) + " is outside the support of " +
                     family.describe());
              } else if (row.value() == 0.0 || col.value() == 0.0) {
                fail("degenerate zero row or column at index " + std::to_string(i));
              }
              if (!(std::abs(row.value() - alpha) < kMarginalTolerance)) {
                report.passed = false;
                report.failing_rows.push_back(i);
              }
              if (!(std::abs(col.value() - alpha) < kMarginalTolerance)) {
                report.passed = false;
                report.failing_columns.push_back(i);
              }
            }
            if (!report.failing_rows.empty() || !report.failing_columns.empty()) {
              report.problems.push_back("marginal sums differ from the family weights by " +
                                        format_double(kMarginalTolerance) + " or more");
            }
          },
          [&](const Banded2to1Weights&) {
            if (!require_bivariate("banded")) return;
            const PartitionFamily& rows = families[0];
            const PartitionFamily& cols = families[1];
            for (std::size_t j = 0; j < 2 * rows.first_index(); ++j) {
              if (cols.in_support(j)) {
                fail("column index " + std::to_string(j) + " is not paired with any row");
              }
            }
            const auto row_last = rows.last_index();
            const auto col_last = cols.last_index();
            if (row_last && (!col_last || *col_last > 2 * *row_last + 1)) {
              fail("column support extends past the paired rows");
            }
            std::size_t end = rows.first_index() + kBandedCheckRows;
            if (row_last) end = std::min(end, *row_last + 1);
            for (std::size_t i = rows.first_index(); i < end; ++i) {
              const double pair = weight_or_zero(cols, 2 * i) + weight_or_zero(cols, 2 * i + 1);
              const double residual = pair - weight(rows, i);
              report.row_sums.push_back(pair);
              report.row_residuals.push_back(residual);
              if (!(std::abs(residual) < kMarginalTolerance)) {
                report.passed = false;
                report.failing_rows.push_back(i);
              }
            }
            if (!report.failing_rows.empty()) {
              report.problems.push_back(
                  "paired column weights beta_2i + beta_2i+1 differ from alpha_i");
            }
          },
      },
      weights);
  return report;
}

ValidationError::ValidationError(ValidationReport report)
    : ParameterError(report.to_string()), report_(std::move(report)) {}

PuCopula::PuCopula(std::vector<PartitionFamily> families, JointWeights weights,
                   SeriesPolicy policy)
    : families_(std::move(families)), weights_(std::move(weights)), policy_(policy) {
  policy_.validate();
  ValidationReport report = validate(weights_, families_);
  if (!report.passed) throw ValidationError(std::move(report));
}

PuCopula PuCopula::diagonal(const PartitionFamily& family, std::size_t dimension,
                            SeriesPolicy policy) {
  return PuCopula(std::vector<PartitionFamily>(dimension, family), DiagonalWeights{}, policy);
}

std::string PuCopula::describe() const {
  const std::string base = families_[0].describe();
  return std::visit(
      Overloaded{
          [&](const DiagonalWeights&) {
            return "diagonal(" + base + ", d=" + std::to_string(dimension()) + ")";
          },
          [&](const FiniteMatrixWeights& w) {
            return "matrix(" + base + ", n=" + std::to_string(w.order()) + ")";
          },
          [&](const Banded2to1Weights&) {
            return "banded(" + base + ", " + families_[1].describe() + ")";
          },
      },
      weights_);
}

FiniteMatrixWeights example5_matrix() {
  const double raw[5][5] = {{18, 5, 5, 0, 2},
                            {10, 0, 0, 0, 0},
                            {0, 5, 0, 0, 0},
                            {0, 0, 0, 3, 0},
                            {2, 0, 0, 0, 0}};
  FiniteMatrixWeights w;
  w.entries.assign(5, std::vector<double>(5));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) w.entries[i][j] = raw[i][j] / 60.0;
  }
  return w;
}

PuCopula example5_copula(SeriesPolicy policy) {
  const auto family = PartitionFamily::negative_binomial(1.0);
  return PuCopula({family, family}, example5_matrix(), policy);
}

PuCopula example6_copula(SeriesPolicy policy) {
  return PuCopula(
      {PartitionFamily::negative_binomial(1.0), PartitionFamily::negative_binomial(2.0)},
      Banded2to1Weights{}, policy);
}

double density(const PuCopula& copula, std::span<const double> point) {
  return evaluate(copula, point, true);
}

double density(const PuCopula& copula, double u, double v) {
  const double point[2] = {u, v};
  return evaluate(copula, point, true);
}

double series_density(const PuCopula& copula, std::span<const double> point) {
  return evaluate(copula, point, false);
}

double series_density(const PuCopula& copula, double u, double v) {
  const double point[2] = {u, v};
  return evaluate(copula, point, false);
}

DensityGrid density_grid(const std::function<double(double, double)>& f, std::size_t k) {
  if (k < 2) throw ParameterError("grid size must be at least 2");
  DensityGrid grid;
  grid.k = k;
  grid.u.reserve(k * k);
  grid.v.reserve(k * k);
  grid.c.reserve(k * k);
  const double dk = static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double u = (static_cast<double>(i) + 0.5) / dk;
      const double v = (static_cast<double>(j) + 0.5) / dk;
      grid.u.push_back(u);
      grid.v.push_back(v);
      grid.c.push_back(f(u, v));
    }
  }
  return grid;
}

DensityGrid density_grid(const PuCopula& copula, std::size_t k) {
  if (copula.dimension() != 2) throw ParameterError("density grids need a bivariate copula");
  return density_grid([&](double u, double v) { return density(copula, u, v); }, k);
}

double cdf_closed_form(const ClosedFormId& id, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw DomainError("CDF arguments must lie in [0, 1]");
  }
  if (id.kind == ClosedFormKind::NegBinomial && id.beta != 1 && id.beta != 2) {
    throw UnsupportedError("closed-form negative binomial CDF is available for beta 1 and 2 only, got " +
                           std::to_string(id.beta));
  }
  if (x == 0.0 || y == 0.0) return 0.0;
  if (x == 1.0) return y;
  if (y == 1.0) return x;
  switch (id.kind) {
    case ClosedFormKind::Fgm2:
      return x * y + x * y * (1.0 - x) * (1.0 - y);
    case ClosedFormKind::NegBinomial: {
      // polynomials written in a = 1 - x, b = 1 - y to stay accurate near (1, 1)
      const double a = 1.0 - x;
      const double b = 1.0 - y;
      const double w = a + x * b;
      if (id.beta == 1) return x * y * (a + b) / w;
      const double s = a + b;
      const double ab = a * b;
      const double p = s * s * s - 2.0 * ab * (a * a + b * b) + ab * ab * s - 3.0 * ab * ab;
      return x * y * p / (w * w * w);
    }
    case ClosedFormKind::Example6:
      return example6_cdf(x, y);
  }
  throw UnsupportedError("unknown closed-form copula");
}

TailMass survival_mass(const PuCopula& copula, double t, const TailMassOptions& options) {
  return tail_mass(copula, t, Side::Upper, options);
}

TailMass lower_mass(const PuCopula& copula, double t, const TailMassOptions& options) {
  return tail_mass(copula, t, Side::Lower, options);
}

QuadratureResult survival_mass_quadrature(const std::function<double(double, double)>& f,
                                          double t, const QuadratureOptions& options) {
  check_level(t);
  const double width = 1.0 - t;
  const double top = std::nextafter(1.0, 0.0);
  return integrate_2d(
      [&](double s, double w) { return f(std::min(1.0 - s, top), std::min(1.0 - w, top)); }, 0.0,
      width, 0.0, width, options);
}

QuadratureResult survival_mass_quadrature(const PuCopula& copula, double t,
                                          const QuadratureOptions& options) {
  if (copula.dimension() != 2) throw ParameterError("survival mass quadrature needs d = 2");
  return survival_mass_quadrature([&](double u, double v) { return density(copula, u, v); }, t,
                                  options);
}

}  // namespace pucopula
