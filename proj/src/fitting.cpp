#include "pucopula/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pucopula/closed_forms.hpp"
#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"
#include "pucopula/format.hpp"
#include "pucopula/roots.hpp"

namespace pucopula {
namespace {

std::vector<double> ranks(const std::vector<double>& column, TiePolicy policy) {
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> r(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    if (policy == TiePolicy::Average) {
      while (end < n && column[order[end]] == column[order[start]]) ++end;
    }
    const double shared = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      r[order[k]] = policy == TiePolicy::Average ? shared : static_cast<double>(k + 1);
    }
    start = end;
  }
  return r;
}

void check_tail_level(double t) {
  if (!(t > 0.5 && t < 1.0)) {
    throw DomainError("tail level t must lie in (0.5, 1), got " + format_double(t));
  }
}

}  // namespace

PseudoObservations pseudo_observations(const std::vector<std::vector<double>>& data,
                                       TiePolicy policy) {
  if (data.empty()) throw ParameterError("pseudo-observations need at least one column");
  const std::size_t n = data[0].size();
  if (n < 2) throw ParameterError("pseudo-observations need at least two rows");
  PseudoObservations pobs;
  pobs.tie_policy = policy;
  pobs.rows = n;
  const double denominator = static_cast<double>(n + 1);
  for (std::size_t c = 0; c < data.size(); ++c) {
    const auto& column = data[c];
    if (column.size() != n) throw ParameterError("data columns differ in length");
    for (double x : column) {
      if (!std::isfinite(x)) {
        throw ParameterError("column " + std::to_string(c) + " has a non-finite entry");
      }
    }
    if (std::all_of(column.begin(), column.end(), [&](double x) { return x == column[0]; })) {
      throw ParameterError("column " + std::to_string(c) + " is constant (degenerate)");
    }
    std::vector<double> r = ranks(column, policy);
    for (double& x : r) x /= denominator;
    pobs.columns.push_back(std::move(r));
  }
  return pobs;
}

double empirical_correlation(const PseudoObservations& pobs) {
  if (pobs.dimension() != 2) {
    throw ParameterError("empirical correlation needs exactly two columns, got " +
                         std::to_string(pobs.dimension()));
  }
  const auto& x = pobs.columns[0];
  const auto& y = pobs.columns[1];
  const double n = static_cast<double>(x.size());
  CompensatedSum sx;
  CompensatedSum sy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxy;
  CompensatedSum sxx;
  CompensatedSum syy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) {
    throw ParameterError("correlation is undefined for a zero-variance column");
  }
  return std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
}

double fit_negbin_beta(double target_rho) {
  const double low = negbin_rho(kNegBinBetaMin);
  const double high = negbin_rho(kNegBinBetaMax);
  if (!(target_rho >= low && target_rho <= high)) {
    throw ParameterError("target correlation " + format_double(target_rho) +
                         " is outside the attainable range [" + format_double(low) + ", " +
                         format_double(high) + "]");
  }
  const auto root = find_root([&](double b) { return negbin_rho(b) - target_rho; },
                              kNegBinBetaMin, kNegBinBetaMax, 1e-10);
  return root.root;
}

double poisson_grade_correlation(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("Poisson gamma must be finite and > 0, got " + format_double(gamma));
  }
  const double q = gamma / (1.0 + gamma);
  const double r = (1.0 + gamma) / (2.0 + gamma);
  const double p = 1.0 - q;
  const double cross = 1.0 - 2.0 * r * p / (1.0 - q * r) + r * r * p / (1.0 - q * r * r);
  return 12.0 * cross - 3.0;
}

CorrelationEstimate poisson_grade_correlation_mc(double gamma, std::size_t samples,
                                                 RandomStream rng) {
  if (samples < 2) throw ParameterError("Monte Carlo correlation needs at least two samples");
  const auto copula = PuCopula::diagonal(PartitionFamily::poisson(gamma));
  const SampleBatch batch = sample(copula, samples, rng);
  CompensatedSum sum;
  CompensatedSum squares;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double p = batch(k, 0) * batch(k, 1);
    sum += p;
    squares += p * p;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum.value() / n;
  const double variance = std::max(0.0, (squares.value() / n - mean * mean) * n / (n - 1.0));
  return {12.0 * mean - 3.0, 12.0 * std::sqrt(variance / n)};
}

PoissonFit fit_poisson_gamma(double target_rho, const PoissonFitOptions& options,
                             RandomStream& rng) {
  const double low = poisson_grade_correlation(kPoissonGammaMin);
  const double high = poisson_grade_correlation(kPoissonGammaMax);
  if (!(target_rho >= low && target_rho <= high)) {
    throw ParameterError("target correlation " + format_double(target_rho) +
                         " is outside the attainable range [" + format_double(low) + ", " +
                         format_double(high) + "]");
  }
  if (options.method == PoissonFitMethod::Exact) {
    const auto root = find_root([&](double g) { return poisson_grade_correlation(g) - target_rho; },
                                kPoissonGammaMin, kPoissonGammaMax, 1e-12);
    return {root.root, poisson_grade_correlation(root.root), 0.0, root.iterations};
  }
  if (options.iterations < 1) throw ParameterError("Monte Carlo fit needs at least one iteration");
  const std::size_t per_step =
      options.mc_budget / static_cast<std::size_t>(options.iterations + 1);
  if (per_step < 100) throw ParameterError("Monte Carlo budget is too small for the iteration count");
  // Every evaluation replays the same substream (common random numbers).
  const RandomStream common = rng.split(rng.next_u64());
  double lo = std::log(kPoissonGammaMin);
  double hi = std::log(kPoissonGammaMax);
  for (int step = 0; step < options.iterations; ++step) {
    const double mid = 0.5 * (lo + hi);
    const auto estimate = poisson_grade_correlation_mc(std::exp(mid), per_step, common);
    if (estimate.value < target_rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double gamma = std::exp(0.5 * (lo + hi));
  const auto achieved = poisson_grade_correlation_mc(gamma, per_step, common);
  if (std::abs(achieved.value - target_rho) > 4.0 * achieved.standard_error + 1e-3) {
    throw ConvergenceError("Monte Carlo budget exhausted before matching the target correlation",
                           gamma, achieved.standard_error);
  }
  return {gamma, achieved.value, achieved.standard_error, options.iterations};
}

PuCopula BernsteinFit::to_copula() const {
  const auto family = PartitionFamily::binomial(m);
  return PuCopula({family, family}, weights());
}

BernsteinFit bernstein_fit(const PseudoObservations& pobs, int m) {
  if (pobs.dimension() != 2) throw ParameterError("Bernstein fit needs exactly two columns");
  if (m < 2 || m > PartitionFamily::kMaxBinomialOrder) {
    throw ParameterError("Bernstein order m must be in [2, " +
                         std::to_string(PartitionFamily::kMaxBinomialOrder) + "]");
  }
  if (pobs.rows < static_cast<std::size_t>(m)) {
    throw ParameterError("Bernstein fit needs at least m observations");
  }
  const auto size = static_cast<std::size_t>(m);
  const double dm = m;
  auto box = [&](double x) {
    const double k = std::ceil(x * dm) - 1.0;
    return static_cast<std::size_t>(std::clamp(k, 0.0, dm - 1.0));
  };
  BernsteinFit fit;
  fit.m = m;
  fit.P.assign(size, std::vector<double>(size, 0.0));
  const double share = 1.0 / static_cast<double>(pobs.rows);
  for (std::size_t k = 0; k < pobs.rows; ++k) {
    fit.P[box(pobs.columns[0][k])][box(pobs.columns[1][k])] += share;
  }
  const double target = 1.0 / dm;
  auto max_deviation = [&]() {
    double worst = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      CompensatedSum row;
      CompensatedSum col;
      for (std::size_t j = 0; j < size; ++j) {
        row += fit.P[i][j];
        col += fit.P[j][i];
      }
      worst = std::max({worst, std::abs(row.value() - target), std::abs(col.value() - target)});
    }
    return worst;
  };
  for (int sweep = 0; sweep <= kMaxIpfSweeps; ++sweep) {
    const double deviation = max_deviation();
    if (deviation < kIpfTolerance) {
      fit.sweeps = sweep;
      return fit;
    }
    if (sweep == kMaxIpfSweeps) {
      throw ConvergenceError("marginal adjustment did not converge", deviation, deviation);
    }
    for (std::size_t i = 0; i < size; ++i) {
      CompensatedSum row;
      for (double e : fit.P[i]) row += e;
      for (double& e : fit.P[i]) e *= target / row.value();
    }
    for (std::size_t j = 0; j < size; ++j) {
      CompensatedSum col;
      for (std::size_t i = 0; i < size; ++i) col += fit.P[i][j];
      for (std::size_t i = 0; i < size; ++i) fit.P[i][j] *= target / col.value();
    }
  }
  return fit;
}

TailEstimate lambda_hat(std::span<const double> u, std::span<const double> v, double t,
                        Tail tail) {
  check_tail_level(t);
  if (u.size() != v.size() || u.empty()) {
    throw ParameterError("tail estimate needs two non-empty columns of equal length");
  }
  const double level = tail == Tail::Upper ? t : 1.0 - t;
  std::size_t count = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const bool joint = tail == Tail::Upper ? (u[k] > level && v[k] > level)
                                           : (u[k] < level && v[k] < level);
    if (joint) ++count;
  }
  const double n = static_cast<double>(u.size());
  const double p = static_cast<double>(count) / n;
  const double scale = 1.0 - t;
  return {p / scale, std::sqrt(p * (1.0 - p) / n) / scale, count, count < kMinTailCount};
}

TailEstimate lambda_hat(const SampleBatch& batch, double t, Tail tail) {
  if (batch.dimension != 2) throw ParameterError("tail estimate needs a bivariate sample");
  const auto u = batch.column(0);
  const auto v = batch.column(1);
  return lambda_hat(u, v, t, tail);
}

TailEstimate lambda_hat(const PseudoObservations& pobs, double t, Tail tail) {
  if (pobs.dimension() != 2) throw ParameterError("tail estimate needs two columns");
  return lambda_hat(pobs.columns[0], pobs.columns[1], t, tail);
}

TailEstimate lambda_hat(const PuCopula& copula, double t, Tail tail) {
  check_tail_level(t);
  const double scale = 1.0 - t;
  const TailMass mass =
      tail == Tail::Upper ? survival_mass(copula, t) : lower_mass(copula, scale);
  return {mass.value / scale, mass.error_bound / scale, 0, false};
}

}  // namespace pucopula
