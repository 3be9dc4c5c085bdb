#include "pucopula/closed_forms.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"
#include "pucopula/families.hpp"
#include "pucopula/format.hpp"

namespace pucopula {
namespace {

void check_point(double u, double v) {
  if (!(u > 0.0 && u < 1.0) || !(v > 0.0 && v < 1.0)) {
    throw DomainError("point must lie strictly inside (0, 1)^2, got (" + format_double(u) + ", " +
                      format_double(v) + ")");
  }
}

// 1 - uv without cancellation when uv is close to 1.
double one_minus_product(double u, double v) { return (1.0 - u) + u * (1.0 - v); }

struct Monomial {
  double coefficient;
  int pu;
  int pv;
};

// H(u, v) of the example5_density closed form, one entry per monomial.
constexpr std::array<Monomial, 28> kExample5Polynomial = {{
    {150, 7, 7}, {-450, 6, 6}, {-10, 7, 3}, {510, 5, 5}, {-10, 3, 7}, {-30, 5, 4}, {-10, 3, 5},
    {30, 2, 6},  {-300, 4, 4}, {30, 6, 2},  {-5, 3, 4},  {80, 4, 3},  {-30, 5, 1}, {94, 3, 3},
    {30, 2, 4},  {-30, 1, 5},  {-60, 3, 2}, {15, 2, 3},  {10, 4, 0},  {18, 2, 2},  {-30, 1, 3},
    {10, 0, 4},  {-15, 1, 2},  {10, 0, 2},  {-18, 1, 1}, {10, 1, 0},  {5, 0, 1},   {6, 0, 0},
}};

BigInt factorial(long n) {
  BigInt f = 1;
  for (long k = 2; k <= n; ++k) f *= k;
  return f;
}

BigInt power_of_two(long n) { return BigInt(1) << static_cast<unsigned>(n); }

}  // namespace

double negbin_density_finite(int beta, double u, double v) {
  if (beta < 1 || beta > kMaxFiniteDensityBeta) {
    throw ParameterError("finite-sum density needs an integer beta in [1, " +
                         std::to_string(kMaxFiniteDensityBeta) + "], got " + std::to_string(beta));
  }
  check_point(u, v);
  const double z = u * v;
  // Coefficients C(beta-1, i) C(beta+1, i), summed by Horner's rule in z.
  std::array<double, kMaxFiniteDensityBeta> coefficients{};
  double left = 1.0;
  double right = 1.0;
  for (int i = 0; i < beta; ++i) {
    coefficients[static_cast<std::size_t>(i)] = left * right;
    left = left * (beta - 1 - i) / (i + 1);
    right = right * (beta + 1 - i) / (i + 1);
  }
  double poly = 0.0;
  for (int i = beta - 1; i >= 0; --i) poly = poly * z + coefficients[static_cast<std::size_t>(i)];
  const double b = beta;
  const double w = one_minus_product(u, v);
  const double log_scale = b * (std::log1p(-u) + std::log1p(-v)) - (2.0 * b + 1.0) * std::log(w);
  const double scale = std::pow((1.0 - u) * (1.0 - v), b) / std::pow(w, 2.0 * b + 1.0);
  return (b + 1.0) * poly * (std::isnormal(scale) ? scale : std::exp(log_scale));
}

TailDepResult negbin_lambda_u(int beta) {
  if (beta < 1 || beta > kMaxLambdaBeta) {
    throw ParameterError("lambda_U closed form needs an integer beta in [1, " +
                         std::to_string(kMaxLambdaBeta) + "], got " + std::to_string(beta));
  }
  const long b = beta;
  Rational outer = 0;
  for (long k = 0; k <= b; ++k) {
    Rational inner = 0;
    for (long j = 0; j <= b + k - 2; ++j) {
      const Rational halving(power_of_two(j + 1) - 1, power_of_two(j + 1));
      const Rational term = Rational(binomial(b + k, j + 2), BigInt(j + 1)) * halving;
      if (j % 2 == 0) {
        inner -= term;
      } else {
        inner += term;
      }
    }
    const Rational factor(binomial(b, k), BigInt(b + k));
    if (k % 2 == 0) {
      outer += factor * inner;
    } else {
      outer -= factor * inner;
    }
  }
  const BigInt g = factorial(b - 1);
  const Rational prefactor(2 * factorial(2 * b - 1), g * g);
  const Rational lambda = prefactor * outer;
  return {lambda, lambda.to_double()};
}

double trigamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw DomainError("trigamma is evaluated only for finite z > 0 (poles at z <= 0), got " +
                      format_double(z));
  }
  CompensatedSum shifted;
  while (z < 10.0) {
    shifted += 1.0 / (z * z);
    z += 1.0;
  }
  // Asymptotic series 1/z + 1/(2z^2) + sum_k B_2k / z^(2k+1) through z^-13.
  const double r = 1.0 / z;
  const double r2 = r * r;
  const double tail =
      r2 * (1.0 / 6.0 +
            r2 * (-1.0 / 30.0 +
                  r2 * (1.0 / 42.0 + r2 * (-1.0 / 30.0 + r2 * (5.0 / 66.0 + r2 * (-691.0 / 2730.0))))));
  shifted += r * (1.0 + 0.5 * r + tail);
  return shifted.value();
}

double negbin_rho(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ParameterError("rho(beta) requires finite beta > 0, got " + format_double(beta));
  }
  const double b1 = beta + 1.0;
  return 3.0 * beta * (2.0 * b1 * b1 * trigamma(beta + 2.0) - 2.0 * beta - 1.0);
}

double negbin_rho_series(double beta, std::size_t terms) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ParameterError("rho(beta) requires finite beta > 0, got " + format_double(beta));
  }
  if (terms < 16 || terms % 4 != 0) {
    throw ParameterError("rho series needs a term count divisible by 4 and at least 16");
  }
  CompensatedSum sum;
  std::array<double, 3> partial{};
  for (std::size_t i = 0; i < terms; ++i) {
    const double di = static_cast<double>(i);
    const double a = beta + di;
    const double c = a + 2.0;
    sum += (di + 1.0) * (di + 1.0) / (a * (a + 1.0) * c * c);
    if (i + 1 == terms / 4) partial[0] = sum.value();
    if (i + 1 == terms / 2) partial[1] = sum.value();
  }
  partial[2] = sum.value();
  const double r0 = 2.0 * partial[1] - partial[0];
  const double r1 = 2.0 * partial[2] - partial[1];
  const double extrapolated = (4.0 * r1 - r0) / 3.0;
  return 12.0 * beta * extrapolated - 3.0;
}

double poisson_density(double gamma, double u, double v, const SeriesPolicy& policy) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("Poisson gamma must be finite and > 0, got " + format_double(gamma));
  }
  check_point(u, v);
  policy.validate();
  const double x = gamma * (1.0 + gamma) * std::log1p(-u) * std::log1p(-v);
  const double log_x = std::log(x);
  // Terms x^i / (i!)^2 peak near i = sqrt(x); they are scaled by the peak to stay finite.
  const double peak = std::floor(std::sqrt(x));
  const double shift = peak * log_x - 2.0 * std::lgamma(peak + 1.0);
  const auto series = sum_series(
      [&](std::size_t i) {
        const double di = static_cast<double>(i);
        return std::exp(di * log_x - 2.0 * std::lgamma(di + 1.0) - shift);
      },
      policy);
  const double log_prefix = std::log1p(gamma) + gamma * (std::log1p(-u) + std::log1p(-v)) + shift;
  return std::exp(log_prefix) * series.value;
}

double poisson_density_bound(double gamma, double u, double v) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("Poisson gamma must be finite and > 0, got " + format_double(gamma));
  }
  check_point(u, v);
  const double k = gamma - std::sqrt(gamma * (1.0 + gamma));
  return (1.0 + gamma) * std::pow((1.0 - u) * (1.0 - v), k);
}

double logseries_density(double u, double v, const SeriesPolicy& policy) {
  check_point(u, v);
  policy.validate();
  const double z = u * v;
  LogSeriesBetas betas;
  double power = 1.0;
  const auto series = sum_series(
      [&](std::size_t i) {
        power *= z;
        return power / (static_cast<double>(i) * betas(i));
      },
      policy, 1, z);
  return series.value / (std::log1p(-u) * std::log1p(-v));
}

double example5_polynomial(double u, double v) {
  std::array<double, 8> pu{};
  std::array<double, 8> pv{};
  pu[0] = pv[0] = 1.0;
  for (std::size_t k = 1; k < 8; ++k) {
    pu[k] = pu[k - 1] * u;
    pv[k] = pv[k - 1] * v;
  }
  CompensatedSum h;
  for (const auto& m : kExample5Polynomial) {
    h += m.coefficient * pu[static_cast<std::size_t>(m.pu)] * pv[static_cast<std::size_t>(m.pv)];
  }
  return h.value();
}

double example5_density(double u, double v) {
  check_point(u, v);
  const double w = one_minus_product(u, v);
  return (1.0 - u) * (1.0 - v) / (5.0 * w * w * w) * example5_polynomial(u, v);
}

double example6_density(double u, double v) {
  check_point(u, v);
  const double w = (1.0 - u) + u * (1.0 - v) * (1.0 + v);
  const double w2 = w * w;
  const double v2 = v * v;
  return 2.0 * (1.0 - u) * (1.0 - v) * (1.0 - v) *
         (1.0 + 2.0 * v + 5.0 * u * v2 + 4.0 * u * v2 * v) / (w2 * w2);
}

double example6_cdf(double x, double y) {
  check_point(x, y);
  const double y2 = y * y;
  const double y3 = y2 * y;
  const double w = (1.0 - x) + x * (1.0 - y) * (1.0 + y);
  const double numerator =
      2.0 - x - 2.0 * x * y3 + x * y3 * y + x * x * y3 - 2.0 * y2 + y3;
  return x * y * numerator / (w * w);
}

Rational lambda_u_example6() { return Rational(BigInt(5), BigInt(9)); }

double bernstein_density(int m, double u, double v) {
  if (m < 2 || m > PartitionFamily::kMaxBinomialOrder) {
    throw ParameterError("Bernstein order m must be in [2, " +
                         std::to_string(PartitionFamily::kMaxBinomialOrder) + "], got " +
                         std::to_string(m));
  }
  check_point(u, v);
  const double z = u * v;
  const double w = (1.0 - u) * (1.0 - v);
  const double n = m - 1;
  const double log_z = std::log(z);
  const double log_w = std::log(w);
  CompensatedSum sum;
  if (m <= 60) {
    double c = 1.0;
    for (int i = 0; i < m; ++i) {
      sum += c * c * std::pow(z, i) * std::pow(w, m - 1 - i);
      c = std::round(c * (m - 1 - i) / (i + 1));
    }
    return m * sum.value();
  }
  for (int i = 0; i < m; ++i) {
    const double di = i;
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(di + 1.0) - std::lgamma(n - di + 1.0);
    sum += std::exp(2.0 * log_c + di * log_z + (n - di) * log_w);
  }
  return m * sum.value();
}

bool vandermonde_check(int beta) {
  if (beta < 1 || beta > kMaxFiniteDensityBeta) {
    throw ParameterError("Vandermonde check needs an integer beta in [1, " +
                         std::to_string(kMaxFiniteDensityBeta) + "], got " + std::to_string(beta));
  }
  BigInt lhs = 0;
  for (long i = 0; i < beta; ++i) lhs += binomial(beta - 1, i) * binomial(beta + 1, i);
  return lhs == binomial(2L * beta, beta - 1);
}

}  // namespace pucopula
