#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pucopula/closed_forms.hpp"
#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"
#include "pucopula/format.hpp"
#include "pucopula/quadrature.hpp"
#include "pucopula/random.hpp"
#include "pucopula/rational.hpp"
#include "pucopula/roots.hpp"
#include "pucopula/series.hpp"
#include "pucopula/variates.hpp"
#include "test_support.hpp"

using namespace pucopula;

TEST_CASE("integrate_1d reproduces elementary integrals") {
  const auto beta22 = integrate_1d([](double u) { return 6.0 * u * (1.0 - u); }, 0.0, 1.0,
                                   {1e-13, 0.0, 5000});
  CHECK(beta22.value == doctest::Approx(1.0).epsilon(1e-12));

  auto inv_log = [](int power) {
    return [power](double u) { return std::pow(u, power) / -std::log1p(-u); };
  };
  CHECK(std::abs(integrate_1d(inv_log(1), 0.0, 1.0, {1e-12}).value - std::log(2.0)) < 1e-10);
  // alternating sum sum_j C(2,j) (-1)^(j+1) ln(j+1) = 2 ln 2 - ln 3
  CHECK(std::abs(integrate_1d(inv_log(2), 0.0, 1.0, {1e-12}).value -
                 (2.0 * std::log(2.0) - std::log(3.0))) < 1e-10);
}

TEST_CASE("integrate_1d is exact on polynomials of the panel degree") {
  for (int p = 0; p <= 20; ++p) {
    const auto r = integrate_1d([p](double x) { return std::pow(x, p); }, 0.0, 1.0, {1e-13});
    CHECK(std::abs(r.value - 1.0 / (p + 1)) < 1e-14);
  }
}

TEST_CASE("integrate_1d handles integrable endpoint singularities") {
  const auto r = integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-10});
  CHECK(std::abs(r.value - 2.0) < 1e-9);
}

TEST_CASE("integrate_1d reports non-convergence with its best estimate") {
  QuadratureOptions tight{1e-14, 0.0, 3};
  try {
    integrate_1d([](double x) { return std::sin(200.0 * x); }, 0.0, 1.0, tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.best_estimate()));
    CHECK(e.error_estimate() > 0.0);
  }
}

TEST_CASE("integrate_2d on a rectangle") {
  const auto r = integrate_2d([](double x, double y) { return x * y * y; }, 0.0, 1.0, 0.0, 2.0);
  CHECK(std::abs(r.value - 0.5 * 8.0 / 3.0) < 1e-9);
}

TEST_CASE("mixed_second_difference of a smooth function") {
  const double d = mixed_second_difference([](double x, double y) { return x * x * y * y * y; },
                                           0.4, 0.6, 1e-3);
  CHECK(std::abs(d - 6.0 * 0.4 * 0.36) < 1e-6);
}

TEST_CASE("sum_series examples") {
  SeriesPolicy policy;
  const auto geometric = sum_series([](std::size_t i) { return std::pow(0.5, i); }, policy, 0, 0.5);
  CHECK(std::abs(geometric.value - 2.0) <= 1e-12 * 2.0);

  const auto k1 = sum_series(
      [](std::size_t i) { return (i + 1.0) * (i + 2.0) / 2.0 * std::pow(0.5, i); }, policy, 0, 0.5);
  CHECK(std::abs(k1.value - 8.0) < 1e-11);

  double oracle = 0.0;
  double term = 1.0;
  for (int i = 0; i < 100; ++i) {
    oracle += term;
    term /= (i + 1.0) * (i + 1.0);
  }
  const auto bessel = sum_series(
      [](std::size_t i) { return 1.0 / std::pow(std::tgamma(i + 1.0), 2); }, policy);
  CHECK(std::abs(bessel.value - oracle) < 1e-12 * oracle);
}

TEST_CASE("sum_series result does not depend on max_terms after convergence") {
  auto term = [](std::size_t i) { return std::pow(0.9, i) / (i + 1.0); };
  SeriesPolicy small;
  small.max_terms = 1000;
  SeriesPolicy large;
  large.max_terms = 100000;
  const double a = sum_series(term, small, 0, 0.9).value;
  const double b = sum_series(term, large, 0, 0.9).value;
  CHECK(std::abs(a - b) <= 2e-12 * std::abs(a));
  CHECK(std::abs(a - std::log(10.0) / 0.9) < 1e-10);
}

TEST_CASE("sum_series throws a truncation error carrying the partial sum") {
  SeriesPolicy policy;
  policy.max_terms = 50;
  try {
    sum_series([](std::size_t i) { return 1.0 / (i + 1.0); }, policy);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(e.terms() == 50);
    CHECK(e.partial_sum() > 4.0);
  }
}

TEST_CASE("SeriesPolicy validation") {
  SeriesPolicy bad;
  bad.rel_tolerance = 0.1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad.rel_tolerance = 1e-12;
  bad.max_terms = 5;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("find_root examples") {
  const auto sqrt2 = find_root([](double x) { return x * x - 2.0; }, 1.0, 2.0, 1e-14);
  CHECK(std::abs(sqrt2.root - std::sqrt(2.0)) < 1e-12);

  const auto b2 = find_root([](double b) { return negbin_rho(b) - 0.6529; }, 1.0, 4.0, 1e-12);
  CHECK(std::abs(b2.root - 2.0) < 0.01);
  const auto b4 = find_root([](double b) { return negbin_rho(b) - 0.7937; }, 2.0, 6.0, 1e-12);
  CHECK(std::abs(b4.root - 4.0) < 0.01);

  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), BracketError);
}

TEST_CASE("Rational arithmetic stays reduced") {
  const Rational a(BigInt(6), BigInt(-8));
  CHECK(a.numerator() == -3);
  CHECK(a.denominator() == 4);
  CHECK((Rational(1) / 3 + Rational(1) / 6) == Rational(BigInt(1), BigInt(2)));
  CHECK((Rational(1) / 2).to_string() == "1/2");
  CHECK(Rational(7).to_string() == "7");
  CHECK_THROWS_AS(Rational(BigInt(1), BigInt(0)), DomainError);
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(5, 7) == 0);
}

TEST_CASE("Rational arithmetic is associative and commutative on random triples") {
  std::mt19937_64 gen(12345);
  std::uniform_int_distribution<long long> num(-1000, 1000);
  std::uniform_int_distribution<long long> den(1, 1000);
  auto draw = [&] { return Rational(BigInt(num(gen)), BigInt(den(gen))); };
  for (int trial = 0; trial < 200; ++trial) {
    const Rational a = draw();
    const Rational b = draw();
    const Rational c = draw();
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    const Rational s = a * b + c;
    CHECK(gcd(abs(s.numerator()), s.denominator()) == 1);
    CHECK(s.denominator() > 0);
  }
}

TEST_CASE("CompensatedSum recovers cancelled low-order bits") {
  CompensatedSum s;
  s += 1.0;
  s += 1e100;
  s += 1.0;
  s -= 1e100;
  CHECK(s.value() == 2.0);
}

TEST_CASE("format_double prints the shortest round-trip form") {
  CHECK(format_double(1.0) == "1.0");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("RandomStream is reproducible and split streams differ") {
  RandomStream a(42);
  RandomStream b(42);
  for (int k = 0; k < 10; ++k) CHECK(a.next_u64() == b.next_u64());
  RandomStream root(42);
  RandomStream s1 = root.split(1);
  RandomStream s2 = root.split(2);
  CHECK(s1.next_u64() != s2.next_u64());
  RandomStream u(7);
  for (int k = 0; k < 1000; ++k) {
    const double x = u.uniform();
    CHECK((x > 0.0 && x < 1.0));
  }
}

TEST_CASE("gamma_sample with shape 1 is exponential") {
  RandomStream rng(3);
  std::vector<double> x(100000);
  for (double& v : x) v = gamma_sample(1.0, 2.5, rng);
  CHECK(std::abs(testing::mean(x) / 2.5 - 1.0) < 0.01);
}

TEST_CASE("gamma_sample with small shape has the right mean") {
  RandomStream rng(4);
  std::vector<double> x(200000);
  for (double& v : x) v = gamma_sample(0.3, 1.0, rng);
  CHECK(std::abs(testing::mean(x) - 0.3) < 0.01);
}

TEST_CASE("beta_sample(1, 1) passes a uniformity test") {
  RandomStream rng(5);
  std::vector<double> x(100000);
  for (double& v : x) v = beta_sample(1.0, 1.0, rng);
  CHECK(testing::ks_uniform(x) < testing::ks_critical_1pct(x.size()));
}

TEST_CASE("geometric_sample has mean (1 - p) / p") {
  RandomStream rng(6);
  const double gamma = 6.0;
  std::vector<double> x(100000);
  for (double& v : x) v = static_cast<double>(geometric_sample(1.0 / (1.0 + gamma), rng));
  CHECK(std::abs(testing::mean(x) - gamma) < 0.1);
}

TEST_CASE("log_series_sample matches its probability mass function") {
  RandomStream rng(8);
  const double p = 0.7;
  const int n = 200000;
  std::vector<int> counts(6, 0);
  for (int k = 0; k < n; ++k) {
    const auto x = log_series_sample(p, rng);
    if (x <= 5) ++counts[x];
  }
  for (int k = 1; k <= 5; ++k) {
    const double expected = -std::pow(p, k) / (k * std::log1p(-p));
    CHECK(std::abs(counts[k] / static_cast<double>(n) - expected) < 0.005);
  }
}

TEST_CASE("variate parameter errors") {
  RandomStream rng(1);
  CHECK_THROWS_AS(gamma_sample(0.0, 1.0, rng), ParameterError);
  CHECK_THROWS_AS(beta_sample(1.0, -1.0, rng), ParameterError);
  CHECK_THROWS_AS(geometric_sample(0.0, rng), ParameterError);
}
