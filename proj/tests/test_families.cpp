#include <doctest.h>

#include <cmath>
#include <vector>

#include "pucopula/errors.hpp"
#include "pucopula/families.hpp"
#include "pucopula/quadrature.hpp"
#include "pucopula/random.hpp"

using namespace pucopula;

namespace {

std::vector<PartitionFamily> all_families() {
  return {PartitionFamily::binomial(2),          PartitionFamily::binomial(5),
          PartitionFamily::negative_binomial(1), PartitionFamily::negative_binomial(2.5),
          PartitionFamily::poisson(1),           PartitionFamily::poisson(6),
          PartitionFamily::log_series()};
}

double integrate(const std::function<double(double)>& f) {
  return integrate_1d(f, 0.0, 1.0, {1e-12, 1e-12, 20000}).value;
}

}  // namespace

TEST_CASE("point_mass examples") {
  CHECK(point_mass(PartitionFamily::binomial(2), 0, 0.5) == doctest::Approx(0.5));
  CHECK(point_mass(PartitionFamily::negative_binomial(1), 0, 0.3) == doctest::Approx(0.7));
  CHECK(point_mass(PartitionFamily::poisson(1), 0, 0.5) == doctest::Approx(0.5));
  CHECK(std::abs(point_mass(PartitionFamily::log_series(), 1, 0.5) - 0.5 / std::log(2.0)) < 1e-15);
  CHECK(point_mass(PartitionFamily::binomial(3), 7, 0.5) == 0.0);
  CHECK(point_mass(PartitionFamily::log_series(), 0, 0.5) == 0.0);
}

TEST_CASE("point_mass rejects boundary points") {
  for (const auto& f : all_families()) {
    CHECK_THROWS_AS(point_mass(f, 1, 0.0), DomainError);
    CHECK_THROWS_AS(point_mass(f, 1, 1.0), DomainError);
    CHECK_THROWS_AS(point_mass(f, 1, std::nan("")), DomainError);
  }
}

TEST_CASE("family parameters are validated") {
  CHECK_THROWS_AS(PartitionFamily::binomial(1), ParameterError);
  CHECK_THROWS_AS(PartitionFamily::binomial(PartitionFamily::kMaxBinomialOrder + 1), ParameterError);
  CHECK_THROWS_AS(PartitionFamily::negative_binomial(0.0), ParameterError);
  CHECK_THROWS_AS(PartitionFamily::negative_binomial(INFINITY), ParameterError);
  CHECK_THROWS_AS(PartitionFamily::poisson(-1.0), ParameterError);
}

TEST_CASE("weight examples") {
  CHECK(weight(PartitionFamily::negative_binomial(1), 0) == doctest::Approx(0.5));
  CHECK(weight(PartitionFamily::poisson(1), 0) == doctest::Approx(0.5));
  CHECK(std::abs(weight(PartitionFamily::log_series(), 1) - std::log(2.0)) < 1e-15);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(weight(PartitionFamily::binomial(4), i) == doctest::Approx(0.25));
  }
  CHECK_THROWS_AS(weight(PartitionFamily::binomial(4), 4), IndexError);
  CHECK_THROWS_AS(weight(PartitionFamily::log_series(), 0), IndexError);
  CHECK(weight_or_zero(PartitionFamily::binomial(4), 4) == 0.0);
}

TEST_CASE("component_density examples") {
  CHECK(component_density(PartitionFamily::negative_binomial(1), 0, 0.3) == doctest::Approx(1.4));
  CHECK(component_density(PartitionFamily::binomial(2), 1, 0.5) == doctest::Approx(1.0));
  const double ln2 = std::log(2.0);
  CHECK(std::abs(component_density(PartitionFamily::log_series(), 1, 0.5) - 0.5 / (ln2 * ln2)) <
        1e-14);
}

TEST_CASE("point masses form a partition of unity") {
  for (const auto& f : all_families()) {
    for (double u : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      double total = 0.0;
      for (std::size_t i = f.first_index(); i < 5000; ++i) total += point_mass(f, i, u);
      CAPTURE(f.describe());
      CAPTURE(u);
      CHECK(total >= 1.0 - 1e-10);
      CHECK(total <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("weights sum to one") {
  for (const auto& f : all_families()) {
    double total = 0.0;
    const std::size_t n = f.is<NegBinomial>() || f.is<LogSeries>() ? 0 : 5000;
    for (std::size_t i = f.first_index(); i < n; ++i) total += weight_or_zero(f, i);
    if (f.is<NegBinomial>()) {
      // alpha_i telescopes: sum_{i<N} beta/((beta+i)(beta+i+1)) = 1 - beta/(beta+N)
      const double beta = f.as<NegBinomial>().beta;
      for (std::size_t i = 0; i < 100000; ++i) total += weight(f, i);
      CHECK(std::abs(total - (1.0 - beta / (beta + 100000.0))) < 1e-12);
      CHECK(std::abs(weight_tail(f, 100000) - beta / (beta + 100000.0)) < 1e-15);
    } else if (f.is<LogSeries>()) {
      // tail mass beyond N = 200 from quadrature of 1 - sum_{i<200} phi_i(u)
      double head = 0.0;
      for (std::size_t i = 1; i < 200; ++i) head += weight(f, i);
      const double tail = integrate([&](double u) {
        double s = 0.0;
        for (std::size_t i = 1; i < 200; ++i) s += point_mass(f, i, u);
        return 1.0 - s;
      });
      CHECK(std::abs(head + tail - 1.0) < 1e-9);
      CHECK(std::abs(weight_tail(f, 200) - tail) < 1e-9);
    } else {
      CAPTURE(f.describe());
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("weights match quadrature of the point masses") {
  for (const auto& f : all_families()) {
    for (std::size_t i = f.first_index(); i <= 20; ++i) {
      if (!f.in_support(i)) break;
      const double q = integrate([&](double u) { return point_mass(f, i, u); });
      CAPTURE(f.describe());
      CAPTURE(i);
      CHECK(std::abs(q - weight(f, i)) < 1e-9);
    }
  }
}

TEST_CASE("component densities integrate to one") {
  for (const auto& f : all_families()) {
    for (std::size_t i : {0, 1, 3, 10}) {
      if (!f.in_support(i)) continue;
      const double q = integrate([&](double u) { return component_density(f, i, u); });
      CAPTURE(f.describe());
      CAPTURE(i);
      CHECK(std::abs(q - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("log-series alternating sum agrees with quadrature") {
  for (std::size_t i = 1; i <= 15; ++i) {
    CAPTURE(i);
    CHECK(std::abs(logseries_beta_alternating(i) - logseries_beta_quadrature(i)) < 1e-8);
  }
  // independent check: beta_i = integral of u^i / L(u)
  for (std::size_t i : {1, 2, 5, 30}) {
    const double q = integrate([i](double u) { return std::pow(u, i) / -std::log1p(-u); });
    CHECK(std::abs(weight(PartitionFamily::log_series(), i) * i - q) < 1e-9);
  }
}

TEST_CASE("component_masses split each weight at t") {
  for (const auto& f : all_families()) {
    for (std::size_t i : {1, 2, 7}) {
      if (!f.in_support(i)) continue;
      const auto m = component_masses(f, i, 0.8);
      const double lower = integrate_1d([&](double u) { return point_mass(f, i, u); }, 0.0, 0.8,
                                        {1e-13, 1e-12})
                               .value;
      CAPTURE(f.describe());
      CHECK(std::abs(m.lower - lower) < 1e-10);
      CHECK(std::abs(m.lower + m.upper - weight(f, i)) < 1e-12);
    }
  }
}

TEST_CASE("PointMassSequence follows the direct formula") {
  for (const auto& f : all_families()) {
    for (double u : {0.05, 0.5, 0.97}) {
      PointMassSequence seq(f, u, f.first_index());
      for (int k = 0; k < 700; ++k) {
        const double direct = point_mass(f, seq.index(), u);
        CAPTURE(f.describe());
        CAPTURE(seq.index());
        CHECK(std::abs(seq.value() - direct) <= 1e-12 * direct + 1e-300);
        seq.advance();
      }
    }
  }
}

TEST_CASE("weight_distribution_sample frequencies") {
  const int n = 200000;
  RandomStream rng(11);
  std::vector<int> binom(3, 0);
  for (int k = 0; k < n; ++k) ++binom[weight_distribution_sample(PartitionFamily::binomial(3), rng)];
  for (int c : binom) CHECK(std::abs(c / static_cast<double>(n) - 1.0 / 3.0) < 0.005);

  auto frequency = [&](const PartitionFamily& f, std::uint64_t target) {
    int hits = 0;
    for (int k = 0; k < n; ++k) hits += weight_distribution_sample(f, rng) == target;
    return hits / static_cast<double>(n);
  };
  CHECK(std::abs(frequency(PartitionFamily::negative_binomial(1), 0) - 0.5) < 0.005);
  CHECK(std::abs(frequency(PartitionFamily::negative_binomial(2.5), 3) -
                 weight(PartitionFamily::negative_binomial(2.5), 3)) < 0.005);
  CHECK(std::abs(frequency(PartitionFamily::poisson(2), 0) - 1.0 / 3.0) < 0.005);
  CHECK(std::abs(frequency(PartitionFamily::log_series(), 1) - std::log(2.0)) < 0.005);
  CHECK(std::abs(frequency(PartitionFamily::log_series(), 2) -
                 weight(PartitionFamily::log_series(), 2)) < 0.005);
}

TEST_CASE("weight_distribution_sample_from respects the lower index") {
  RandomStream rng(12);
  const auto f = PartitionFamily::negative_binomial(1);
  const int n = 100000;
  int at_first = 0;
  for (int k = 0; k < n; ++k) {
    const auto i = weight_distribution_sample_from(f, 5, rng);
    REQUIRE(i >= 5);
    at_first += i == 5;
  }
  CHECK(std::abs(at_first / static_cast<double>(n) - weight(f, 5) / weight_tail(f, 5)) < 0.005);
  CHECK_THROWS_AS(weight_distribution_sample_from(PartitionFamily::binomial(3), 3, rng), IndexError);
}

TEST_CASE("describe and support") {
  CHECK(PartitionFamily::negative_binomial(2).describe() == "negbin(beta=2.0)");
  CHECK(PartitionFamily::binomial(2).describe() == "binomial(m=2)");
  CHECK(PartitionFamily::log_series().first_index() == 1);
  CHECK(PartitionFamily::binomial(4).last_index() == 3u);
  CHECK_FALSE(PartitionFamily::poisson(1).last_index().has_value());
  CHECK(ratio_limit(PartitionFamily::negative_binomial(3), 0.4) == 0.4);
  CHECK(ratio_limit(PartitionFamily::poisson(3), 0.4) == 0.0);
}
