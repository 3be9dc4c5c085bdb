#include "pucopula/families.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <mutex>

#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"
#include "pucopula/format.hpp"
#include "pucopula/quadrature.hpp"
#include "pucopula/variates.hpp"

namespace pucopula {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kAnchorInterval = 256;
constexpr std::size_t kLogSeriesRejectionLimit = 10'000'000;

void check_unit(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("argument must lie strictly inside (0, 1), got " + format_double(u));
  }
}

// L(u) = -ln(1 - u).
double exp_scale(double u) { return -std::log1p(-u); }

double log_binomial_coefficient(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(beta + i - 1, i) = prod_{k<i} (beta + k) / (k + 1).
double negbin_coefficient(double beta, std::size_t i) {
  if (i <= 64) {
    double c = 1.0;
    for (std::size_t k = 0; k < i; ++k) c *= (beta + static_cast<double>(k)) / static_cast<double>(k + 1);
    return c;
  }
  return std::exp(std::lgamma(beta + static_cast<double>(i)) -
                  std::lgamma(static_cast<double>(i) + 1.0) - std::lgamma(beta));
}

double binomial_coefficient(int n, std::size_t k) {
  const std::size_t kk = std::min<std::size_t>(k, static_cast<std::size_t>(n) - k);
  double c = 1.0;
  for (std::size_t j = 0; j < kk; ++j) {
    c = c * static_cast<double>(static_cast<std::size_t>(n) - j) / static_cast<double>(j + 1);
  }
  return c < 0x1.0p53 ? std::round(c) : c;
}

bool usable(double x) { return std::isnormal(x) || x == 0.0; }

// Integrand of beta_i in the variable x = L(u): (1 - e^{-x})^i e^{-x} / x.
double logseries_integrand(std::size_t i, double x) {
  const double one_minus = -std::expm1(-x);
  return std::exp(static_cast<double>(i) * std::log(one_minus) - x) / x;
}

// Integration window outside which the integrand is negligible relative to beta_i.
std::pair<double, double> logseries_window(std::size_t i) {
  const double li = std::log(static_cast<double>(i));
  return {std::max(0.0, li - 5.0), std::max(0.0, li) + 45.0};
}

double logseries_integral(std::size_t i, double a, double b) {
  const auto [lo, hi] = logseries_window(i);
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (!(a < b)) return 0.0;
  QuadratureOptions options;
  options.abs_tol = 0.0;
  options.rel_tol = 1e-13;
  options.max_intervals = 4000;
  try {
    return integrate_1d([i](double x) { return logseries_integrand(i, x); }, a, b, options).value;
  } catch (const ConvergenceError& e) {
    if (std::abs(e.error_estimate()) <= 1e-11 * std::abs(e.best_estimate())) return e.best_estimate();
    throw;
  }
}

}  // namespace

PartitionFamily::PartitionFamily(Kind kind) : kind_(kind) {
  std::visit(Overloaded{
                 [](const Binomial& b) {
                   if (b.m < 2 || b.m > kMaxBinomialOrder) {
                     throw ParameterError("binomial order m must be in [2, " +
                                          std::to_string(kMaxBinomialOrder) + "], got " +
                                          std::to_string(b.m));
                   }
                 },
                 [](const NegBinomial& n) {
                   if (!(n.beta > 0.0) || !std::isfinite(n.beta)) {
                     throw ParameterError("negative binomial beta must be finite and > 0, got " +
                                          format_double(n.beta));
                   }
                 },
                 [](const Poisson& p) {
                   if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) {
                     throw ParameterError("Poisson gamma must be finite and > 0, got " +
                                          format_double(p.gamma));
                   }
                 },
                 [](const LogSeries&) {},
             },
             kind_);
}

std::size_t PartitionFamily::first_index() const { return is<LogSeries>() ? 1 : 0; }

std::optional<std::size_t> PartitionFamily::last_index() const {
  if (is<Binomial>()) return static_cast<std::size_t>(as<Binomial>().m - 1);
  return std::nullopt;
}

bool PartitionFamily::in_support(std::size_t i) const {
  if (i < first_index()) return false;
  const auto last = last_index();
  return !last || i <= *last;
}

std::string PartitionFamily::describe() const {
  return std::visit(
      Overloaded{
          [](const Binomial& b) { return "binomial(m=" + std::to_string(b.m) + ")"; },
          [](const NegBinomial& n) { return "negbin(beta=" + format_double(n.beta) + ")"; },
          [](const Poisson& p) { return "poisson(gamma=" + format_double(p.gamma) + ")"; },
          [](const LogSeries&) { return std::string("logseries"); },
      },
      kind_);
}

double log_point_mass(const PartitionFamily& family, std::size_t i, double u) {
  check_unit(u);
  if (!family.in_support(i)) return kNegInf;
  const double di = static_cast<double>(i);
  return std::visit(
      Overloaded{
          [&](const Binomial& b) {
            const double n = b.m - 1;
            return log_binomial_coefficient(n, di) + di * std::log(u) + (n - di) * std::log1p(-u);
          },
          [&](const NegBinomial& n) {
            const double coef = i == 0 ? 0.0
                                       : std::lgamma(n.beta + di) - std::lgamma(di + 1.0) -
                                             std::lgamma(n.beta);
            return coef + n.beta * std::log1p(-u) + di * std::log(u);
          },
          [&](const Poisson& p) {
            const double poly = i == 0 ? 0.0 : di * std::log(p.gamma * exp_scale(u));
            return p.gamma * std::log1p(-u) + poly - std::lgamma(di + 1.0);
          },
          [&](const LogSeries&) {
            return di * std::log(u) - std::log(di) - std::log(exp_scale(u));
          },
      },
      family.kind());
}

double point_mass(const PartitionFamily& family, std::size_t i, double u) {
  check_unit(u);
  if (!family.in_support(i)) return 0.0;
  const double di = static_cast<double>(i);
  const double direct = std::visit(
      Overloaded{
          [&](const Binomial& b) {
            return binomial_coefficient(b.m - 1, i) * std::pow(u, di) *
                   std::pow(1.0 - u, static_cast<double>(b.m - 1) - di);
          },
          [&](const NegBinomial& n) {
            return negbin_coefficient(n.beta, i) * std::pow(u, di) * std::pow(1.0 - u, n.beta);
          },
          [&](const Poisson& p) {
            const double x = p.gamma * exp_scale(u);
            double poly = 1.0;
            if (i <= 64) {
              for (std::size_t k = 1; k <= i; ++k) poly *= x / static_cast<double>(k);
            } else {
              poly = std::exp(di * std::log(x) - std::lgamma(di + 1.0));
            }
            return std::pow(1.0 - u, p.gamma) * poly;
          },
          [&](const LogSeries&) { return std::pow(u, di) / (di * exp_scale(u)); },
      },
      family.kind());
  if (std::isnormal(direct)) return direct;
  return std::exp(log_point_mass(family, i, u));
}

double weight(const PartitionFamily& family, std::size_t i) {
  if (!family.in_support(i)) {
    throw IndexError("index " + std::to_string(i) + " is outside the support of " +
                     family.describe());
  }
  const double di = static_cast<double>(i);
  return std::visit(
      Overloaded{
          [](const Binomial& b) { return 1.0 / b.m; },
          [&](const NegBinomial& n) { return n.beta / ((n.beta + di) * (n.beta + di + 1.0)); },
          [&](const Poisson& p) {
            return std::pow(p.gamma / (1.0 + p.gamma), di) / (1.0 + p.gamma);
          },
          [&](const LogSeries&) {
            thread_local LogSeriesBetas betas;
            return betas(i) / di;
          },
      },
      family.kind());
}

double weight_or_zero(const PartitionFamily& family, std::size_t i) {
  return family.in_support(i) ? weight(family, i) : 0.0;
}

double log_weight(const PartitionFamily& family, std::size_t i) {
  if (family.is<Poisson>() && family.in_support(i)) {
    const double g = family.as<Poisson>().gamma;
    return static_cast<double>(i) * std::log(g / (1.0 + g)) - std::log1p(g);
  }
  return std::log(weight(family, i));
}

double component_density(const PartitionFamily& family, std::size_t i, double u) {
  const double w = weight(family, i);
  const double p = point_mass(family, i, u);
  if (std::isnormal(p) && std::isnormal(w)) return p / w;
  return std::exp(log_point_mass(family, i, u) - log_weight(family, i));
}

double weight_tail(const PartitionFamily& family, std::size_t first) {
  first = std::max(first, family.first_index());
  const double df = static_cast<double>(first);
  return std::visit(
      Overloaded{
          [&](const Binomial& b) {
            return first >= static_cast<std::size_t>(b.m) ? 0.0 : (b.m - df) / b.m;
          },
          [&](const NegBinomial& n) { return n.beta / (n.beta + df); },
          [&](const Poisson& p) { return std::pow(p.gamma / (1.0 + p.gamma), df); },
          [&](const LogSeries&) {
            if (first <= 1) return 1.0;
            auto table = LogSeriesBetaTable::snapshot(first);
            CompensatedSum head;
            for (std::size_t i = 1; i < first; ++i) head += (*table)[i] / static_cast<double>(i);
            return std::max(0.0, 1.0 - head.value());
          },
      },
      family.kind());
}

double ratio_limit(const PartitionFamily& family, double u) {
  if (family.is<NegBinomial>() || family.is<LogSeries>()) return u;
  return 0.0;
}

ComponentMasses component_masses(const PartitionFamily& family, std::size_t i, double t) {
  check_unit(t);
  if (!family.in_support(i)) return {};
  const double a = weight(family, i);
  const double di = static_cast<double>(i);
  return std::visit(
      Overloaded{
          [&](const Binomial& b) {
            const double bb = static_cast<double>(b.m) - di;
            return ComponentMasses{a * boost::math::ibeta(di + 1.0, bb, t),
                                   a * boost::math::ibetac(di + 1.0, bb, t)};
          },
          [&](const NegBinomial& n) {
            return ComponentMasses{a * boost::math::ibeta(di + 1.0, n.beta + 1.0, t),
                                   a * boost::math::ibetac(di + 1.0, n.beta + 1.0, t)};
          },
          [&](const Poisson& p) {
            const double x = (1.0 + p.gamma) * exp_scale(t);
            return ComponentMasses{a * boost::math::gamma_p(di + 1.0, x),
                                   a * boost::math::gamma_q(di + 1.0, x)};
          },
          [&](const LogSeries&) {
            const double x = exp_scale(t);
            const double lower = logseries_integral(i, 0.0, x) / di;
            if (lower <= 0.5 * a) return ComponentMasses{lower, std::max(0.0, a - lower)};
            const double upper = logseries_integral(i, x, std::numeric_limits<double>::max()) / di;
            return ComponentMasses{std::max(0.0, a - upper), upper};
          },
      },
      family.kind());
}

std::uint64_t weight_distribution_sample(const PartitionFamily& family, RandomStream& rng) {
  return weight_distribution_sample_from(family, family.first_index(), rng);
}

std::uint64_t weight_distribution_sample_from(const PartitionFamily& family, std::uint64_t first,
                                              RandomStream& rng) {
  first = std::max<std::uint64_t>(first, family.first_index());
  constexpr double kSaturation = 9.0e18;
  return std::visit(
      Overloaded{
          [&](const Binomial& b) -> std::uint64_t {
            const auto m = static_cast<std::uint64_t>(b.m);
            if (first >= m) {
              throw IndexError("no binomial index at or above " + std::to_string(first));
            }
            const auto span = static_cast<double>(m - first);
            return std::min(m - 1, first + static_cast<std::uint64_t>(span * rng.uniform()));
          },
          [&](const NegBinomial& n) -> std::uint64_t {
            // Inversion of the telescoping tail P(I >= k | I >= first) = (beta + first) / (beta + k).
            const double w = rng.uniform();
            const double x = std::ceil((n.beta + static_cast<double>(first)) / w - n.beta - 1.0);
            if (!(x < kSaturation)) return static_cast<std::uint64_t>(kSaturation);
            return std::max(first, static_cast<std::uint64_t>(std::max(0.0, x)));
          },
          [&](const Poisson& p) -> std::uint64_t {
            const std::uint64_t g = geometric_sample(1.0 / (1.0 + p.gamma), rng);
            return g > std::numeric_limits<std::uint64_t>::max() - first
                       ? std::numeric_limits<std::uint64_t>::max()
                       : first + g;
          },
          [&](const LogSeries&) -> std::uint64_t {
            // alpha is the log-series law mixed over a uniform parameter.
            for (std::size_t attempt = 0; attempt < kLogSeriesRejectionLimit; ++attempt) {
              const double p = rng.uniform();
              const std::uint64_t i = log_series_sample(p, rng);
              if (i >= first) return i;
            }
            throw ConvergenceError("log-series tail index rejection exceeded its attempt budget",
                                   static_cast<double>(first), 0.0);
          },
      },
      family.kind());
}

double logseries_beta_alternating(std::size_t i) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  if (i == 0) throw IndexError("log-series weights start at index 1");
  Float sum = 0;
  Float coefficient = 1;
  for (std::size_t j = 1; j <= i; ++j) {
    coefficient = coefficient * Float(i - j + 1) / Float(j);
    const Float term = coefficient * boost::multiprecision::log(Float(j + 1));
    sum += (j % 2 == 1) ? term : Float(-term);
  }
  return sum.convert_to<double>();
}

double logseries_beta_quadrature(std::size_t i) {
  if (i == 0) throw IndexError("log-series weights start at index 1");
  return logseries_integral(i, 0.0, std::numeric_limits<double>::max());
}

std::shared_ptr<const std::vector<double>> LogSeriesBetaTable::snapshot(std::size_t min_size) {
  static std::mutex mutex;
  static std::shared_ptr<const std::vector<double>> current =
      std::make_shared<const std::vector<double>>(1, 0.0);
  std::lock_guard<std::mutex> lock(mutex);
  if (current->size() >= min_size) return current;
  auto grown = std::make_shared<std::vector<double>>(*current);
  const std::size_t target = std::max(min_size, current->size() + current->size() / 2);
  grown->reserve(target);
  for (std::size_t i = grown->size(); i < target; ++i) {
    grown->push_back(i <= kLogSeriesAlternatingLimit ? logseries_beta_alternating(i)
                                                     : logseries_beta_quadrature(i));
  }
  current = std::move(grown);
  return current;
}

double LogSeriesBetas::operator()(std::size_t i) {
  if (!table_ || i >= table_->size()) table_ = LogSeriesBetaTable::snapshot(i + 1);
  return (*table_)[i];
}

PointMassSequence::PointMassSequence(const PartitionFamily& family, double u, std::size_t first)
    : family_(&family), u_(u), index_(first) {
  check_unit(u);
  rate_ = family.is<Poisson>() ? family.as<Poisson>().gamma * exp_scale(u) : u;
  anchor();
}

double PointMassSequence::log_value() const {
  return value_ > 0.0 ? std::log(value_) : log_term_;
}

void PointMassSequence::anchor() {
  since_anchor_ = 0;
  if (!family_->in_support(index_)) {
    value_ = 0.0;
    log_term_ = kNegInf;
    return;
  }
  log_term_ = log_point_mass(*family_, index_, u_);
  value_ = log_term_ > -700.0 ? point_mass(*family_, index_, u_) : 0.0;
}

void PointMassSequence::advance() {
  ++index_;
  if (family_->is<Binomial>() || ++since_anchor_ >= kAnchorInterval || log_term_ <= -700.0 ||
      !usable(value_)) {
    anchor();
    return;
  }
  const double di = static_cast<double>(index_);
  if (family_->is<NegBinomial>()) {
    value_ *= rate_ * (family_->as<NegBinomial>().beta + di - 1.0) / di;
  } else if (family_->is<Poisson>()) {
    value_ *= rate_ / di;
  } else {
    value_ *= rate_ * (di - 1.0) / di;
  }
  if (!std::isnormal(value_)) anchor();
}

}  // namespace pucopula
