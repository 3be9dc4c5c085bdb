#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pucopula/random.hpp"

namespace pucopula {

/// Binomial point masses C(m-1, i) u^i (1-u)^(m-1-i), i = 0..m-1 (Bernstein copulas).
struct Binomial {
  int m = 2;
  friend bool operator==(const Binomial&, const Binomial&) = default;
};

/// Negative binomial point masses C(beta+i-1, i) (1-u)^beta u^i, i >= 0.
struct NegBinomial {
  double beta = 1.0;
  friend bool operator==(const NegBinomial&, const NegBinomial&) = default;
};

/// Poisson point masses (1-u)^gamma (gamma L(u))^i / i!, L(u) = -ln(1-u), i >= 0.
struct Poisson {
  double gamma = 1.0;
  friend bool operator==(const Poisson&, const Poisson&) = default;
};

/// Log-series point masses u^i / (i L(u)), i >= 1.
struct LogSeries {
  friend bool operator==(const LogSeries&, const LogSeries&) = default;
};

/// One of the four partition-of-unity families. Parameters are validated on
/// construction, so every PartitionFamily value is usable.
class PartitionFamily {
 public:
  using Kind = std::variant<Binomial, NegBinomial, Poisson, LogSeries>;

  static constexpr int kMaxBinomialOrder = 1000;

  PartitionFamily(Kind kind);  // NOLINT: implicit conversion from a family kind is intended

  static PartitionFamily binomial(int m) { return PartitionFamily(Binomial{m}); }
  static PartitionFamily negative_binomial(double beta) {
    return PartitionFamily(NegBinomial{beta});
  }
  static PartitionFamily poisson(double gamma) { return PartitionFamily(Poisson{gamma}); }
  static PartitionFamily log_series() { return PartitionFamily(LogSeries{}); }

  const Kind& kind() const { return kind_; }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(kind_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(kind_);
  }

  /// Smallest index with a positive weight (1 for the log-series family).
  std::size_t first_index() const;
  /// Largest supported index, if the support is finite.
  std::optional<std::size_t> last_index() const;
  bool in_support(std::size_t i) const;

  /// Human-readable descriptor, e.g. "negbin(beta=2)".
  std::string describe() const;

  friend bool operator==(const PartitionFamily&, const PartitionFamily&) = default;

 private:
  Kind kind_;
};

/// phi_i(u). Zero outside the support; DomainError unless 0 < u < 1.
double point_mass(const PartitionFamily& family, std::size_t i, double u);

/// ln phi_i(u); -infinity outside the support.
double log_point_mass(const PartitionFamily& family, std::size_t i, double u);

/// alpha_i = integral of phi_i over (0, 1). IndexError outside the support.
double weight(const PartitionFamily& family, std::size_t i);

/// alpha_i, or zero outside the support.
double weight_or_zero(const PartitionFamily& family, std::size_t i);

double log_weight(const PartitionFamily& family, std::size_t i);

/// f_i(u) = phi_i(u) / alpha_i, a probability density on (0, 1).
double component_density(const PartitionFamily& family, std::size_t i, double u);

/// Sum of alpha_i over i >= first.
double weight_tail(const PartitionFamily& family, std::size_t first);

/// Limit of phi_{i+1}(u) / phi_i(u) as i grows: u for the negative binomial
/// and log-series families, 0 otherwise.
double ratio_limit(const PartitionFamily& family, double u);

/// Split of alpha_i at t: lower = integral of phi_i over (0, t), upper = over (t, 1).
struct ComponentMasses {
  double lower = 0.0;
  double upper = 0.0;
};

ComponentMasses component_masses(const PartitionFamily& family, std::size_t i, double t);

/// Draws an index with probability alpha_i.
std::uint64_t weight_distribution_sample(const PartitionFamily& family, RandomStream& rng);

/// Draws an index from alpha conditioned on i >= first.
std::uint64_t weight_distribution_sample_from(const PartitionFamily& family, std::uint64_t first,
                                              RandomStream& rng);

/// Log-series beta_i = integral of u^i / L(u) over (0, 1) = i alpha_i.
///
/// Uses the alternating binomial sum for i <= kLogSeriesAlternatingLimit and
/// adaptive quadrature in the variable x = L(u) above it.
inline constexpr std::size_t kLogSeriesAlternatingLimit = 20;
double logseries_beta_alternating(std::size_t i);
double logseries_beta_quadrature(std::size_t i);

/// Read-only snapshot of cached log-series beta_i values; grows on demand and
/// is safe to share between threads once obtained.
class LogSeriesBetaTable {
 public:
  /// Snapshot holding at least indices 0..min_size-1 (index 0 is unused).
  static std::shared_ptr<const std::vector<double>> snapshot(std::size_t min_size);
};

/// Accessor that refreshes its snapshot when an index runs past it.
class LogSeriesBetas {
 public:
  double operator()(std::size_t i);

 private:
  std::shared_ptr<const std::vector<double>> table_;
};

/// Sequential evaluator of phi_first(u), phi_{first+1}(u), ... by recurrence,
/// re-anchored periodically on the direct formula.
class PointMassSequence {
 public:
  PointMassSequence(const PartitionFamily& family, double u, std::size_t first);

  std::size_t index() const { return index_; }
  /// phi_index(u); zero when it underflows, in which case log_value() still holds it.
  double value() const { return value_; }
  double log_value() const;
  void advance();

 private:
  void anchor();

  const PartitionFamily* family_;
  double u_;
  double rate_ = 0.0;
  double log_term_ = 0.0;
  std::size_t index_;
  std::size_t since_anchor_ = 0;
  double value_ = 0.0;
};

}  // namespace pucopula
