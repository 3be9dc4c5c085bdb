#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pucopula {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the open domain, e.g. u <= 0 or u >= 1.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Family or model parameter violating its constraints.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Index outside a family's support where an in-support index is required.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A series could not certify its tail within the configured term budget.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double partial_sum, std::size_t terms)
      : Error(what), partial_sum_(partial_sum), terms_(terms) {}

  double partial_sum() const noexcept { return partial_sum_; }
  std::size_t terms() const noexcept { return terms_; }

 private:
  double partial_sum_;
  std::size_t terms_;
};

/// Numerical procedure (quadrature, root finding, IPF) failed to converge.
/// Carries the best estimate reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_(best_estimate), error_(error_estimate) {}

  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double best_;
  double error_;
};

/// Root finding was handed an interval without a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Unsupported request, e.g. a closed form that is not available.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace pucopula
