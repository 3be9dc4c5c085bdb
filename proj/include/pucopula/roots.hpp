#pragma once

#include <functional>

namespace pucopula {

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Bracketed root of g on [lo, hi] by bisection with secant steps. Returns once
/// |g(x)| <= tol or the bracket shrinks to the floating-point floor.
/// Throws BracketError when g(lo) and g(hi) share a strict sign.
RootResult find_root(const std::function<double(double)>& g, double lo, double hi, double tol,
                     int max_iterations = 500);

}  // namespace pucopula
