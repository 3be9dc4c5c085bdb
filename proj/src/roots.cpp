#include "pucopula/roots.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "pucopula/errors.hpp"

namespace pucopula {

RootResult find_root(const std::function<double(double)>& g, double lo, double hi, double tol,
                     int max_iterations) {
  if (lo > hi) std::swap(lo, hi);
  double a = lo;
  double b = hi;
  double ga = g(a);
  double gb = g(b);
  if (std::abs(ga) <= tol) return {a, ga, 0};
  if (std::abs(gb) <= tol) return {b, gb, 0};
  if ((ga > 0.0) == (gb > 0.0)) {
    throw BracketError("find_root: no sign change on the bracket");
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double last_width = b - a;
  int slow_steps = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    double x = b - gb * (b - a) / (gb - ga);
    const double margin = 1e-3 * (b - a);
    // Fall back to bisection when the secant leaves the bracket interior or
    // the bracket has stopped shrinking quickly.
    if (!(x > a + margin && x < b - margin) || slow_steps >= 2) {
      x = 0.5 * (a + b);
      slow_steps = 0;
    }
    const double gx = g(x);
    if (std::abs(gx) <= tol) return {x, gx, it};
    if ((gx > 0.0) == (ga > 0.0)) {
      a = x;
      ga = gx;
    } else {
      b = x;
      gb = gx;
    }
    const double width = b - a;
    slow_steps = width > 0.5 * last_width ? slow_steps + 1 : 0;
    last_width = width;
    if (width <= 4.0 * eps * std::max(std::abs(a), std::abs(b))) {
      const bool pick_a = std::abs(ga) < std::abs(gb);
      return {pick_a ? a : b, pick_a ? ga : gb, it};
    }
  }
  throw ConvergenceError("find_root: iteration budget exhausted", 0.5 * (a + b), b - a);
}

}  // namespace pucopula
