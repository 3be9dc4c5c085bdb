#pragma once

#include <cstddef>
#include <functional>

namespace pucopula {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  std::size_t max_intervals = 5000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
///
/// Nodes never touch the endpoints, so integrable endpoint singularities are
/// handled by repeated bisection toward them. Succeeds when the summed error
/// estimate is below max(abs_tol, rel_tol |value|); otherwise throws
/// ConvergenceError carrying the best estimate.
QuadratureResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                              const QuadratureOptions& options = {});

/// Iterated adaptive quadrature on the rectangle [ax, bx] x [ay, by]. The
/// inner integrals are computed to a tighter tolerance than the outer one.
QuadratureResult integrate_2d(const std::function<double(double, double)>& f, double ax,
                              double bx, double ay, double by,
                              const QuadratureOptions& options = {});

/// Central mixed second difference d^2 f / dx dy at (x, y) with step h.
double mixed_second_difference(const std::function<double(double, double)>& f, double x,
                               double y, double h);

}  // namespace pucopula
