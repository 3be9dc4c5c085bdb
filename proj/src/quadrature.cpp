#include "pucopula/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"

namespace pucopula {
namespace {

// Kronrod 15-point abscissae; odd entries are the embedded 7-point Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool frozen;
};

struct ByError {
  bool operator()(const Panel& lhs, const Panel& rhs) const { return lhs.error < rhs.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double lo = std::nextafter(a, b);
  const double hi = std::nextafter(b, a);
  // nodes of very narrow panels can round onto an endpoint
  auto at = [&](double x) { return f(std::clamp(x, lo, hi)); };
  const double fc = at(center);
  std::array<double, 7> left{};
  std::array<double, 7> right{};
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    left[j] = at(center - dx);
    right[j] = at(center + dx);
    const double pair = left[j] + right[j];
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  if (!std::isfinite(kronrod)) {
    throw ConvergenceError("integrand is not finite on a quadrature panel", kronrod * half,
                           std::numeric_limits<double>::infinity());
  }
  // QUADPACK error scaling: |K15 - G7| overstates the error of K15 on smooth panels.
  const double mean = 0.5 * kronrod;
  double spread = kKronrodWeights[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    spread += kKronrodWeights[j] * (std::abs(left[j] - mean) + std::abs(right[j] - mean));
  }
  kronrod *= half;
  gauss *= half;
  spread *= std::abs(half);
  double error = std::abs(kronrod - gauss);
  if (spread != 0.0 && error != 0.0) {
    error = spread * std::min(1.0, std::pow(200.0 * error / spread, 1.5));
  }
  error = std::max(error, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod));
  // Panels too narrow to bisect meaningfully are accepted as they are.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(std::abs(a), std::abs(b));
  return {a, b, kronrod, error, (b - a) <= floor};
}

}  // namespace

QuadratureResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                              const QuadratureOptions& options) {
  if (!(a < b)) {
    if (a == b) return {};
    throw DomainError("integrate_1d requires a < b");
  }
  std::priority_queue<Panel, std::vector<Panel>, ByError> active;
  std::vector<Panel> frozen;
  std::size_t evaluations = 15;
  active.push(evaluate_panel(f, a, b));

  auto totals = [&]() {
    CompensatedSum value;
    CompensatedSum error;
    auto copy = active;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const auto& p : frozen) {
      value += p.value;
      error += p.error;
    }
    return std::pair<double, double>{value.value(), error.value()};
  };

  // Running totals avoid re-summing the heap every step; they are refreshed
  // exactly before any convergence decision.
  double value_estimate = active.top().value;
  double error_estimate = active.top().error;
  std::size_t panels = 1;
  while (true) {
    const double target = std::max(options.abs_tol, options.rel_tol * std::abs(value_estimate));
    if (error_estimate <= target || active.empty()) {
      const auto [value, error] = totals();
      const double exact_target = std::max(options.abs_tol, options.rel_tol * std::abs(value));
      if (error <= exact_target) return {value, error, evaluations};
      if (active.empty()) {
        throw ConvergenceError("quadrature stalled on unsplittable panels", value, error);
      }
      value_estimate = value;
      error_estimate = error;
    }
    if (panels >= options.max_intervals) {
      const auto [value, error] = totals();
      throw ConvergenceError("quadrature exceeded the panel budget", value, error);
    }
    Panel worst = active.top();
    active.pop();
    if (worst.frozen) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = evaluate_panel(f, worst.a, mid);
    Panel right = evaluate_panel(f, mid, worst.b);
    evaluations += 30;
    ++panels;
    value_estimate += left.value + right.value - worst.value;
    error_estimate += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
  }
}

QuadratureResult integrate_2d(const std::function<double(double, double)>& f, double ax,
                              double bx, double ay, double by,
                              const QuadratureOptions& options) {
  QuadratureOptions inner = options;
  inner.abs_tol = 0.1 * options.abs_tol / std::max(1.0, bx - ax);
  inner.rel_tol = 0.1 * options.rel_tol;
  std::size_t evaluations = 0;
  auto outer = [&](double x) {
    const auto r = integrate_1d([&](double y) { return f(x, y); }, ay, by, inner);
    evaluations += r.evaluations;
    return r.value;
  };
  auto result = integrate_1d(outer, ax, bx, options);
  result.evaluations = evaluations;
  return result;
}

double mixed_second_difference(const std::function<double(double, double)>& f, double x,
                               double y, double h) {
  return (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
}

}  // namespace pucopula
