#include "pucopula/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "pucopula/compensated.hpp"
#include "pucopula/errors.hpp"
#include "pucopula/quadrature.hpp"

namespace pucopula {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kGridCells = 256;
constexpr std::size_t kGridCacheLimit = 4096;
constexpr int kInversionIterations = 100;

// Log-series component i in the variable x = L(u): unnormalized density
// (1 - e^{-x})^i e^{-x} / x.
double logseries_x_density(std::size_t i, double x) {
  return std::exp(static_cast<double>(i) * std::log(-std::expm1(-x)) - x) / x;
}

// Integral of the x-density over [a, b] with one 15-point Kronrod panel.
double kronrod_panel(std::size_t i, double a, double b) {
  static constexpr std::array<double, 8> nodes = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> weights = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = weights[7] * logseries_x_density(i, c);
  for (std::size_t j = 0; j < 7; ++j) {
    sum += weights[j] * (logseries_x_density(i, c - h * nodes[j]) +
                         logseries_x_density(i, c + h * nodes[j]));
  }
  return sum * h;
}

// Monotone CDF table of one log-series component on a uniform x grid.
struct InverseCdfGrid {
  std::size_t index = 0;
  double lo = 0.0;
  double step = 0.0;
  double total = 0.0;
  std::vector<double> cdf;

  double invert(double r) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cdf.begin() - 1));
    k = std::min(k, kGridCells - 1);
    double a = lo + step * static_cast<double>(k);
    double b = a + step;
    const double left = a;
    const double target = (r - cdf[k]) * total;
    const double cell = (cdf[k + 1] - cdf[k]) * total;
    double x = cell > 0.0 ? a + step * std::clamp(target / cell, 0.0, 1.0) : a + 0.5 * step;
    for (int it_count = 0; it_count < kInversionIterations; ++it_count) {
      const double g = kronrod_panel(index, left, x) - target;
      if (std::abs(g) <= 1e-12 * total) return x;
      if (g > 0.0) {
        b = x;
      } else {
        a = x;
      }
      const double slope = logseries_x_density(index, x);
      double next = slope > 0.0 ? x - g / slope : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (b - a <= 1e-15 * std::max(1.0, std::abs(b))) return 0.5 * (a + b);
      x = next;
    }
    throw ConvergenceError("log-series inverse CDF failed to converge", x, b - a);
  }
};

std::shared_ptr<const InverseCdfGrid> build_grid(std::size_t i) {
  auto grid = std::make_shared<InverseCdfGrid>();
  const double li = std::log(static_cast<double>(i));
  grid->index = i;
  grid->lo = std::max(0.0, li - 5.0);
  const double hi = std::max(0.0, li) + 45.0;
  grid->step = (hi - grid->lo) / static_cast<double>(kGridCells);
  QuadratureOptions options;
  options.abs_tol = 0.0;
  options.rel_tol = 1e-13;
  std::vector<double> masses(kGridCells);
  CompensatedSum total;
  for (std::size_t k = 0; k < kGridCells; ++k) {
    const double a = grid->lo + grid->step * static_cast<double>(k);
    try {
      masses[k] = integrate_1d([i](double x) { return logseries_x_density(i, x); }, a,
                               a + grid->step, options)
                      .value;
    } catch (const ConvergenceError& e) {
      masses[k] = e.best_estimate();
    }
    total += masses[k];
  }
  grid->total = total.value();
  grid->cdf.resize(kGridCells + 1);
  CompensatedSum running;
  grid->cdf[0] = 0.0;
  for (std::size_t k = 0; k < kGridCells; ++k) {
    running += masses[k];
    grid->cdf[k + 1] = running.value() / grid->total;
  }
  grid->cdf[kGridCells] = 1.0;
  return grid;
}

std::shared_ptr<const InverseCdfGrid> logseries_grid(std::size_t i) {
  static std::mutex mutex;
  static std::unordered_map<std::size_t, std::shared_ptr<const InverseCdfGrid>> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = cache.find(i);
    if (it != cache.end()) return it->second;
  }
  auto grid = build_grid(i);
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() < kGridCacheLimit) cache.emplace(i, grid);
  return grid;
}

// Cumulative table over the entries of a FiniteMatrix block, row-major.
struct MatrixTable {
  std::vector<double> cumulative;
  std::size_t size = 0;
};

MatrixTable matrix_table(const FiniteMatrixWeights& w) {
  MatrixTable table;
  table.size = w.entries.size();
  CompensatedSum running;
  for (const auto& row : w.entries) {
    for (double e : row) {
      running += e;
      table.cumulative.push_back(running.value());
    }
  }
  return table;
}

}  // namespace

std::vector<double> SampleBatch::column(std::size_t col) const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t r = 0; r < size(); ++r) out.push_back((*this)(r, col));
  return out;
}

double component_sample(const PartitionFamily& family, std::size_t i, RandomStream& rng) {
  if (!family.in_support(i)) {
    throw IndexError("index " + std::to_string(i) + " is outside the support of " +
                     family.describe());
  }
  const double di = static_cast<double>(i);
  return std::visit(
      Overloaded{
          [&](const Binomial& b) {
            return beta_sample(di + 1.0, static_cast<double>(b.m) - di, rng);
          },
          [&](const NegBinomial& n) { return beta_sample(di + 1.0, n.beta + 1.0, rng); },
          [&](const Poisson& p) {
            const double z = gamma_sample(di + 1.0, 1.0 / (1.0 + p.gamma), rng);
            return clamp_open_unit(-std::expm1(-z));
          },
          [&](const LogSeries&) {
            const auto grid = logseries_grid(i);
            return clamp_open_unit(-std::expm1(-grid->invert(rng.uniform())));
          },
      },
      family.kind());
}

SampleBatch sample(const PuCopula& copula, std::size_t count, RandomStream& rng) {
  if (count == 0) throw ParameterError("sample count must be at least 1");
  SampleBatch batch;
  batch.dimension = copula.dimension();
  batch.seed = rng.seed();
  batch.descriptor = copula.describe();
  batch.values.resize(count * batch.dimension);
  const RandomStream root = rng.split(rng.next_u64());
  const auto& families = copula.families();

  MatrixTable table;
  if (const auto* w = std::get_if<FiniteMatrixWeights>(&copula.weights())) table = matrix_table(*w);

  for (std::size_t k = 0; k < count; ++k) {
    RandomStream s = root.split(k);
    double* out = &batch.values[k * batch.dimension];
    std::visit(
        Overloaded{
            [&](const DiagonalWeights&) {
              const std::uint64_t i = weight_distribution_sample(families[0], s);
              for (std::size_t c = 0; c < batch.dimension; ++c) {
                out[c] = component_sample(families[c], i, s);
              }
            },
            [&](const FiniteMatrixWeights&) {
              const double r = s.uniform();
              std::size_t i = 0;
              std::size_t j = 0;
              if (r < table.cumulative.back()) {
                const auto it = std::upper_bound(table.cumulative.begin(), table.cumulative.end(), r);
                const auto flat = static_cast<std::size_t>(it - table.cumulative.begin());
                i = flat / table.size;
                j = flat % table.size;
              } else {
                i = j = weight_distribution_sample_from(families[0], table.size, s);
              }
              out[0] = component_sample(families[0], i, s);
              out[1] = component_sample(families[1], j, s);
            },
            [&](const Banded2to1Weights&) {
              const std::uint64_t i = weight_distribution_sample(families[0], s);
              if (i >= (std::uint64_t{1} << 62)) {
                throw IndexError("banded row index " + std::to_string(i) + " overflows 2i + 1");
              }
              const double even = weight_or_zero(families[1], 2 * i);
              const std::uint64_t j = s.uniform() * weight(families[0], i) < even ? 2 * i : 2 * i + 1;
              out[0] = component_sample(families[0], i, s);
              out[1] = component_sample(families[1], j, s);
            },
        },
        copula.weights());
  }
  return batch;
}

}  // namespace pucopula
