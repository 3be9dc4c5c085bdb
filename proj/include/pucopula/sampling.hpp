#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pucopula/copula.hpp"
#include "pucopula/families.hpp"
#include "pucopula/random.hpp"
#include "pucopula/variates.hpp"

namespace pucopula {

/// Sample points stored row-major, with the seed and copula descriptor that
/// reproduce them.
struct SampleBatch {
  std::size_t dimension = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string descriptor;

  std::size_t size() const { return dimension == 0 ? 0 : values.size() / dimension; }
  double operator()(std::size_t row, std::size_t col) const { return values[row * dimension + col]; }
  std::vector<double> column(std::size_t col) const;
};

/// Draws from the normalized component density f_i of `family`.
double component_sample(const PartitionFamily& family, std::size_t i, RandomStream& rng);

/// Draws `count` points: a component index (tuple) from the joint weights,
/// then each coordinate independently from its component density. Point k
/// uses its own substream, so results do not depend on evaluation order.
SampleBatch sample(const PuCopula& copula, std::size_t count, RandomStream& rng);

}  // namespace pucopula
