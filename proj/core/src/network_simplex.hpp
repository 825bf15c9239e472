#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polarfact/transport.hpp"

namespace polarfact::detail {

struct BasicArc {
  std::size_t row;
  std::size_t col;
  double flow;
};

struct SimplexResult {
  std::vector<BasicArc> basis;  ///< |X| + |Y| - 1 arcs, zero flows included
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  SolveStats stats;
};

/// Primal transportation simplex on the complete bipartite graph. Requires
/// positive supplies and demands with equal totals.
SimplexResult transportation_simplex(const CostMatrix& cost, std::span<const double> supply,
                                     std::span<const double> demand);

}  // namespace polarfact::detail
