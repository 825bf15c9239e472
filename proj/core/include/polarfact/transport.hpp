#pragma once

// Exact discrete Monge-Kantorovich problem for the cost |u(x) - y|^2 / 2:
// cost matrices, transport plans, the transportation simplex with dual
// recovery, and the permutation oracle used to validate it.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polarfact/convex.hpp"
#include "polarfact/measures.hpp"

namespace polarfact {

/// Dense |X| x |Y| cost matrix together with the marginal weights it was
/// built for.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  ///< row-major
  std::vector<double> source_weights;
  std::vector<double> target_weights;

  double operator()(std::size_t i, std::size_t j) const noexcept { return entries[i * cols + j]; }
};

/// Wraps an arbitrary matrix. Generic costs are accepted for testing only.
CostMatrix make_cost_matrix(std::size_t rows, std::size_t cols, std::vector<double> entries,
                            std::vector<double> source_weights,
                            std::vector<double> target_weights);

struct Triplet {
  std::size_t i;
  std::size_t j;
  double mass;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Sparse coupling of two marginals, triplets sorted by (i, j).
struct TransportPlan {
  std::vector<Triplet> triplets;
  std::vector<double> source_weights;
  std::vector<double> target_weights;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

/// Throws MarginalMismatch unless row and column sums match the stored
/// marginals within `rel_tol` (relative to the total mass).
void check_marginals(const TransportPlan& plan, double rel_tol = kMassRelTol);

/// c_ij = |u(x_i) - y_j|^2 / 2. Throws DimensionMismatch or UnequalMass.
CostMatrix build_cost(const SampledMap& u, const DiscreteMeasure& Y);

/// I(plan) = sum of mass * cost over the triplets.
double objective(const TransportPlan& plan, const CostMatrix& cost);

/// sum_i mu_i phi^c_i + sum_j nu_j phi_j.
double dual_objective(const DualPair& duals, const CostMatrix& cost);

struct SolveStats {
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
  std::size_t bland_pivots = 0;
};

struct MkSolution {
  TransportPlan plan;
  DualPair duals;
  double primal = 0.0;      ///< I(plan)
  double dual_value = 0.0;  ///< dual objective of `duals`
  double gap = 0.0;         ///< |primal - dual_value|
  SolveStats stats;
};

/// Relative duality gap |I - D| / max(1, |I|).
double relative_gap(double primal, double dual_value) noexcept;

/// Solves the transportation LP exactly. Returns a basic optimal plan and
/// c-concave duals normalised by phi(y_1) = 0. Deterministic.
/// Throws UnequalMass, MarginalMismatch or NumericalFailure.
MkSolution solve_mk(const CostMatrix& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Same, using the marginals stored in `cost`.
MkSolution solve_mk(const CostMatrix& cost);

/// Replaces the duals by an optimal pair that keeps complementary slackness
/// with `plan` and maximises the smallest reduced cost between distinct
/// connected components of the plan's support. Reduced costs that stay zero
/// are then forced by the problem, not by the basis the simplex stopped at.
/// Skipped (duals returned unchanged) above `max_components` components.
DualPair strictly_complementary_duals(const TransportPlan& plan, const DualPair& duals,
                                      const CostMatrix& cost,
                                      std::size_t max_components = 1200);

/// Exact optimum by enumerating permutations. Requires uniform equal weights
/// on both sides and |X| = |Y| <= 8, else throws OracleScopeExceeded.
double brute_force_mk(const CostMatrix& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// J(plan) = sum of mass * fenchel_gap(psi, u(x_i), y_j).
double shifted_objective(const TransportPlan& plan, const ConvexPotential& psi,
                         const SampledMap& u);

/// Seeded north-west filling over shuffled row and column orders.
TransportPlan random_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          std::uint64_t seed);

/// Samples `samples` cycles of 2..max_length distinct support triplets and
/// counts those violating sum c(x_k, y_k) <= sum c(x_k, y_{k+1}) + tol.
std::size_t cyclic_monotonicity_violations(const TransportPlan& plan, const CostMatrix& cost,
                                           std::size_t samples, std::size_t max_length,
                                           std::uint64_t seed, double tol = 1e-9);

}  // namespace polarfact
