#pragma once

// Polar factorisation / polar inclusion pipeline: plans from maps, Fenchel
// certificates of inclusion, optimality re-checks, and degeneracy
// diagnostics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polarfact/convex.hpp"
#include "polarfact/measures.hpp"
#include "polarfact/rearrangement.hpp"
#include "polarfact/transport.hpp"

namespace polarfact {

/// Plan (i, s(i), mu_i). Throws NotMeasurePreserving (naming the worst column
/// discrepancy) unless the column sums match nu or `check` is false.
TransportPlan plan_from_map(std::span<const std::size_t> s, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, bool check = true);

struct InclusionCheck {
  bool holds = false;
  double max_gap = 0.0;
  std::vector<double> gaps;  ///< one per plan triplet
};

/// Checks fenchel_gap <= tol at every support triplet of `plan`.
InclusionCheck verify_polar_inclusion(const TransportPlan& plan, const ConvexPotential& psi,
                                      const SampledMap& u, double tol = kInclusionTol);

struct OptimalityCheck {
  bool optimal = false;
  double plan_cost = 0.0;     ///< I(pi)
  double optimum = 0.0;       ///< I of an independent solve
  double shifted_cost = 0.0;  ///< J(pi)
};

/// Re-solves the transport problem to confirm that a certified inclusion
/// plan is optimal. Throws InclusionNotCertified if the inclusion fails at
/// `tol`.
OptimalityCheck verify_optimality_of_inclusion(const TransportPlan& pi, const ConvexPotential& psi,
                                               const SampledMap& u, double tol = kInclusionTol);

enum class Classification { Factorisation, InclusionOnly };

std::string_view to_string(Classification c) noexcept;

struct RowResidue {
  std::size_t row;
  double off_main_mass;  ///< mass not carried by the row's main column
};

struct PolarResult {
  TransportPlan plan;
  DualPair duals;
  ConvexPotential psi;
  double primal = 0.0;
  double dual_value = 0.0;
  double max_gap = 0.0;
  std::vector<double> gaps;            ///< per plan triplet
  double conjugate_identity_error = 0.0;  ///< max |psi*(u_i) - (|u_i|^2/2 - phi^c_i)|
  Classification classification = Classification::InclusionOnly;
  std::optional<std::vector<std::size_t>> factor_map;  ///< s : X -> Y
  std::optional<SampledMap> u_sharp;                   ///< on Y
  std::vector<RowResidue> residues;    ///< deterministic rows with sub-threshold leftovers
  std::vector<std::size_t> split_rows;
  SolveStats stats;
};

struct PolarOptions {
  double tol = kInclusionTol;
  bool centre_duals = true;  ///< see strictly_complementary_duals
};

/// build_cost -> solve_mk -> psi = |y|^2/2 - phi -> inclusion certificate,
/// then classification. Throws NumericalFailure if a self-check fails.
PolarResult polar_factorize(const SampledMap& u, const DiscreteMeasure& Y,
                            const PolarOptions& options = {});

struct DegeneracyReport {
  std::vector<std::size_t> zero_reduced_cost_columns;  ///< per X row
  std::vector<std::size_t> support_columns;            ///< per X row
  double degeneracy_index = 0.0;
  double split_index = 0.0;
};

/// Throws CertificateMissing unless the plan and duals have zero duality gap
/// (1e-9 relative).
DegeneracyReport degeneracy_report(const TransportPlan& plan, const DualPair& duals,
                                   const CostMatrix& cost, double tol = kInclusionTol);

struct GalleryInstance {
  std::string name;
  std::size_t grid = 0;
  SampledMap u;
  DiscreteMeasure Y;
  HeavySet heavy;
  SampledMap u_sharp;  ///< gradient samples on Y the instance was built from
};

/// "flat-segment": u# = grad(|y1| + y2^2/2) on the cell-centred N x N grid of
/// [-1,1]^2 (N even, so no centre lies on the axis y1 = 0).
/// "m-to-1-flat": construct_m_to_1 of that map with m = 2.
/// "injective-control": gradient of a seeded strictly convex potential.
/// The domain X of u is an abstract copy of the grid in seeded order.
GalleryInstance gallery_instance(const std::string& name, std::size_t N, std::uint64_t seed);

std::vector<std::string> gallery_names();

}  // namespace polarfact
