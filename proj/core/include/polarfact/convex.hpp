#pragma once

// Discrete conjugacy on finite supports: Legendre-Fenchel conjugates of
// sampled potentials, c-transforms for the quadratic cost, and the
// Fenchel-Young gap used to certify subdifferential inclusions.

#include <cstddef>
#include <span>
#include <vector>

#include "polarfact/measures.hpp"

namespace polarfact {

/// Default absolute tolerance on the Fenchel gap for an inclusion certificate.
inline constexpr double kInclusionTol = 1e-8;

/// Samples of a potential psi on the sites of `support`. The potential is
/// taken to be +infinity off the support, so its conjugate is a finite max.
struct ConvexPotential {
  DiscreteMeasure support;
  std::vector<double> psi_values;
};

void validate(const ConvexPotential& psi);

/// Samples of phi^c on X and phi on Y.
struct DualPair {
  std::vector<double> phi_c;
  std::vector<double> phi;
};

struct ConjugateValue {
  double value;
  std::size_t argmax;  ///< lowest site index attaining the max
};

/// psi*(query) = max_j query . y_j - psi_j.
double fenchel_conjugate(const ConvexPotential& psi, std::span<const double> query);
ConjugateValue fenchel_conjugate_arg(const ConvexPotential& psi, std::span<const double> query);

/// phi^c(u_value) = min_j |u_value - y_j|^2 / 2 - phi_j.
double c_transform(std::span<const double> phi, std::span<const double> u_value,
                   const DiscreteMeasure& Y);

/// phi^c at every domain point of `u`.
std::vector<double> c_transform(std::span<const double> phi, const SampledMap& u,
                                const DiscreteMeasure& Y);

/// phi^{cc}(y_j) = min_i |u(x_i) - y_j|^2 / 2 - phi^c(x_i).
std::vector<double> double_c_transform(std::span<const double> phi, const SampledMap& u,
                                       const DiscreteMeasure& Y);

/// psi*(u_value) + psi(y) - u_value . y, non-negative by Fenchel-Young.
double fenchel_gap(const ConvexPotential& psi, std::span<const double> u_value,
                   std::size_t y_index);

/// Same gap with a precomputed conjugate value, for callers that evaluate
/// many sites against one query.
double fenchel_gap(const ConvexPotential& psi, double conjugate_at_u,
                   std::span<const double> u_value, std::size_t y_index);

/// psi(y) = |y|^2/2 - phi(y) on the sites of Y.
ConvexPotential potential_from_duals(const DiscreteMeasure& Y, std::span<const double> phi);

}  // namespace polarfact
