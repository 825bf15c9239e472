#include "polarfact/convex.hpp"

#include <cmath>
#include <limits>

#include "polarfact/error.hpp"

namespace polarfact {

void validate(const ConvexPotential& psi) {
  validate(psi.support);
  if (!psi.support.dimension)
    fail(ErrorCode::DimensionMismatch, "potential support must live in R^n");
  if (psi.psi_values.size() != psi.support.size())
    fail(ErrorCode::DimensionMismatch, "potential has " + std::to_string(psi.psi_values.size()) +
                                           " samples for " + std::to_string(psi.support.size()) +
                                           " sites");
  for (double v : psi.psi_values)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "potential sample is not finite");
}

namespace {

void check_query(const DiscreteMeasure& Y, std::span<const double> q) {
  if (!Y.dimension || *Y.dimension != q.size())
    fail(ErrorCode::DimensionMismatch, "query has " + std::to_string(q.size()) +
                                           " components, support dimension is " +
                                           (Y.dimension ? std::to_string(*Y.dimension) : "abstract"));
}

}  // namespace

ConjugateValue fenchel_conjugate_arg(const ConvexPotential& psi, std::span<const double> query) {
  check_query(psi.support, query);
  ConjugateValue best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t j = 0; j < psi.support.size(); ++j) {
    const double v = dot(query, psi.support.coords(j)) - psi.psi_values[j];
    if (v > best.value) best = {v, j};
  }
  return best;
}

double fenchel_conjugate(const ConvexPotential& psi, std::span<const double> query) {
  return fenchel_conjugate_arg(psi, query).value;
}

double c_transform(std::span<const double> phi, std::span<const double> u_value,
                   const DiscreteMeasure& Y) {
  check_query(Y, u_value);
  if (phi.size() != Y.size())
    fail(ErrorCode::DimensionMismatch, "phi has " + std::to_string(phi.size()) +
                                           " entries for " + std::to_string(Y.size()) + " sites");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < Y.size(); ++j) {
    const double v = 0.5 * squared_distance(u_value, Y.coords(j)) - phi[j];
    if (v < best) best = v;
  }
  return best;
}

std::vector<double> c_transform(std::span<const double> phi, const SampledMap& u,
                                const DiscreteMeasure& Y) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = c_transform(phi, u.values[i], Y);
  return out;
}

std::vector<double> double_c_transform(std::span<const double> phi, const SampledMap& u,
                                       const DiscreteMeasure& Y) {
  const std::vector<double> phi_c = c_transform(phi, u, Y);
  std::vector<double> out(Y.size(), std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < Y.size(); ++j) {
    const auto& y = Y.coords(j);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double v = 0.5 * squared_distance(u.values[i], y) - phi_c[i];
      if (v < out[j]) out[j] = v;
    }
  }
  return out;
}

double fenchel_gap(const ConvexPotential& psi, double conjugate_at_u,
                   std::span<const double> u_value, std::size_t y_index) {
  if (y_index >= psi.support.size())
    fail(ErrorCode::UnknownLabel, "site index " + std::to_string(y_index) + " out of range");
  return conjugate_at_u + psi.psi_values[y_index] - dot(u_value, psi.support.coords(y_index));
}

double fenchel_gap(const ConvexPotential& psi, std::span<const double> u_value,
                   std::size_t y_index) {
  return fenchel_gap(psi, fenchel_conjugate(psi, u_value), u_value, y_index);
}

ConvexPotential potential_from_duals(const DiscreteMeasure& Y, std::span<const double> phi) {
  if (phi.size() != Y.size())
    fail(ErrorCode::DimensionMismatch, "phi does not match the support size");
  ConvexPotential psi{Y, std::vector<double>(Y.size())};
  for (std::size_t j = 0; j < Y.size(); ++j)
    psi.psi_values[j] = 0.5 * squared_norm(Y.coords(j)) - phi[j];
  return psi;
}

}  // namespace polarfact
