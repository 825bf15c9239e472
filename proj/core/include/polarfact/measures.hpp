#pragma once

// Finite weighted point sets, maps sampled on them, and their value laws.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polarfact {

using Vector = std::vector<double>;

/// Relative tolerance used whenever two masses are compared.
inline constexpr double kMassRelTol = 1e-9;

struct Site {
  std::string label;
  std::optional<Vector> coords;  ///< absent for points of an abstract space
};

/// A finite positive measure. `dimension` is empty for abstract (domain-only)
/// spaces, in which case no site carries coordinates.
struct DiscreteMeasure {
  std::optional<std::size_t> dimension;
  std::vector<Site> sites;
  std::vector<double> weights;

  std::size_t size() const noexcept { return sites.size(); }
  double total_mass() const noexcept;
  const Vector& coords(std::size_t i) const;
  std::optional<std::size_t> index_of(const std::string& label) const;
};

/// Checks every invariant of `measure` and returns its total mass.
/// Throws NegativeWeight (for weights <= 0 or non-finite), DuplicateLabel or
/// DimensionMismatch.
double validate(const DiscreteMeasure& measure);

/// Builds a measure on R^n from coordinates; labels default to "p0", "p1", ...
DiscreteMeasure make_measure(std::vector<Vector> coords, std::vector<double> weights,
                             std::vector<std::string> labels = {});

/// Uniform measure of total mass `total` on the given coordinates.
DiscreteMeasure make_uniform_measure(std::vector<Vector> coords, double total = 1.0);

/// Abstract space with `n` points of the given weights.
DiscreteMeasure make_abstract_measure(std::vector<double> weights,
                                      std::vector<std::string> labels = {});

/// Values of a map u: X -> R^n at the support points of its domain.
struct SampledMap {
  DiscreteMeasure domain;
  std::vector<Vector> values;
  std::size_t codomain_dimension = 0;

  std::size_t size() const noexcept { return values.size(); }
};

void validate(const SampledMap& map);

SampledMap make_sampled_map(DiscreteMeasure domain, std::vector<Vector> values);

struct ValueAtom {
  Vector value;                       ///< value of the lowest-index member
  double mass = 0.0;
  std::vector<std::size_t> members;   ///< domain indices, ascending
};

/// Pushforward law of a sampled map: one atom per cluster of equal values.
struct ValueLaw {
  std::vector<ValueAtom> atoms;  ///< ordered by clustering key
  double tolerance = 0.0;

  double total_mass() const noexcept;
};

/// Groups values exactly when `cluster_tol == 0`, otherwise by snapping each
/// coordinate to the nearest multiple of `cluster_tol`.
ValueLaw value_law(const SampledMap& map, double cluster_tol = 0.0);

/// True iff both maps induce the same law on R^n. Throws DimensionMismatch or
/// UnequalMass (totals differing by more than 1e-12 relative).
bool equimeasurable(const SampledMap& f, const SampledMap& g, double cluster_tol = 0.0);

/// Image of `measure` under an index assignment into `target`. Only target
/// points that receive mass appear in the result, in target order.
DiscreteMeasure pushforward(const DiscreteMeasure& measure,
                            std::span<const std::size_t> assignment,
                            const DiscreteMeasure& target);

DiscreteMeasure pushforward(const DiscreteMeasure& measure,
                            const std::map<std::string, std::string>& assignment,
                            const DiscreteMeasure& target);

/// Same labels in the same order and weights equal within `rel_tol`.
bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b,
                  double rel_tol = kMassRelTol);

bool masses_close(double a, double b, double rel_tol = kMassRelTol) noexcept;

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace polarfact
