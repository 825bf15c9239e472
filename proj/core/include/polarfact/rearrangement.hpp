#pragma once

// Monotone rearrangements, the m-to-1 construction on a refined domain, and
// level-set multiplicity diagnostics.

#include <cstddef>
#include <optional>
#include <vector>

#include "polarfact/convex.hpp"
#include "polarfact/measures.hpp"
#include "polarfact/transport.hpp"

namespace polarfact {

/// Values designated as standing for level sets of positive measure.
struct HeavySet {
  std::vector<Vector> values;
  double tolerance = 0.0;  ///< sup-norm match tolerance against atom values
};

/// Index of the law atom matching each heavy value. Throws UnknownHeavyAtom.
std::vector<std::size_t> match_heavy_atoms(const ValueLaw& law, const HeavySet& heavy);

enum class SplitMode { Strict, Refine };

struct RearrangementOptions {
  SplitMode mode = SplitMode::Strict;
  double cluster_tol = 0.0;
  double gap_tol = kInclusionTol;
};

struct RearrangementResult {
  SampledMap u_sharp;    ///< on Y, or on Y with split sites subdivided
  ConvexPotential psi;   ///< on the domain of u_sharp
  TransportPlan plan;    ///< value atoms (rows) x sites of u_sharp's domain
  ValueLaw law;          ///< value law of u; rows of `plan`
  std::vector<double> gaps;  ///< fenchel_gap(psi, u_sharp(y), y) per site
  double max_gap = 0.0;
  bool refined = false;
};

/// u# on Y together with psi such that u#(y) is a discrete gradient of psi
/// everywhere. In strict mode a Y site whose optimal mass is split between
/// two value atoms raises SplitAtom; in refine mode such sites are divided
/// in proportion to the split and the problem is solved again.
RearrangementResult monotone_rearrangement(const SampledMap& u, const DiscreteMeasure& Y,
                                           const RearrangementOptions& options = {});

/// Each parent point split into m children of weight w/m, labelled
/// "parent#j" for j = 1..m, stored block by block.
struct RefinedDomain {
  DiscreteMeasure parent;
  std::size_t m = 1;
  DiscreteMeasure children;
  std::vector<std::size_t> parent_of;  ///< child index -> parent index
  std::vector<std::size_t> block_of;   ///< child index -> block in [0, m)
};

RefinedDomain refine_domain(const DiscreteMeasure& parent, std::size_t m);

struct MtoOneResult {
  RefinedDomain domain;
  SampledMap u;  ///< defined on domain.children
};

/// Rearrangement of v on the m-fold refined domain. Heavy values are copied
/// to every child of their carriers; in each block the remaining children,
/// sorted by parent label, receive the non-heavy values in sorted order
/// (grouped by carrier weight so the law is preserved exactly).
MtoOneResult construct_m_to_1(const SampledMap& v, std::size_t m, const HeavySet& heavy = {});

struct AtomMultiplicity {
  Vector value;
  double mass = 0.0;
  std::size_t point_count = 0;
  bool heavy = false;
};

struct MultiplicityReport {
  std::vector<AtomMultiplicity> atoms;
  bool almost_injective = false;
  std::optional<std::size_t> almost_m_to_1;  ///< common count of the non-heavy atoms
  std::size_t max_light_count = 0;           ///< countable-to-one surrogate
};

MultiplicityReport multiplicity_report(const SampledMap& u, const HeavySet& heavy = {},
                                       double cluster_tol = 0.0);

/// Closed axis-aligned box; infinite bounds are allowed.
struct Box {
  Vector lower;
  Vector upper;
};

struct Restriction {
  SampledMap map;                  ///< empty domain when nothing is retained
  std::vector<std::size_t> kept;   ///< retained indices of the input domain
  bool empty() const noexcept { return kept.empty(); }
};

/// Points whose value lies in `box`. An empty result is a warning, not an
/// error: check `empty()`.
Restriction restrict_to_value_set(const SampledMap& u, const Box& box);

}  // namespace polarfact
