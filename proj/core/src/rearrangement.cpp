#include "polarfact/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "polarfact/error.hpp"

namespace polarfact {

std::vector<std::size_t> match_heavy_atoms(const ValueLaw& law, const HeavySet& heavy) {
  std::vector<std::size_t> matched;
  for (const auto& value : heavy.values) {
    std::size_t found = law.atoms.size();
    for (std::size_t k = 0; k < law.atoms.size() && found == law.atoms.size(); ++k) {
      const auto& atom = law.atoms[k].value;
      if (atom.size() != value.size()) continue;
      double dist = 0.0;
      for (std::size_t d = 0; d < atom.size(); ++d) dist = std::max(dist, std::abs(atom[d] - value[d]));
      if (dist <= heavy.tolerance) found = k;
    }
    if (found == law.atoms.size()) {
      std::string repr = "(";
      for (std::size_t d = 0; d < value.size(); ++d)
        repr += (d ? ", " : "") + std::to_string(value[d]);
      fail(ErrorCode::UnknownHeavyAtom, "no atom of the value law matches " + repr + ")");
    }
    matched.push_back(found);
  }
  std::sort(matched.begin(), matched.end());
  matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
  return matched;
}

namespace {

SampledMap atom_map(const ValueLaw& law, std::size_t dimension) {
  SampledMap map;
  map.codomain_dimension = dimension;
  for (std::size_t k = 0; k < law.atoms.size(); ++k) {
    map.domain.sites.push_back({"atom" + std::to_string(k), std::nullopt});
    map.domain.weights.push_back(law.atoms[k].mass);
    map.values.push_back(law.atoms[k].value);
  }
  return map;
}

}  // namespace

RearrangementResult monotone_rearrangement(const SampledMap& u, const DiscreteMeasure& Y,
                                           const RearrangementOptions& options) {
  validate(u);
  validate(Y);
  RearrangementResult result;
  result.law = value_law(u, options.cluster_tol);
  const SampledMap atoms = atom_map(result.law, u.codomain_dimension);
  const CostMatrix cost = build_cost(atoms, Y);
  const MkSolution sol = solve_mk(cost);

  // Per site: the atom carrying most of its mass, and whether it is split.
  std::vector<std::size_t> owner(Y.size(), 0);
  std::vector<double> owned(Y.size(), 0.0);
  std::vector<std::vector<Triplet>> by_site(Y.size());
  for (const auto& t : sol.plan.triplets) {
    by_site[t.j].push_back(t);
    if (t.mass > owned[t.j]) {
      owned[t.j] = t.mass;
      owner[t.j] = t.i;
    }
  }
  std::vector<std::size_t> split;
  for (std::size_t j = 0; j < Y.size(); ++j)
    if (owned[j] < (1.0 - 1e-9) * Y.weights[j]) split.push_back(j);

  if (split.empty()) {
    std::vector<Vector> values(Y.size());
    for (std::size_t j = 0; j < Y.size(); ++j) values[j] = result.law.atoms[owner[j]].value;
    result.u_sharp = make_sampled_map(Y, std::move(values));
    result.psi = potential_from_duals(Y, sol.duals.phi);
    result.plan = sol.plan;
  } else if (options.mode == SplitMode::Strict) {
    std::string sites;
    for (std::size_t j : split) sites += (sites.empty() ? "" : ", ") + Y.sites[j].label;
    fail(ErrorCode::SplitAtom, "optimal plan splits the mass of site(s) " + sites +
                                   " between several values (use refine mode)");
  } else {
    // Subdivide split sites in proportion to the plan and solve once more;
    // the subdivided plan stays optimal, so any optimal dual certifies it.
    DiscreteMeasure refined;
    refined.dimension = Y.dimension;
    std::vector<std::size_t> assigned;
    for (std::size_t j = 0; j < Y.size(); ++j) {
      if (!std::binary_search(split.begin(), split.end(), j)) {
        refined.sites.push_back(Y.sites[j]);
        refined.weights.push_back(Y.weights[j]);
        assigned.push_back(owner[j]);
        continue;
      }
      std::size_t part = 0;
      for (const auto& t : by_site[j]) {
        refined.sites.push_back({Y.sites[j].label + "#" + std::to_string(++part), Y.sites[j].coords});
        refined.weights.push_back(t.mass);
        assigned.push_back(t.i);
      }
    }
    validate(refined);
    const MkSolution again = solve_mk(build_cost(atoms, refined));
    std::vector<Vector> values(refined.size());
    result.plan.source_weights = cost.source_weights;
    result.plan.target_weights = refined.weights;
    for (std::size_t j = 0; j < refined.size(); ++j) {
      values[j] = result.law.atoms[assigned[j]].value;
      result.plan.triplets.push_back({assigned[j], j, refined.weights[j]});
    }
    std::sort(result.plan.triplets.begin(), result.plan.triplets.end(),
              [](const Triplet& a, const Triplet& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    result.psi = potential_from_duals(refined, again.duals.phi);
    result.u_sharp = make_sampled_map(std::move(refined), std::move(values));
    result.refined = true;
  }

  const auto& domain = result.u_sharp.domain;
  result.gaps.resize(domain.size());
  for (std::size_t j = 0; j < domain.size(); ++j) {
    result.gaps[j] = fenchel_gap(result.psi, result.u_sharp.values[j], j);
    result.max_gap = std::max(result.max_gap, result.gaps[j]);
  }
  if (result.max_gap > options.gap_tol)
    fail(ErrorCode::NumericalFailure, "rearrangement certificate gap " +
                                          std::to_string(result.max_gap) + " exceeds tolerance");
  return result;
}

RefinedDomain refine_domain(const DiscreteMeasure& parent, std::size_t m) {
  validate(parent);
  if (m == 0) fail(ErrorCode::InvalidArgument, "refinement factor m must be at least 1");
  RefinedDomain out;
  out.parent = parent;
  out.m = m;
  out.children.dimension = parent.dimension;
  const double scale = static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < parent.size(); ++p) {
      out.children.sites.push_back(
          {parent.sites[p].label + "#" + std::to_string(j + 1), parent.sites[p].coords});
      out.children.weights.push_back(parent.weights[p] / scale);
      out.parent_of.push_back(p);
      out.block_of.push_back(j);
    }
  }
  return out;
}

MtoOneResult construct_m_to_1(const SampledMap& v, std::size_t m, const HeavySet& heavy) {
  validate(v);
  if (m == 0) fail(ErrorCode::InvalidArgument, "refinement factor m must be at least 1");
  const ValueLaw law = value_law(v);
  const auto heavy_atoms = match_heavy_atoms(law, heavy);

  std::vector<std::size_t> atom_of(v.size());
  for (std::size_t k = 0; k < law.atoms.size(); ++k)
    for (std::size_t i : law.atoms[k].members) atom_of[i] = k;
  auto is_heavy = [&](std::size_t i) {
    return std::binary_search(heavy_atoms.begin(), heavy_atoms.end(), atom_of[i]);
  };

  // Within each weight class, carriers sorted by label take the class's
  // values sorted by atom order.
  std::vector<std::size_t> source_of(v.size());
  std::map<double, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (is_heavy(i)) source_of[i] = i;
    else classes[v.domain.weights[i]].push_back(i);
  }
  for (auto& [weight, members] : classes) {
    std::vector<std::size_t> by_label = members;
    std::sort(by_label.begin(), by_label.end(), [&](std::size_t a, std::size_t b) {
      return v.domain.sites[a].label < v.domain.sites[b].label;
    });
    std::vector<std::size_t> by_value = members;
    std::sort(by_value.begin(), by_value.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(atom_of[a], a) < std::tie(atom_of[b], b);
    });
    for (std::size_t k = 0; k < members.size(); ++k) source_of[by_label[k]] = by_value[k];
  }

  MtoOneResult out;
  out.domain = refine_domain(v.domain, m);
  std::vector<Vector> values(out.domain.children.size());
  for (std::size_t c = 0; c < values.size(); ++c)
    values[c] = v.values[source_of[out.domain.parent_of[c]]];
  out.u = make_sampled_map(out.domain.children, std::move(values));
  return out;
}

MultiplicityReport multiplicity_report(const SampledMap& u, const HeavySet& heavy,
                                       double cluster_tol) {
  const ValueLaw law = value_law(u, cluster_tol);
  const auto heavy_atoms = match_heavy_atoms(law, heavy);
  MultiplicityReport report;
  std::set<std::size_t> light_counts;
  for (std::size_t k = 0; k < law.atoms.size(); ++k) {
    const auto& atom = law.atoms[k];
    const bool h = std::binary_search(heavy_atoms.begin(), heavy_atoms.end(), k);
    report.atoms.push_back({atom.value, atom.mass, atom.members.size(), h});
    if (!h) {
      light_counts.insert(atom.members.size());
      report.max_light_count = std::max(report.max_light_count, atom.members.size());
    }
  }
  report.almost_injective = light_counts.empty() || (light_counts.size() == 1 && *light_counts.begin() == 1);
  if (light_counts.size() == 1) report.almost_m_to_1 = *light_counts.begin();
  return report;
}

Restriction restrict_to_value_set(const SampledMap& u, const Box& box) {
  validate(u);
  if (box.lower.size() != u.codomain_dimension || box.upper.size() != u.codomain_dimension)
    fail(ErrorCode::DimensionMismatch, "box dimension does not match the codomain");
  for (std::size_t d = 0; d < box.lower.size(); ++d)
    if (!(box.lower[d] < box.upper[d]))
      fail(ErrorCode::InvalidArgument, "box is degenerate in coordinate " + std::to_string(d));

  Restriction out;
  out.map.codomain_dimension = u.codomain_dimension;
  out.map.domain.dimension = u.domain.dimension;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& x = u.values[i];
    bool inside = true;
    for (std::size_t d = 0; d < x.size() && inside; ++d)
      inside = box.lower[d] <= x[d] && x[d] <= box.upper[d];
    if (!inside) continue;
    out.kept.push_back(i);
    out.map.domain.sites.push_back(u.domain.sites[i]);
    out.map.domain.weights.push_back(u.domain.weights[i]);
    out.map.values.push_back(x);
  }
  return out;
}

}  // namespace polarfact
