#include "polarfact/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "polarfact/error.hpp"

namespace polarfact {

double DiscreteMeasure::total_mass() const noexcept {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

const Vector& DiscreteMeasure::coords(std::size_t i) const {
  const auto& c = sites.at(i).coords;
  if (!c) fail(ErrorCode::DimensionMismatch, "site '" + sites[i].label + "' has no coordinates");
  return *c;
}

std::optional<std::size_t> DiscreteMeasure::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (sites[i].label == label) return i;
  return std::nullopt;
}

double validate(const DiscreteMeasure& measure) {
  if (measure.sites.size() != measure.weights.size())
    fail(ErrorCode::DimensionMismatch, "measure has " + std::to_string(measure.sites.size()) +
                                           " points but " + std::to_string(measure.weights.size()) +
                                           " weights");
  if (measure.sites.empty()) fail(ErrorCode::InvalidArgument, "measure has no points");
  if (measure.dimension && *measure.dimension == 0)
    fail(ErrorCode::DimensionMismatch, "dimension must be at least 1");

  std::unordered_set<std::string> labels;
  double total = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const auto& site = measure.sites[i];
    const double w = measure.weights[i];
    if (!(w > 0.0) || !std::isfinite(w))
      fail(ErrorCode::NegativeWeight,
           "weight of '" + site.label + "' is " + std::to_string(w) + "; weights must be > 0");
    if (!labels.insert(site.label).second)
      fail(ErrorCode::DuplicateLabel, "label '" + site.label + "' occurs more than once");
    if (measure.dimension) {
      if (!site.coords || site.coords->size() != *measure.dimension)
        fail(ErrorCode::DimensionMismatch,
             "point '" + site.label + "' does not have " + std::to_string(*measure.dimension) +
                 " coordinates");
      for (double x : *site.coords)
        if (!std::isfinite(x))
          fail(ErrorCode::InvalidArgument, "point '" + site.label + "' has a non-finite coordinate");
    } else if (site.coords) {
      fail(ErrorCode::DimensionMismatch,
           "abstract measure point '" + site.label + "' carries coordinates");
    }
    total += w;
  }
  if (!std::isfinite(total)) fail(ErrorCode::InvalidArgument, "total mass is not finite");
  return total;
}

namespace {

std::vector<std::string> default_labels(std::size_t n, std::vector<std::string> labels,
                                        const char* prefix) {
  if (!labels.empty()) return labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return labels;
}

}  // namespace

DiscreteMeasure make_measure(std::vector<Vector> coords, std::vector<double> weights,
                             std::vector<std::string> labels) {
  if (coords.empty()) fail(ErrorCode::InvalidArgument, "measure has no points");
  labels = default_labels(coords.size(), std::move(labels), "p");
  if (labels.size() != coords.size())
    fail(ErrorCode::InvalidArgument, "label count does not match point count");
  DiscreteMeasure m;
  m.dimension = coords.front().size();
  m.weights = std::move(weights);
  m.sites.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i)
    m.sites.push_back({std::move(labels[i]), std::move(coords[i])});
  validate(m);
  return m;
}

DiscreteMeasure make_uniform_measure(std::vector<Vector> coords, double total) {
  const std::size_t n = coords.size();
  return make_measure(std::move(coords), std::vector<double>(n, total / static_cast<double>(n)));
}

DiscreteMeasure make_abstract_measure(std::vector<double> weights,
                                      std::vector<std::string> labels) {
  labels = default_labels(weights.size(), std::move(labels), "x");
  if (labels.size() != weights.size())
    fail(ErrorCode::InvalidArgument, "label count does not match point count");
  DiscreteMeasure m;
  m.weights = std::move(weights);
  for (auto& l : labels) m.sites.push_back({std::move(l), std::nullopt});
  validate(m);
  return m;
}

void validate(const SampledMap& map) {
  validate(map.domain);
  if (map.values.size() != map.domain.size())
    fail(ErrorCode::DimensionMismatch, "map has " + std::to_string(map.values.size()) +
                                           " values for " + std::to_string(map.domain.size()) +
                                           " domain points");
  if (map.codomain_dimension == 0)
    fail(ErrorCode::DimensionMismatch, "codomain dimension must be at least 1");
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (map.values[i].size() != map.codomain_dimension)
      fail(ErrorCode::DimensionMismatch, "value at '" + map.domain.sites[i].label + "' has " +
                                             std::to_string(map.values[i].size()) +
                                             " components, expected " +
                                             std::to_string(map.codomain_dimension));
    for (double x : map.values[i])
      if (!std::isfinite(x))
        fail(ErrorCode::InvalidArgument,
             "value at '" + map.domain.sites[i].label + "' is not finite");
  }
}

SampledMap make_sampled_map(DiscreteMeasure domain, std::vector<Vector> values) {
  SampledMap map;
  map.codomain_dimension = values.empty() ? 0 : values.front().size();
  map.domain = std::move(domain);
  map.values = std::move(values);
  validate(map);
  return map;
}

double ValueLaw::total_mass() const noexcept {
  double total = 0.0;
  for (const auto& a : atoms) total += a.mass;
  return total;
}

namespace {

std::vector<long long> snap(const Vector& v, double tol) {
  std::vector<long long> key(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) key[k] = std::llround(v[k] / tol);
  return key;
}

template <class Key, class KeyFn>
ValueLaw group_by(const SampledMap& map, double tol, KeyFn key_of) {
  std::map<Key, std::size_t> index;
  ValueLaw law;
  law.tolerance = tol;
  for (std::size_t i = 0; i < map.size(); ++i) {
    auto [it, inserted] = index.try_emplace(key_of(map.values[i]), law.atoms.size());
    if (inserted) law.atoms.push_back({map.values[i], 0.0, {}});
    auto& atom = law.atoms[it->second];
    atom.mass += map.domain.weights[i];
    atom.members.push_back(i);
  }
  // Reorder atoms by key so the law does not depend on domain order.
  std::vector<ValueAtom> ordered;
  ordered.reserve(law.atoms.size());
  for (const auto& [key, idx] : index) ordered.push_back(std::move(law.atoms[idx]));
  law.atoms = std::move(ordered);
  return law;
}

}  // namespace

ValueLaw value_law(const SampledMap& map, double cluster_tol) {
  validate(map);
  if (!(cluster_tol >= 0.0) || !std::isfinite(cluster_tol))
    fail(ErrorCode::InvalidArgument, "cluster tolerance must be finite and >= 0");
  if (cluster_tol == 0.0)
    return group_by<Vector>(map, 0.0, [](const Vector& v) { return v; });
  return group_by<std::vector<long long>>(
      map, cluster_tol, [cluster_tol](const Vector& v) { return snap(v, cluster_tol); });
}

bool masses_close(double a, double b, double rel_tol) noexcept {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

bool equimeasurable(const SampledMap& f, const SampledMap& g, double cluster_tol) {
  validate(f);
  validate(g);
  if (f.codomain_dimension != g.codomain_dimension)
    fail(ErrorCode::DimensionMismatch, "maps have different codomain dimensions");
  const double mf = f.domain.total_mass();
  const double mg = g.domain.total_mass();
  if (!masses_close(mf, mg, 1e-12))
    fail(ErrorCode::UnequalMass,
         "total masses " + std::to_string(mf) + " and " + std::to_string(mg) + " differ");

  const ValueLaw lf = value_law(f, cluster_tol);
  const ValueLaw lg = value_law(g, cluster_tol);
  if (lf.atoms.size() != lg.atoms.size()) return false;
  for (std::size_t k = 0; k < lf.atoms.size(); ++k) {
    const auto& a = lf.atoms[k];
    const auto& b = lg.atoms[k];
    const bool same_value = cluster_tol == 0.0
                                ? a.value == b.value
                                : snap(a.value, cluster_tol) == snap(b.value, cluster_tol);
    if (!same_value || !masses_close(a.mass, b.mass)) return false;
  }
  return true;
}

DiscreteMeasure pushforward(const DiscreteMeasure& measure,
                            std::span<const std::size_t> assignment,
                            const DiscreteMeasure& target) {
  validate(measure);
  validate(target);
  if (assignment.size() != measure.size())
    fail(ErrorCode::UnknownLabel, "assignment is not total on the domain");
  std::vector<double> incoming(target.size(), 0.0);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (assignment[i] >= target.size())
      fail(ErrorCode::UnknownLabel, "target index " + std::to_string(assignment[i]) +
                                        " out of range for '" + measure.sites[i].label + "'");
    incoming[assignment[i]] += measure.weights[i];
  }
  DiscreteMeasure image;
  image.dimension = target.dimension;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (incoming[j] <= 0.0) continue;
    image.sites.push_back(target.sites[j]);
    image.weights.push_back(incoming[j]);
  }
  return image;
}

DiscreteMeasure pushforward(const DiscreteMeasure& measure,
                            const std::map<std::string, std::string>& assignment,
                            const DiscreteMeasure& target) {
  std::vector<std::size_t> indices(measure.size());
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const auto it = assignment.find(measure.sites[i].label);
    if (it == assignment.end())
      fail(ErrorCode::UnknownLabel, "no image for '" + measure.sites[i].label + "'");
    const auto j = target.index_of(it->second);
    if (!j) fail(ErrorCode::UnknownLabel, "unknown target label '" + it->second + "'");
    indices[i] = *j;
  }
  return pushforward(measure, indices, target);
}

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b, double rel_tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.sites[i].label != b.sites[i].label) return false;
    if (!masses_close(a.weights[i], b.weights[i], rel_tol)) return false;
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "dot product of unequal lengths");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "distance of unequal lengths");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace polarfact
