#include "polarfact/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "network_simplex.hpp"
#include "polarfact/error.hpp"

namespace polarfact {

CostMatrix make_cost_matrix(std::size_t rows, std::size_t cols, std::vector<double> entries,
                            std::vector<double> source_weights,
                            std::vector<double> target_weights) {
  if (entries.size() != rows * cols)
    fail(ErrorCode::DimensionMismatch, "cost matrix has the wrong number of entries");
  if (source_weights.size() != rows || target_weights.size() != cols)
    fail(ErrorCode::MarginalMismatch, "marginals do not match the cost matrix shape");
  for (double c : entries)
    if (!std::isfinite(c)) fail(ErrorCode::InvalidArgument, "cost entries must be finite");
  return {rows, cols, std::move(entries), std::move(source_weights), std::move(target_weights)};
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> sums(source_weights.size(), 0.0);
  for (const auto& t : triplets) sums.at(t.i) += t.mass;
  return sums;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> sums(target_weights.size(), 0.0);
  for (const auto& t : triplets) sums.at(t.j) += t.mass;
  return sums;
}

void check_marginals(const TransportPlan& plan, double rel_tol) {
  const double total = std::accumulate(plan.source_weights.begin(), plan.source_weights.end(), 0.0);
  const double slack = rel_tol * std::max(1.0, total);
  for (const auto& t : plan.triplets) {
    if (t.i >= plan.source_weights.size() || t.j >= plan.target_weights.size())
      fail(ErrorCode::MarginalMismatch, "triplet index out of range");
    if (!(t.mass >= 0.0)) fail(ErrorCode::MarginalMismatch, "triplet with negative mass");
  }
  const auto rows = plan.row_sums();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::abs(rows[i] - plan.source_weights[i]) > slack)
      fail(ErrorCode::MarginalMismatch, "row " + std::to_string(i) + " sums to " +
                                            std::to_string(rows[i]) + ", expected " +
                                            std::to_string(plan.source_weights[i]));
  const auto cols = plan.col_sums();
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (std::abs(cols[j] - plan.target_weights[j]) > slack)
      fail(ErrorCode::MarginalMismatch, "column " + std::to_string(j) + " sums to " +
                                            std::to_string(cols[j]) + ", expected " +
                                            std::to_string(plan.target_weights[j]));
}

CostMatrix build_cost(const SampledMap& u, const DiscreteMeasure& Y) {
  validate(u);
  const double mass_y = validate(Y);
  if (!Y.dimension || *Y.dimension != u.codomain_dimension)
    fail(ErrorCode::DimensionMismatch, "u takes values in R^" +
                                           std::to_string(u.codomain_dimension) +
                                           " but Y is not a subset of that space");
  const double mass_x = u.domain.total_mass();
  if (!masses_close(mass_x, mass_y))
    fail(ErrorCode::UnequalMass, "mu(X) = " + std::to_string(mass_x) +
                                     " differs from the mass of Y = " + std::to_string(mass_y));
  CostMatrix cost;
  cost.rows = u.size();
  cost.cols = Y.size();
  cost.entries.resize(cost.rows * cost.cols);
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      cost.entries[i * cost.cols + j] = 0.5 * squared_distance(u.values[i], Y.coords(j));
  cost.source_weights = u.domain.weights;
  cost.target_weights = Y.weights;
  return cost;
}

namespace {

void check_plan_against(const TransportPlan& plan, std::span<const double> source,
                        std::span<const double> target) {
  if (plan.source_weights.size() != source.size() || plan.target_weights.size() != target.size())
    fail(ErrorCode::MarginalMismatch, "plan shape does not match the measures");
  for (std::size_t i = 0; i < source.size(); ++i)
    if (!masses_close(plan.source_weights[i], source[i]))
      fail(ErrorCode::MarginalMismatch, "plan source marginal differs at row " + std::to_string(i));
  for (std::size_t j = 0; j < target.size(); ++j)
    if (!masses_close(plan.target_weights[j], target[j]))
      fail(ErrorCode::MarginalMismatch,
           "plan target marginal differs at column " + std::to_string(j));
  check_marginals(plan);
}

}  // namespace

double objective(const TransportPlan& plan, const CostMatrix& cost) {
  check_plan_against(plan, cost.source_weights, cost.target_weights);
  double total = 0.0;
  for (const auto& t : plan.triplets) total += t.mass * cost(t.i, t.j);
  return total;
}

double dual_objective(const DualPair& duals, const CostMatrix& cost) {
  if (duals.phi_c.size() != cost.rows || duals.phi.size() != cost.cols)
    fail(ErrorCode::DimensionMismatch, "duals do not match the cost matrix shape");
  double total = 0.0;
  for (std::size_t i = 0; i < cost.rows; ++i) total += cost.source_weights[i] * duals.phi_c[i];
  for (std::size_t j = 0; j < cost.cols; ++j) total += cost.target_weights[j] * duals.phi[j];
  return total;
}

double relative_gap(double primal, double dual_value) noexcept {
  return std::abs(primal - dual_value) / std::max(1.0, std::abs(primal));
}

namespace {

// phi^c_i = min_j c_ij - phi_j, exact for the given phi.
std::vector<double> row_transform(const CostMatrix& cost, std::span<const double> phi) {
  std::vector<double> phi_c(cost.rows, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      phi_c[i] = std::min(phi_c[i], cost(i, j) - phi[j]);
  return phi_c;
}

DualPair normalised(const CostMatrix& cost, std::vector<double> phi) {
  const double shift = phi.front();
  for (double& p : phi) p -= shift;
  DualPair duals;
  duals.phi_c = row_transform(cost, phi);
  duals.phi = std::move(phi);
  return duals;
}

}  // namespace

MkSolution solve_mk(const CostMatrix& cost) {
  if (cost.source_weights.size() != cost.rows || cost.target_weights.size() != cost.cols)
    fail(ErrorCode::MarginalMismatch, "marginals do not match the cost matrix shape");
  for (double w : cost.source_weights)
    if (!(w > 0.0)) fail(ErrorCode::NegativeWeight, "source weights must be positive");
  for (double w : cost.target_weights)
    if (!(w > 0.0)) fail(ErrorCode::NegativeWeight, "target weights must be positive");
  const double mass_x = std::accumulate(cost.source_weights.begin(), cost.source_weights.end(), 0.0);
  const double mass_y = std::accumulate(cost.target_weights.begin(), cost.target_weights.end(), 0.0);
  if (!masses_close(mass_x, mass_y))
    fail(ErrorCode::UnequalMass, "marginal totals " + std::to_string(mass_x) + " and " +
                                     std::to_string(mass_y) + " differ");

  const auto simplex = detail::transportation_simplex(cost, cost.source_weights, cost.target_weights);

  MkSolution sol;
  sol.stats = simplex.stats;
  sol.plan.source_weights = cost.source_weights;
  sol.plan.target_weights = cost.target_weights;
  const double drop = 1e-14 * std::max(1.0, mass_x);
  for (const auto& a : simplex.basis)
    if (a.flow > drop) sol.plan.triplets.push_back({a.row, a.col, a.flow});
  std::sort(sol.plan.triplets.begin(), sol.plan.triplets.end(),
            [](const Triplet& a, const Triplet& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });

  sol.duals = normalised(cost, simplex.col_potential);
  sol.primal = objective(sol.plan, cost);
  sol.dual_value = dual_objective(sol.duals, cost);
  sol.gap = std::abs(sol.primal - sol.dual_value);
  return sol;
}

MkSolution solve_mk(const CostMatrix& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  validate(mu);
  validate(nu);
  if (mu.size() != cost.rows || nu.size() != cost.cols)
    fail(ErrorCode::MarginalMismatch, "measures do not match the cost matrix shape");
  if (!masses_close(mu.total_mass(), nu.total_mass()))
    fail(ErrorCode::UnequalMass, "mu and nu have different total mass");
  CostMatrix with_marginals = cost;
  with_marginals.source_weights = mu.weights;
  with_marginals.target_weights = nu.weights;
  return solve_mk(with_marginals);
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

DualPair strictly_complementary_duals(const TransportPlan& plan, const DualPair& duals,
                                      const CostMatrix& cost, std::size_t max_components) {
  const std::size_t m = cost.rows, n = cost.cols;
  if (duals.phi_c.size() != m || duals.phi.size() != n)
    fail(ErrorCode::DimensionMismatch, "duals do not match the cost matrix shape");

  // Components of the support graph; potentials are rigid inside each one
  // and carry a single free offset t_C (rows + t_C, columns - t_C).
  DisjointSets sets(m + n);
  for (const auto& t : plan.triplets) sets.unite(t.i, m + t.j);
  std::vector<std::size_t> comp(m + n);
  std::vector<std::size_t> root_to_comp(m + n, std::numeric_limits<std::size_t>::max());
  std::size_t r = 0;
  for (std::size_t v = 0; v < m + n; ++v) {
    const std::size_t root = sets.find(v);
    if (root_to_comp[root] == std::numeric_limits<std::size_t>::max()) root_to_comp[root] = r++;
    comp[v] = root_to_comp[root];
  }
  if (r <= 1 || r > max_components) return duals;

  // Constraint t_C - t_D <= w for row i in C and column j in D, with
  // w = c_ij - phi^c_i - phi_j. Stored as edge D -> C of weight w.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> w(r * r, kInf);
  double scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t ci = comp[i];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t cj = comp[m + j];
      if (ci == cj) continue;
      const double rc = cost(i, j) - duals.phi_c[i] - duals.phi[j];
      double& e = w[cj * r + ci];
      e = std::min(e, rc);
      scale = std::max(scale, std::abs(cost(i, j)));
    }
  }

  // Karp's minimum cycle mean: the largest uniform slack achievable.
  std::vector<double> walk((r + 1) * r, kInf);
  for (std::size_t v = 0; v < r; ++v) walk[v] = 0.0;
  for (std::size_t k = 1; k <= r; ++k) {
    const double* prev = &walk[(k - 1) * r];
    double* cur = &walk[k * r];
    for (std::size_t a = 0; a < r; ++a) {
      if (prev[a] == kInf) continue;
      const double* row = &w[a * r];
      for (std::size_t b = 0; b < r; ++b)
        if (row[b] != kInf) cur[b] = std::min(cur[b], prev[a] + row[b]);
    }
  }
  double min_mean = kInf;
  for (std::size_t v = 0; v < r; ++v) {
    const double last = walk[r * r + v];
    if (last == kInf) continue;
    double worst = -kInf;
    for (std::size_t k = 0; k < r; ++k) {
      const double dk = walk[k * r + v];
      if (dk == kInf) continue;
      worst = std::max(worst, (last - dk) / static_cast<double>(r - k));
    }
    min_mean = std::min(min_mean, worst);
  }
  const double slack = min_mean == kInf ? scale : (min_mean > 0.0 ? 0.5 * min_mean : min_mean);

  // Bellman-Ford from a virtual source on weights w - slack.
  std::vector<double> t(r, 0.0);
  for (std::size_t round = 0; round < r; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < r; ++a) {
      const double* row = &w[a * r];
      for (std::size_t b = 0; b < r; ++b) {
        if (row[b] == kInf) continue;
        const double cand = t[a] + row[b] - slack;
        if (cand < t[b] - 1e-15 * scale) {
          t[b] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  std::vector<double> phi(n);
  for (std::size_t j = 0; j < n; ++j) phi[j] = duals.phi[j] - t[comp[m + j]];
  return normalised(cost, std::move(phi));
}

double brute_force_mk(const CostMatrix& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  validate(mu);
  validate(nu);
  const std::size_t n = mu.size();
  if (nu.size() != n || n > 8 || cost.rows != n || cost.cols != n)
    fail(ErrorCode::OracleScopeExceeded, "permutation oracle needs |X| = |Y| <= 8");
  const double w = mu.weights.front();
  auto uniform = [w](const DiscreteMeasure& m) {
    return std::all_of(m.weights.begin(), m.weights.end(),
                       [w](double x) { return masses_close(x, w, 1e-12); });
  };
  if (!uniform(mu) || !uniform(nu))
    fail(ErrorCode::OracleScopeExceeded, "permutation oracle needs uniform equal weights");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cost(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return w * best;
}

double shifted_objective(const TransportPlan& plan, const ConvexPotential& psi,
                         const SampledMap& u) {
  validate(u);
  validate(psi);
  check_plan_against(plan, u.domain.weights, psi.support.weights);
  std::vector<double> conj(u.size(), std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  for (const auto& t : plan.triplets) {
    if (std::isnan(conj[t.i])) conj[t.i] = fenchel_conjugate(psi, u.values[t.i]);
    total += t.mass * fenchel_gap(psi, conj[t.i], u.values[t.i], t.j);
  }
  return total;
}

TransportPlan random_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          std::uint64_t seed) {
  validate(mu);
  validate(nu);
  if (!masses_close(mu.total_mass(), nu.total_mass()))
    fail(ErrorCode::UnequalMass, "mu and nu have different total mass");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rows(mu.size()), cols(nu.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);

  std::vector<double> a = mu.weights, b = nu.weights;
  TransportPlan plan;
  plan.source_weights = mu.weights;
  plan.target_weights = nu.weights;
  std::size_t r = 0, c = 0;
  while (r < rows.size() && c < cols.size()) {
    const std::size_t i = rows[r], j = cols[c];
    const bool last_row = r + 1 == rows.size();
    const bool last_col = c + 1 == cols.size();
    // The last row and column absorb rounding residue.
    double f = last_row ? b[j] : (last_col ? a[i] : std::min(a[i], b[j]));
    if (last_row && last_col) f = std::max(a[i], b[j]);
    if (f > 0.0) plan.triplets.push_back({i, j, f});
    a[i] -= f;
    b[j] -= f;
    if (last_row) ++c;
    else if (last_col) ++r;
    else if (a[i] <= b[j]) ++r;
    else ++c;
  }
  std::sort(plan.triplets.begin(), plan.triplets.end(),
            [](const Triplet& x, const Triplet& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });
  return plan;
}

std::size_t cyclic_monotonicity_violations(const TransportPlan& plan, const CostMatrix& cost,
                                           std::size_t samples, std::size_t max_length,
                                           std::uint64_t seed, double tol) {
  const auto& support = plan.triplets;
  if (support.size() < 2 || max_length < 2) return 0;
  std::mt19937_64 rng(seed);
  const std::size_t longest = std::min(max_length, support.size());
  std::uniform_int_distribution<std::size_t> pick_len(2, longest);
  std::uniform_int_distribution<std::size_t> pick(0, support.size() - 1);
  std::vector<std::size_t> cycle;
  std::size_t violations = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t len = pick_len(rng);
    cycle.clear();
    while (cycle.size() < len) {
      const std::size_t k = pick(rng);
      if (std::find(cycle.begin(), cycle.end(), k) == cycle.end()) cycle.push_back(k);
    }
    double on_support = 0.0, shifted = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const auto& cur = support[cycle[k]];
      const auto& next = support[cycle[(k + 1) % len]];
      on_support += cost(cur.i, cur.j);
      shifted += cost(cur.i, next.j);
    }
    if (on_support > shifted + tol) ++violations;
  }
  return violations;
}

}  // namespace polarfact
