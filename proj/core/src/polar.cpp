#include "polarfact/polar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "polarfact/error.hpp"

namespace polarfact {

TransportPlan plan_from_map(std::span<const std::size_t> s, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, bool check) {
  validate(mu);
  validate(nu);
  if (s.size() != mu.size()) fail(ErrorCode::UnknownLabel, "map is not total on X");
  TransportPlan plan;
  plan.source_weights = mu.weights;
  plan.target_weights = nu.weights;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (s[i] >= nu.size())
      fail(ErrorCode::UnknownLabel, "image of '" + mu.sites[i].label + "' is out of range");
    plan.triplets.push_back({i, s[i], mu.weights[i]});
  }
  if (check) {
    const auto cols = plan.col_sums();
    const double slack = kMassRelTol * std::max(1.0, nu.total_mass());
    std::size_t worst = 0;
    double worst_diff = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double d = std::abs(cols[j] - nu.weights[j]);
      if (d > worst_diff) {
        worst_diff = d;
        worst = j;
      }
    }
    if (worst_diff > slack)
      fail(ErrorCode::NotMeasurePreserving,
           "column '" + nu.sites[worst].label + "' receives " + std::to_string(cols[worst]) +
               " but has mass " + std::to_string(nu.weights[worst]) + " (discrepancy " +
               std::to_string(worst_diff) + ")");
  }
  return plan;
}

namespace {

void check_plan_shape(const TransportPlan& plan, const SampledMap& u, const ConvexPotential& psi) {
  if (plan.source_weights.size() != u.size() || plan.target_weights.size() != psi.support.size())
    fail(ErrorCode::MarginalMismatch, "plan shape does not match u and the support of psi");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!masses_close(plan.source_weights[i], u.domain.weights[i]))
      fail(ErrorCode::MarginalMismatch, "plan source marginal differs from mu");
  for (std::size_t j = 0; j < psi.support.size(); ++j)
    if (!masses_close(plan.target_weights[j], psi.support.weights[j]))
      fail(ErrorCode::MarginalMismatch, "plan target marginal differs from nu");
  check_marginals(plan);
}

}  // namespace

InclusionCheck verify_polar_inclusion(const TransportPlan& plan, const ConvexPotential& psi,
                                      const SampledMap& u, double tol) {
  validate(u);
  validate(psi);
  check_plan_shape(plan, u, psi);
  InclusionCheck out;
  std::vector<double> conj(u.size(), std::numeric_limits<double>::quiet_NaN());
  out.gaps.reserve(plan.triplets.size());
  for (const auto& t : plan.triplets) {
    if (std::isnan(conj[t.i])) conj[t.i] = fenchel_conjugate(psi, u.values[t.i]);
    const double g = fenchel_gap(psi, conj[t.i], u.values[t.i], t.j);
    out.gaps.push_back(g);
    out.max_gap = std::max(out.max_gap, g);
  }
  out.holds = out.max_gap <= tol;
  return out;
}

OptimalityCheck verify_optimality_of_inclusion(const TransportPlan& pi, const ConvexPotential& psi,
                                               const SampledMap& u, double tol) {
  const InclusionCheck inclusion = verify_polar_inclusion(pi, psi, u, tol);
  if (!inclusion.holds)
    fail(ErrorCode::InclusionNotCertified,
         "Fenchel gap " + std::to_string(inclusion.max_gap) + " exceeds tolerance " + std::to_string(tol));
  const CostMatrix cost = build_cost(u, psi.support);
  const MkSolution reference = solve_mk(cost);
  OptimalityCheck out;
  out.plan_cost = objective(pi, cost);
  out.optimum = reference.primal;
  out.shifted_cost = shifted_objective(pi, psi, u);
  const double slack = 1e-9 * (1.0 + std::abs(out.optimum));
  out.optimal = out.plan_cost <= out.optimum + slack && out.shifted_cost <= slack;
  return out;
}

std::string_view to_string(Classification c) noexcept {
  return c == Classification::Factorisation ? "Factorisation" : "InclusionOnly";
}

PolarResult polar_factorize(const SampledMap& u, const DiscreteMeasure& Y,
                            const PolarOptions& options) {
  const CostMatrix cost = build_cost(u, Y);
  const MkSolution sol = solve_mk(cost);

  PolarResult out;
  out.plan = sol.plan;
  out.stats = sol.stats;
  out.duals = options.centre_duals ? strictly_complementary_duals(sol.plan, sol.duals, cost)
                                   : sol.duals;
  out.primal = sol.primal;
  out.dual_value = dual_objective(out.duals, cost);
  if (relative_gap(out.primal, out.dual_value) > 1e-9)
    fail(ErrorCode::NumericalFailure, "duality gap " +
                                          std::to_string(out.primal - out.dual_value) +
                                          " after dual recovery");

  out.psi = potential_from_duals(Y, out.duals.phi);
  const InclusionCheck inclusion = verify_polar_inclusion(out.plan, out.psi, u, options.tol);
  out.gaps = inclusion.gaps;
  out.max_gap = inclusion.max_gap;
  if (!inclusion.holds)
    fail(ErrorCode::NumericalFailure,
         "optimal plan failed its inclusion certificate (gap " + std::to_string(out.max_gap) + ")");

  // psi*(u(x)) = |u(x)|^2/2 - phi^c(x) at every X site.
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double half_norm = 0.5 * squared_norm(u.values[i]);
    const double err =
        std::abs(fenchel_conjugate(out.psi, u.values[i]) - (half_norm - out.duals.phi_c[i]));
    out.conjugate_identity_error = std::max(out.conjugate_identity_error, err);
    if (err > 1e-8 * std::max(1.0, half_norm))
      fail(ErrorCode::NumericalFailure, "conjugate identity fails at '" +
                                            u.domain.sites[i].label + "' by " + std::to_string(err));
  }

  // A row is deterministic when its main column carries all but 1e-9 of it.
  const std::size_t m = u.size();
  std::vector<std::size_t> main_col(m, 0);
  std::vector<double> main_mass(m, 0.0), row_mass(m, 0.0);
  for (const auto& t : out.plan.triplets) {
    row_mass[t.i] += t.mass;
    if (t.mass > main_mass[t.i]) {
      main_mass[t.i] = t.mass;
      main_col[t.i] = t.j;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double mu_i = u.domain.weights[i];
    if (main_mass[i] >= (1.0 - 1e-9) * mu_i) {
      if (row_mass[i] > main_mass[i]) out.residues.push_back({i, row_mass[i] - main_mass[i]});
    } else {
      out.split_rows.push_back(i);
    }
  }
  if (!out.split_rows.empty()) return out;

  // u# is well defined only if every column is reached by rows with one value.
  std::vector<std::size_t> first_row(Y.size(), m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t& r = first_row[main_col[i]];
    if (r == m) r = i;
    else if (u.values[r] != u.values[i]) return out;
  }
  if (std::find(first_row.begin(), first_row.end(), m) != first_row.end()) return out;

  TransportPlan factor_plan;
  try {
    factor_plan = plan_from_map(main_col, u.domain, Y);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotMeasurePreserving) return out;
    throw;
  }
  std::vector<Vector> sharp(Y.size());
  for (std::size_t j = 0; j < Y.size(); ++j) sharp[j] = u.values[first_row[j]];
  SampledMap u_sharp = make_sampled_map(Y, std::move(sharp));
  if (!equimeasurable(u, u_sharp))
    fail(ErrorCode::NumericalFailure, "u# is not equimeasurable with u");

  out.classification = Classification::Factorisation;
  out.factor_map = std::move(main_col);
  out.u_sharp = std::move(u_sharp);
  return out;
}

DegeneracyReport degeneracy_report(const TransportPlan& plan, const DualPair& duals,
                                   const CostMatrix& cost, double tol) {
  if (duals.phi_c.size() != cost.rows || duals.phi.size() != cost.cols)
    fail(ErrorCode::CertificateMissing, "duals do not match the cost matrix");
  const double primal = objective(plan, cost);
  const double dual_value = dual_objective(duals, cost);
  if (relative_gap(primal, dual_value) > 1e-9)
    fail(ErrorCode::CertificateMissing, "plan and duals do not have zero duality gap");

  DegeneracyReport report;
  report.zero_reduced_cost_columns.assign(cost.rows, 0);
  report.support_columns.assign(cost.rows, 0);
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      if (std::abs(cost(i, j) - duals.phi_c[i] - duals.phi[j]) <= tol)
        ++report.zero_reduced_cost_columns[i];
  for (const auto& t : plan.triplets) ++report.support_columns[t.i];

  double total = 0.0, degenerate = 0.0, split = 0.0;
  for (std::size_t i = 0; i < cost.rows; ++i) {
    const double w = cost.source_weights[i];
    total += w;
    if (report.zero_reduced_cost_columns[i] >= 2) degenerate += w;
    if (report.support_columns[i] >= 2) split += w;
  }
  report.degeneracy_index = degenerate / total;
  report.split_index = split / total;
  return report;
}

}  // namespace polarfact
