#include <doctest.h>

#include <algorithm>
#include <random>

#include "polarfact/polarfact.hpp"
#include "test_support.hpp"

using namespace polarfact;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

CostMatrix uniform_cost(std::size_t n, std::vector<double> entries) {
  const std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return make_cost_matrix(n, n, std::move(entries), w, w);
}

// Reduced costs non-negative and zero on the support.
void check_certificate(const MkSolution& sol, const CostMatrix& cost) {
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      CHECK(cost(i, j) - sol.duals.phi_c[i] - sol.duals.phi[j] >= -1e-9);
  for (const auto& t : sol.plan.triplets)
    CHECK(std::abs(cost(t.i, t.j) - sol.duals.phi_c[t.i] - sol.duals.phi[t.j]) <= 1e-9);
  CHECK(relative_gap(sol.primal, sol.dual_value) <= 1e-9);
  CHECK(sol.duals.phi[0] == 0.0);
}

}  // namespace

TEST_CASE("build_cost") {
  const auto Y = make_uniform_measure({{0.0}, {1.0}});
  const auto c = build_cost(testsupport::abstract_map({{1.0}, {0.0}}), Y);
  CHECK(c.entries == std::vector<double>{0.5, 0.0, 0.0, 0.5});

  const auto diag = build_cost(testsupport::abstract_map({{0.0}, {1.0}}), Y);
  CHECK(diag(0, 0) == 0.0);
  CHECK(diag(1, 1) == 0.0);

  const auto planar = build_cost(testsupport::abstract_map({{1.0, 0.0}}), make_uniform_measure({{0.0, 0.0}}));
  CHECK(planar(0, 0) == doctest::Approx(0.5));

  CHECK(code_of([&] { build_cost(testsupport::abstract_map({{1.0, 0.0}, {0.0, 0.0}}), Y); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { build_cost(testsupport::abstract_map({{1.0}, {0.0}}, {0.5, 0.6}), Y); }) ==
        ErrorCode::UnequalMass);
}

TEST_CASE("objective") {
  const auto cost = uniform_cost(2, {0.5, 0.0, 0.0, 0.5});
  TransportPlan zero{{{0, 1, 0.5}, {1, 0, 0.5}}, cost.source_weights, cost.target_weights};
  CHECK(objective(zero, cost) == 0.0);

  TransportPlan independent{{{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}},
                            cost.source_weights, cost.target_weights};
  CHECK(objective(independent, cost) == doctest::Approx(0.25 * 0.5 + 0.25 * 0.5));

  TransportPlan bad{{{0, 0, 0.5}}, cost.source_weights, cost.target_weights};
  CHECK(code_of([&] { objective(bad, cost); }) == ErrorCode::MarginalMismatch);
}

TEST_CASE("objective obeys the rectangle rule") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> e(9);
    for (auto& x : e) x = d(rng);
    const auto cost = uniform_cost(3, e);
    const double w = 1.0 / 3.0, m = 0.1;
    TransportPlan p{{{0, 0, w}, {1, 1, w}, {2, 2, w}}, cost.source_weights, cost.target_weights};
    TransportPlan q{{{0, 0, w - m}, {0, 1, m}, {1, 0, m}, {1, 1, w - m}, {2, 2, w}},
                    cost.source_weights, cost.target_weights};
    const double rect = m * (cost(0, 0) + cost(1, 1) - cost(0, 1) - cost(1, 0));
    CHECK(objective(p, cost) - objective(q, cost) == doctest::Approx(rect).epsilon(1e-12));
  }
}

TEST_CASE("solve_mk on small instances") {
  SUBCASE("zero-cost anti-diagonal") {
    const auto cost = uniform_cost(2, {0.5, 0.0, 0.0, 0.5});
    const auto sol = solve_mk(cost);
    CHECK(sol.plan.triplets == std::vector<Triplet>{{0, 1, 0.5}, {1, 0, 0.5}});
    CHECK(sol.primal == 0.0);
    check_certificate(sol, cost);
  }
  SUBCASE("identity") {
    const auto cost = uniform_cost(2, {0.0, 1.0, 1.0, 0.0});
    const auto sol = solve_mk(cost);
    CHECK(sol.plan.triplets == std::vector<Triplet>{{0, 0, 0.5}, {1, 1, 0.5}});
    CHECK(sol.primal == 0.0);
  }
  SUBCASE("rectangular non-uniform") {
    const auto cost = make_cost_matrix(2, 3, {1, 2, 3, 3, 1, 0}, {0.4, 0.6}, {0.3, 0.3, 0.4});
    const auto sol = solve_mk(cost);
    check_marginals(sol.plan);
    check_certificate(sol, cost);
    // Oracle: the plan is fixed by row 0's flows (a, b) to columns 0 and 1;
    // every vertex lies on the 1/1000 grid.
    double best = 1e9;
    for (int ka = 0; ka <= 300; ++ka)
      for (int kb = 0; kb <= 300; ++kb) {
        const double a = ka / 1000.0, b = kb / 1000.0, c = 0.4 - a - b;
        const double r[3] = {0.3 - a, 0.3 - b, 0.4 - c};
        if (c < -1e-12 || r[2] < -1e-12) continue;
        best = std::min(best, a * 1 + b * 2 + c * 3 + r[0] * 3 + r[1] * 1 + r[2] * 0);
      }
    CHECK(sol.primal == doctest::Approx(best).epsilon(1e-9));
  }
  SUBCASE("unequal masses") {
    const auto cost = make_cost_matrix(1, 1, {1.0}, {1.0}, {2.0});
    CHECK(code_of([&] { solve_mk(cost); }) == ErrorCode::UnequalMass);
  }
}

TEST_CASE("solve_mk matches the permutation oracle on random uniform 6x6") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ys = testsupport::random_points(6, 2, rng);
    const auto us = testsupport::random_points(6, 2, rng);
    const auto u = testsupport::abstract_map(us);
    const auto Y = make_uniform_measure(ys);
    const auto cost = build_cost(u, Y);
    const auto sol = solve_mk(cost, u.domain, Y);
    CHECK(sol.primal == doctest::Approx(testsupport::permutation_optimum(us, ys)).epsilon(1e-12));
    CHECK(sol.primal == doctest::Approx(brute_force_mk(cost, u.domain, Y)).epsilon(1e-12));
    check_certificate(sol, cost);
  }
}

TEST_CASE("solve_mk survives heavy degeneracy deterministically") {
  // All-equal costs and grid ties drive long runs of degenerate pivots.
  const auto flat = uniform_cost(30, std::vector<double>(900, 1.5));
  const auto a = solve_mk(flat);
  CHECK(a.primal == doctest::Approx(1.5));
  check_certificate(a, flat);

  std::vector<Vector> grid;
  for (int x = 0; x < 12; ++x)
    for (int y = 0; y < 12; ++y) grid.push_back({double(x), double(y)});
  const auto Y = make_uniform_measure(grid);
  std::vector<Vector> vals;
  for (const auto& p : grid) vals.push_back({std::round(p[0] / 3.0), 0.0});
  const auto u = testsupport::abstract_map(vals);
  const auto cost = build_cost(u, Y);
  const auto s1 = solve_mk(cost);
  const auto s2 = solve_mk(cost);
  check_certificate(s1, cost);
  CHECK(s1.plan.triplets == s2.plan.triplets);
  CHECK(s1.duals.phi == s2.duals.phi);
}

TEST_CASE("brute_force_mk") {
  const auto one = make_cost_matrix(1, 1, {2.5}, {1.0}, {1.0});
  const auto m1 = make_abstract_measure({1.0});
  CHECK(brute_force_mk(one, m1, m1) == 2.5);

  const auto swap = uniform_cost(2, {0.5, 0.0, 0.0, 0.5});
  const auto m2 = make_abstract_measure({0.5, 0.5});
  CHECK(brute_force_mk(swap, m2, m2) == std::min(0.5 * 0.5 + 0.5 * 0.5, 0.0));

  const auto flat = uniform_cost(3, std::vector<double>(9, 0.7));
  const auto m3 = make_abstract_measure({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(brute_force_mk(flat, m3, m3) == doctest::Approx(0.7));

  const auto m9 = make_abstract_measure(std::vector<double>(9, 1.0 / 9));
  CHECK(code_of([&] { brute_force_mk(uniform_cost(9, std::vector<double>(81, 1.0)), m9, m9); }) ==
        ErrorCode::OracleScopeExceeded);
  const auto skew = make_abstract_measure({0.4, 0.6});
  CHECK(code_of([&] { brute_force_mk(make_cost_matrix(2, 2, {0, 0, 0, 0}, {0.4, 0.6}, {0.5, 0.5}), skew, m2); }) ==
        ErrorCode::OracleScopeExceeded);
}

TEST_CASE("random_plan") {
  std::mt19937_64 rng(1);
  const auto mu = make_abstract_measure(testsupport::random_weights(7, rng));
  const auto nu = make_abstract_measure(testsupport::random_weights(5, rng));

  CHECK(random_plan(mu, nu, 42).triplets == random_plan(mu, nu, 42).triplets);
  CHECK(random_plan(mu, nu, 42).triplets != random_plan(mu, nu, 43).triplets);

  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto plan = random_plan(mu, nu, seed);
    const auto rows = plan.row_sums();
    const auto cols = plan.col_sums();
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) ok = ok && std::abs(rows[i] - mu.weights[i]) <= 1e-12;
    for (std::size_t j = 0; j < cols.size(); ++j) ok = ok && std::abs(cols[j] - nu.weights[j]) <= 1e-12;
    for (const auto& t : plan.triplets) ok = ok && t.mass > 0.0;
    CHECK(ok);
  }

  const auto one = make_abstract_measure({1.0});
  CHECK(random_plan(one, one, 9).triplets == std::vector<Triplet>{{0, 0, 1.0}});
  CHECK(code_of([&] { random_plan(one, make_abstract_measure({2.0}), 0); }) == ErrorCode::UnequalMass);
}

TEST_CASE("solve_mk beats random plans") {
  std::mt19937_64 rng(77);
  const auto u = testsupport::abstract_map(testsupport::random_points(9, 2, rng), testsupport::random_weights(9, rng));
  const auto Y = make_measure(testsupport::random_points(6, 2, rng), testsupport::random_weights(6, rng));
  const auto cost = build_cost(u, Y);
  const auto sol = solve_mk(cost);
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    CHECK(sol.primal <= objective(random_plan(u.domain, Y, seed), cost) + 1e-12);
}

TEST_CASE("shifted objective") {
  const auto Y = make_uniform_measure({{0.0}, {1.0}, {3.0}});
  SUBCASE("vanishes on a gap-free plan, and J = I for the quadratic potential") {
    const auto u = testsupport::abstract_map({{3.0}, {0.0}, {1.0}});
    const auto psi = potential_from_duals(Y, std::vector<double>(3, 0.0));
    const auto cost = build_cost(u, Y);
    const TransportPlan paired{{{0, 2, 1.0 / 3}, {1, 0, 1.0 / 3}, {2, 1, 1.0 / 3}},
                               cost.source_weights, cost.target_weights};
    CHECK(shifted_objective(paired, psi, u) == doctest::Approx(0.0));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto plan = random_plan(u.domain, Y, seed);
      CHECK(shifted_objective(plan, psi, u) == doctest::Approx(objective(plan, cost)).epsilon(1e-12));
    }
  }
  SUBCASE("J - I is constant over plans") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const auto u = testsupport::abstract_map(testsupport::random_points(3, 1, rng));
    std::vector<double> vals{d(rng), d(rng), d(rng)};
    const ConvexPotential psi{Y, vals};
    const auto cost = build_cost(u, Y);
    double lo = 1e300, hi = -1e300;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto plan = random_plan(u.domain, Y, seed);
      const double diff = shifted_objective(plan, psi, u) - objective(plan, cost);
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    CHECK(hi - lo <= 1e-12);
  }
}

TEST_CASE("strictly complementary duals stay optimal") {
  std::vector<Vector> grid;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) grid.push_back({a / 5.0, b / 5.0});
  const auto Y = make_uniform_measure(grid);
  const auto u = testsupport::abstract_map(grid);
  const auto cost = build_cost(u, Y);
  const auto sol = solve_mk(cost);
  const auto refined = strictly_complementary_duals(sol.plan, sol.duals, cost);
  for (std::size_t i = 0; i < cost.rows; ++i) {
    std::size_t tight = 0;
    for (std::size_t j = 0; j < cost.cols; ++j) {
      const double rc = cost(i, j) - refined.phi_c[i] - refined.phi[j];
      CHECK(rc >= -1e-9);
      if (std::abs(rc) <= 1e-9) ++tight;
    }
    CHECK(tight == 1);  // identity pairing is the unique optimum
  }
  CHECK(dual_objective(refined, cost) == doctest::Approx(sol.primal).epsilon(1e-9));
}

TEST_CASE("optimal supports are cyclically monotone") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = testsupport::abstract_map(testsupport::random_points(20, 2, rng),
                                             testsupport::random_weights(20, rng));
    const auto Y = make_measure(testsupport::random_points(15, 2, rng), testsupport::random_weights(15, rng));
    const auto cost = build_cost(u, Y);
    const auto sol = solve_mk(cost);
    CHECK(cyclic_monotonicity_violations(sol.plan, cost, 1000, 5, trial) == 0);
  }
  // A crossing plan is caught.
  const auto cost = uniform_cost(2, {0.0, 1.0, 1.0, 0.0});
  const TransportPlan crossed{{{0, 1, 0.5}, {1, 0, 0.5}}, cost.source_weights, cost.target_weights};
  CHECK(cyclic_monotonicity_violations(crossed, cost, 100, 2, 0) > 0);
}
