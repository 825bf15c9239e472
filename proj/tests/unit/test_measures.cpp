#include <doctest.h>

#include <cmath>
#include <limits>

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

}  // namespace

TEST_CASE("validate accepts a well-formed measure and returns its mass") {
  const auto m = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  CHECK(validate(m) == doctest::Approx(1.0));
  CHECK(m.sites[1].label == "p1");
}

TEST_CASE("validate rejects broken invariants") {
  CHECK(code_of([] { validate(make_measure({{0.0}, {1.0}}, {0.5, -0.1})); }) == ErrorCode::NegativeWeight);
  CHECK(code_of([] { validate(make_measure({{0.0}, {1.0}}, {0.5, 0.0})); }) == ErrorCode::NegativeWeight);
  CHECK(code_of([] {
          validate(make_measure({{0.0}}, {std::numeric_limits<double>::quiet_NaN()}));
        }) == ErrorCode::NegativeWeight);
  CHECK(code_of([] {
          DiscreteMeasure m = make_measure({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
          m.sites[1].coords = Vector{1.0, 0.0, 2.0};
          validate(m);
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { validate(make_measure({{0.0}, {1.0}}, {0.5, 0.5}, {"a", "a"})); }) ==
        ErrorCode::DuplicateLabel);
  CHECK(code_of([] {
          DiscreteMeasure m = make_abstract_measure({1.0});
          m.sites[0].coords = Vector{1.0};
          validate(m);
        }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("value_law groups equal values") {
  const auto distinct = value_law(testsupport::abstract_map({{1.0}, {0.0}}));
  REQUIRE(distinct.atoms.size() == 2);
  CHECK(distinct.atoms[0].value == Vector{0.0});
  CHECK(distinct.atoms[0].mass == doctest::Approx(0.5));
  CHECK(distinct.atoms[1].value == Vector{1.0});
  CHECK(distinct.atoms[1].mass == doctest::Approx(0.5));

  const auto constant = value_law(testsupport::abstract_map({{1.0}, {1.0}}));
  REQUIRE(constant.atoms.size() == 1);
  CHECK(constant.atoms[0].mass == doctest::Approx(1.0));
  CHECK(constant.atoms[0].members == std::vector<std::size_t>{0, 1});

  const double eps = 1e-7;
  const auto close = testsupport::abstract_map({{1.0}, {1.0 + eps}});
  CHECK(value_law(close).atoms.size() == 2);
  const auto clustered = value_law(close, 1e-5);
  REQUIRE(clustered.atoms.size() == 1);
  CHECK(clustered.atoms[0].mass == doctest::Approx(1.0));
  CHECK(clustered.atoms[0].value == Vector{1.0});
}

TEST_CASE("equimeasurable compares laws") {
  const auto f = testsupport::abstract_map({{1.0}, {0.0}});
  CHECK(equimeasurable(f, testsupport::abstract_map({{0.0}, {1.0}})));
  CHECK_FALSE(equimeasurable(f, testsupport::abstract_map({{1.0}, {1.0}})));

  // Oracle: both laws are {0: 1/2, 1: 1/2}.
  const auto g = testsupport::abstract_map({{1.0}, {1.0}, {0.0}, {0.0}});
  const auto lf = testsupport::law_of(f);
  const auto lg = testsupport::law_of(g);
  REQUIRE(lf.size() == lg.size());
  for (const auto& [v, e] : lf) CHECK(lg.at(v).first == doctest::Approx(e.first));
  CHECK(equimeasurable(f, g));

  CHECK(code_of([&] {
          equimeasurable(f, testsupport::abstract_map({{1.0}, {0.0}}, {0.5, 0.6}));
        }) == ErrorCode::UnequalMass);
  CHECK(code_of([&] { equimeasurable(f, testsupport::abstract_map({{1.0, 0.0}, {0.0, 0.0}})); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("pushforward of assignments") {
  const auto X = make_abstract_measure({0.5, 0.5});
  const auto Y = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  const std::vector<std::size_t> identity{0, 1}, constant{1, 1}, swap{1, 0};

  const auto id = pushforward(X, identity, Y);
  CHECK(same_measure(id, Y));

  const auto c = pushforward(X, constant, Y);
  REQUIRE(c.size() == 1);
  CHECK(c.sites[0].label == "p1");
  CHECK(c.weights[0] == doctest::Approx(1.0));

  CHECK(same_measure(pushforward(X, swap, Y), Y));

  const std::map<std::string, std::string> by_label{{"x0", "p1"}, {"x1", "p0"}};
  CHECK(same_measure(pushforward(X, by_label, Y), Y));
  const std::map<std::string, std::string> bad{{"x0", "p1"}, {"x1", "nope"}};
  CHECK(code_of([&] { pushforward(X, bad, Y); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("sampled maps check their values") {
  CHECK(code_of([] {
          make_sampled_map(make_abstract_measure({0.5, 0.5}), {{1.0}, {1.0, 2.0}});
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { make_sampled_map(make_abstract_measure({0.5, 0.5}), {{1.0}}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("masses_close is relative") {
  CHECK(masses_close(1.0, 1.0 + 1e-12));
  CHECK_FALSE(masses_close(1.0, 1.0 + 1e-6));
  CHECK(masses_close(1e6, 1e6 + 1e-4));
}
