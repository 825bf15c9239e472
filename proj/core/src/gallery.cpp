#include <algorithm>
#include <numeric>
#include <random>

#include "polarfact/error.hpp"
#include "polarfact/polar.hpp"

namespace polarfact {
namespace {

// Cell centres of the uniform N x N grid on [-1, 1]^2, each of mass 4 / N^2.
DiscreteMeasure centred_grid(std::size_t N) {
  const double h = 2.0 / static_cast<double>(N);
  DiscreteMeasure grid;
  grid.dimension = 2;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) {
      const double y1 = -1.0 + (static_cast<double>(a) + 0.5) * h;
      const double y2 = -1.0 + (static_cast<double>(b) + 0.5) * h;
      grid.sites.push_back({"y" + std::to_string(a) + "_" + std::to_string(b), Vector{y1, y2}});
      grid.weights.push_back(h * h);
    }
  return grid;
}

// u on an abstract copy of the grid, listed in a seeded order.
SampledMap shuffled_copy(const SampledMap& on_grid, std::uint64_t seed) {
  std::vector<std::size_t> order(on_grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  DiscreteMeasure X;
  std::vector<Vector> values;
  for (std::size_t k = 0; k < order.size(); ++k) {
    X.sites.push_back({"x" + std::to_string(k), std::nullopt});
    X.weights.push_back(on_grid.domain.weights[order[k]]);
    values.push_back(on_grid.values[order[k]]);
  }
  return make_sampled_map(std::move(X), std::move(values));
}

SampledMap flat_gradient(const DiscreteMeasure& grid) {
  std::vector<Vector> values;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& y = grid.coords(k);
    values.push_back({y[0] > 0.0 ? 1.0 : -1.0, y[1]});
  }
  return make_sampled_map(grid, std::move(values));
}

SampledMap strictly_convex_gradient(const DiscreteMeasure& grid, std::uint64_t seed) {
  // psi(y) = y.A y / 2 + beta (y1^4 + y2^4) / 4 with A symmetric positive definite.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> small(-0.2, 0.2);
  std::uniform_real_distribution<double> quartic(0.0, 0.3);
  const double a11 = 1.0 + small(rng), a22 = 1.0 + small(rng), a12 = small(rng);
  const double beta = quartic(rng);
  std::vector<Vector> values;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& y = grid.coords(k);
    values.push_back({a11 * y[0] + a12 * y[1] + beta * y[0] * y[0] * y[0],
                      a12 * y[0] + a22 * y[1] + beta * y[1] * y[1] * y[1]});
  }
  return make_sampled_map(grid, std::move(values));
}

}  // namespace

std::vector<std::string> gallery_names() {
  return {"flat-segment", "m-to-1-flat", "injective-control"};
}

GalleryInstance gallery_instance(const std::string& name, std::size_t N, std::uint64_t seed) {
  const auto names = gallery_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    fail(ErrorCode::UnknownGalleryName, "unknown gallery instance '" + name + "'");
  if (N == 0) fail(ErrorCode::InvalidArgument, "grid size must be positive");
  const bool flat = name != "injective-control";
  if (flat && N % 2 != 0)
    fail(ErrorCode::InvalidArgument, "'" + name + "' needs an even grid size, got " + std::to_string(N));

  GalleryInstance inst;
  inst.name = name;
  inst.grid = N;
  inst.Y = centred_grid(N);
  inst.u_sharp = flat ? flat_gradient(inst.Y) : strictly_convex_gradient(inst.Y, seed);
  inst.u = shuffled_copy(inst.u_sharp, seed);
  if (name == "m-to-1-flat") inst.u = construct_m_to_1(inst.u, 2).u;
  return inst;
}

}  // namespace polarfact
