#include <benchmark/benchmark.h>

#include <random>

#include "polarfact/polarfact.hpp"

namespace {

using namespace polarfact;

SampledMap random_map(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Vector> vals(n, Vector(2));
  for (auto& v : vals) v = {d(rng), d(rng)};
  return make_sampled_map(make_abstract_measure(std::vector<double>(n, 1.0 / double(n))), std::move(vals));
}

DiscreteMeasure random_measure(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Vector> pts(n, Vector(2));
  for (auto& p : pts) p = {d(rng), d(rng)};
  return make_uniform_measure(std::move(pts));
}

void BM_SolveMk(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(n);
  const auto cost = build_cost(random_map(n, rng), random_measure(n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(solve_mk(cost).primal);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveMk)->RangeMultiplier(2)->Range(16, 512)->Unit(benchmark::kMillisecond)->Complexity();

void BM_PolarFactorizeGallery(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(1));
  const std::string name = gallery_names()[static_cast<std::size_t>(state.range(0))];
  const auto inst = gallery_instance(name, N, 0);
  for (auto _ : state) benchmark::DoNotOptimize(polar_factorize(inst.u, inst.Y).max_gap);
  state.SetLabel(name);
}
BENCHMARK(BM_PolarFactorizeGallery)
    ->ArgsProduct({{0, 1, 2}, {8, 16}})
    ->Unit(benchmark::kMillisecond);

void BM_FenchelConjugate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const auto Y = random_measure(n, rng);
  const ConvexPotential psi{Y, std::vector<double>(n, 0.0)};
  const Vector q{0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(fenchel_conjugate(psi, q));
}
BENCHMARK(BM_FenchelConjugate)->Range(64, 4096);

}  // namespace

BENCHMARK_MAIN();
