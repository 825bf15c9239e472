#pragma once
// Independent oracles and instance generators shared by the unit and
// acceptance tests. Nothing here calls into the solver.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "polarfact/polarfact.hpp"

namespace testsupport {

using polarfact::DiscreteMeasure;
using polarfact::SampledMap;
using polarfact::Vector;

inline std::vector<Vector> random_points(std::size_t n, std::size_t dim, std::mt19937_64& rng,
                                         double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<Vector> pts(n, Vector(dim));
  for (auto& p : pts)
    for (auto& x : p) x = d(rng);
  return pts;
}

/// Positive weights summing to `total`.
inline std::vector<double> random_weights(std::size_t n, std::mt19937_64& rng, double total = 1.0) {
  std::uniform_real_distribution<double> d(0.1, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = d(rng);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x *= total / s;
  return w;
}

inline SampledMap abstract_map(std::vector<Vector> values, std::vector<double> weights = {}) {
  if (weights.empty()) weights.assign(values.size(), 1.0 / static_cast<double>(values.size()));
  return polarfact::make_sampled_map(polarfact::make_abstract_measure(std::move(weights)),
                                     std::move(values));
}

/// Cost |a - b|^2 / 2 computed without the library.
inline double half_sq(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return 0.5 * s;
}

/// Assignment optimum for uniform n x n by enumerating permutations.
inline double permutation_optimum(const std::vector<Vector>& u, const std::vector<Vector>& y) {
  const std::size_t n = u.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += half_sq(u[i], y[p[i]]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best / static_cast<double>(n);
}

/// Value law as a sorted map value -> (mass, count), by exact equality.
inline std::map<Vector, std::pair<double, std::size_t>> law_of(const SampledMap& u) {
  std::map<Vector, std::pair<double, std::size_t>> law;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto& e = law[u.values[i]];
    e.first += u.domain.weights[i];
    e.second += 1;
  }
  return law;
}

/// max_j q.y_j - psi_j by direct loop.
inline double conjugate(const std::vector<Vector>& ys, const std::vector<double>& psi, const Vector& q) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ys.size(); ++j) {
    double s = -psi[j];
    for (std::size_t d = 0; d < q.size(); ++d) s += q[d] * ys[j][d];
    best = std::max(best, s);
  }
  return best;
}

/// Gradient-pairing instance: u(x_i) = grad psi(y_{s(i)}) for a strictly convex
/// quadratic-plus-quartic psi, s a seeded permutation, uniform weights.
struct GradientInstance {
  SampledMap u;
  DiscreteMeasure Y;
  std::vector<std::size_t> s;
  std::vector<double> psi;
};

inline GradientInstance gradient_instance(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto ys = random_points(n, dim, rng);
  std::uniform_real_distribution<double> a(0.5, 2.0);
  Vector scale(dim);
  for (auto& c : scale) c = a(rng);
  std::vector<std::size_t> s(n);
  std::iota(s.begin(), s.end(), 0);
  std::shuffle(s.begin(), s.end(), rng);

  GradientInstance out;
  out.s = s;
  std::vector<Vector> grads(n, Vector(dim));
  out.psi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double y = ys[j][d];
      grads[j][d] = scale[d] * y + y * y * y;
      v += 0.5 * scale[d] * y * y + 0.25 * y * y * y * y;
    }
    out.psi[j] = v;
  }
  std::vector<Vector> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = grads[s[i]];
  out.Y = polarfact::make_uniform_measure(std::move(ys));
  out.u = abstract_map(std::move(values));
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("polarfact_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
