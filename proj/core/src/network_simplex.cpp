#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polarfact/error.hpp"

namespace polarfact::detail {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Basis trees are spanning trees over m row nodes [0, m) and n column nodes
// [m, m + n). Pricing uses block search; after a run of degenerate pivots it
// switches to Bland's rule (lowest-index entering arc, lowest-index leaving
// arc among ties) until the next non-degenerate pivot, which rules out
// cycling.
class TransportationSimplex {
 public:
  TransportationSimplex(const CostMatrix& cost, std::span<const double> supply,
                        std::span<const double> demand)
      : m_(cost.rows),
        n_(cost.cols),
        cost_(cost),
        supply_(supply),
        demand_(demand),
        adj_(m_ + n_),
        basic_(m_ * n_, 0),
        row_pot_(m_, 0.0),
        col_pot_(n_, 0.0),
        stamp_(m_ + n_, 0),
        parent_arc_(m_ + n_, kNone) {
    double max_cost = 0.0;
    for (double c : cost.entries) max_cost = std::max(max_cost, std::abs(c));
    double total = 0.0;
    for (double s : supply) total += s;
    eps_cost_ = 1e-12 * std::max(1.0, max_cost);
    total_mass_ = total;
    eps_flow_ = 1e-14 * std::max(1.0, total);
    block_ = std::max<std::size_t>(
        16, static_cast<std::size_t>(std::sqrt(static_cast<double>(m_ * n_))));
    degenerate_limit_ = m_ + n_;
    pivot_limit_ = 64 * m_ * n_ + 10000;
  }

  SimplexResult run() {
    north_west_basis();
    compute_potentials();

    std::size_t degenerate_streak = 0;
    bool bland = false;
    while (true) {
      if (stats_.pivots >= pivot_limit_)
        fail(ErrorCode::NumericalFailure,
             "transportation simplex exceeded " + std::to_string(pivot_limit_) + " pivots");

      std::size_t entering = bland ? price_bland() : price_block();
      if (entering == kNone) {
        // Rebuild flows and potentials from the tree before declaring
        // optimality so incremental drift cannot hide a violated arc.
        recompute_flows();
        compute_potentials();
        entering = price_bland();
        if (entering == kNone) break;
      }

      const bool degenerate = pivot(entering);
      ++stats_.pivots;
      if (bland) ++stats_.bland_pivots;
      if (degenerate) {
        ++stats_.degenerate_pivots;
        if (++degenerate_streak > degenerate_limit_) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
      if (stats_.pivots % 1024 == 0) {
        recompute_flows();
        compute_potentials();
      }
    }

    SimplexResult result;
    result.basis = arcs_;
    result.row_potential = row_pot_;
    result.col_potential = col_pot_;
    result.stats = stats_;
    return result;
  }

 private:
  std::size_t other_end(std::size_t arc, std::size_t node) const {
    const auto& a = arcs_[arc];
    return node < m_ ? m_ + a.col : a.row;
  }

  void add_arc(std::size_t slot, std::size_t i, std::size_t j, double flow) {
    if (slot == arcs_.size()) arcs_.push_back({i, j, flow});
    else arcs_[slot] = {i, j, flow};
    adj_[i].push_back(slot);
    adj_[m_ + j].push_back(slot);
    basic_[i * n_ + j] = 1;
  }

  void remove_arc(std::size_t slot) {
    const auto& a = arcs_[slot];
    for (std::size_t node : {a.row, m_ + a.col}) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), slot));
    }
    basic_[a.row * n_ + a.col] = 0;
  }

  void north_west_basis() {
    std::vector<double> a(supply_.begin(), supply_.end());
    std::vector<double> b(demand_.begin(), demand_.end());
    arcs_.reserve(m_ + n_ - 1);
    std::size_t i = 0, j = 0;
    while (true) {
      const double f = std::max(0.0, std::min(a[i], b[j]));
      add_arc(arcs_.size(), i, j, f);
      a[i] -= f;
      b[j] -= f;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (i + 1 == m_) ++j;
      else if (j + 1 == n_) ++i;
      else if (a[i] <= b[j]) ++i;
      else ++j;
    }
  }

  void compute_potentials() {
    ++current_stamp_;
    std::vector<std::size_t>& stack = scratch_;
    stack.clear();
    row_pot_[0] = 0.0;
    stamp_[0] = current_stamp_;
    stack.push_back(0);
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t arc : adj_[node]) {
        const std::size_t next = other_end(arc, node);
        if (stamp_[next] == current_stamp_) continue;
        stamp_[next] = current_stamp_;
        const auto& a = arcs_[arc];
        const double c = cost_(a.row, a.col);
        if (next < m_) row_pot_[a.row] = c - col_pot_[a.col];
        else col_pot_[a.col] = c - row_pot_[a.row];
        stack.push_back(next);
      }
    }
  }

  // Leaf elimination: every tree arc's flow is fixed by the marginals.
  void recompute_flows() {
    const std::size_t nodes = m_ + n_;
    std::vector<double> remaining(nodes);
    std::vector<std::size_t> degree(nodes);
    std::vector<char> done(arcs_.size(), 0);
    for (std::size_t i = 0; i < m_; ++i) remaining[i] = supply_[i];
    for (std::size_t j = 0; j < n_; ++j) remaining[m_ + j] = demand_[j];
    std::vector<std::size_t>& queue = scratch_;
    queue.clear();
    for (std::size_t v = 0; v < nodes; ++v) {
      degree[v] = adj_[v].size();
      if (degree[v] == 1) queue.push_back(v);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t v = queue[head];
      if (degree[v] != 1) continue;
      std::size_t arc = kNone;
      for (std::size_t a : adj_[v])
        if (!done[a]) { arc = a; break; }
      done[arc] = 1;
      arcs_[arc].flow = remaining[v];
      const std::size_t w = other_end(arc, v);
      remaining[w] -= remaining[v];
      degree[v] = 0;
      if (--degree[w] == 1) queue.push_back(w);
    }
    for (auto& a : arcs_) {
      if (a.flow < -1e-9 * total_mass_)
        fail(ErrorCode::NumericalFailure, "basis became infeasible during pivoting");
      if (a.flow < 0.0) a.flow = 0.0;
    }
  }

  double reduced_cost(std::size_t i, std::size_t j) const {
    return cost_(i, j) - row_pot_[i] - col_pot_[j];
  }

  std::size_t price_block() {
    const std::size_t total = m_ * n_;
    std::size_t best_arc = kNone;
    double best = -eps_cost_;
    std::size_t in_block = 0;
    std::size_t i = next_arc_ / n_, j = next_arc_ % n_;
    for (std::size_t scanned = 0; scanned < total; ++scanned) {
      const std::size_t k = i * n_ + j;
      if (!basic_[k]) {
        const double rc = cost_.entries[k] - row_pot_[i] - col_pot_[j];
        if (rc < best) {
          best = rc;
          best_arc = k;
        }
      }
      if (++j == n_) {
        j = 0;
        if (++i == m_) i = 0;
      }
      if (++in_block == block_) {
        if (best_arc != kNone) break;
        in_block = 0;
      }
    }
    next_arc_ = i * n_ + j;
    return best_arc;
  }

  std::size_t price_bland() const {
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (!basic_[i * n_ + j] && reduced_cost(i, j) < -eps_cost_) return i * n_ + j;
    return kNone;
  }

  // Returns true when the pivot moved no flow.
  bool pivot(std::size_t entering) {
    const std::size_t ei = entering / n_;
    const std::size_t ej = entering % n_;

    // Tree path from column node ej to row node ei.
    ++current_stamp_;
    std::vector<std::size_t>& stack = scratch_;
    stack.clear();
    const std::size_t start = m_ + ej;
    stamp_[start] = current_stamp_;
    parent_arc_[start] = kNone;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == ei) break;
      for (std::size_t arc : adj_[node]) {
        const std::size_t next = other_end(arc, node);
        if (stamp_[next] == current_stamp_) continue;
        stamp_[next] = current_stamp_;
        parent_arc_[next] = arc;
        stack.push_back(next);
      }
    }
    path_.clear();
    for (std::size_t node = ei; node != start;) {
      const std::size_t arc = parent_arc_[node];
      path_.push_back(arc);
      node = other_end(arc, node);
    }

    // Walking from row ei the path alternates decrease, increase, ... and
    // has odd length, so even offsets lose flow.
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path_.size(); k += 2) theta = std::min(theta, arcs_[path_[k]].flow);
    theta = std::max(theta, 0.0);
    std::size_t leaving = kNone;
    std::size_t leaving_index = kNone;
    for (std::size_t k = 0; k < path_.size(); k += 2) {
      const auto& a = arcs_[path_[k]];
      if (a.flow <= theta + eps_flow_) {
        const std::size_t idx = a.row * n_ + a.col;
        if (idx < leaving_index) {
          leaving_index = idx;
          leaving = path_[k];
        }
      }
    }

    for (std::size_t k = 0; k < path_.size(); ++k) {
      auto& a = arcs_[path_[k]];
      a.flow += (k % 2 == 0) ? -theta : theta;
      if (a.flow < 0.0) a.flow = 0.0;
    }

    const double rc = reduced_cost(ei, ej);
    remove_arc(leaving);

    // Shift potentials on the side of the cut that contains row ei.
    ++current_stamp_;
    stack.clear();
    stamp_[ei] = current_stamp_;
    stack.push_back(ei);
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < m_) row_pot_[node] += rc;
      else col_pot_[node - m_] -= rc;
      for (std::size_t arc : adj_[node]) {
        const std::size_t next = other_end(arc, node);
        if (stamp_[next] == current_stamp_) continue;
        stamp_[next] = current_stamp_;
        stack.push_back(next);
      }
    }

    add_arc(leaving, ei, ej, theta);
    return theta <= eps_flow_;
  }

  std::size_t m_, n_;
  const CostMatrix& cost_;
  std::span<const double> supply_, demand_;

  std::vector<BasicArc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<char> basic_;
  std::vector<double> row_pot_, col_pot_;

  std::vector<unsigned> stamp_;
  unsigned current_stamp_ = 0;
  std::vector<std::size_t> parent_arc_;
  std::vector<std::size_t> scratch_;
  std::vector<std::size_t> path_;

  double eps_cost_ = 0.0, eps_flow_ = 0.0, total_mass_ = 0.0;
  std::size_t block_ = 0;
  std::size_t next_arc_ = 0;
  std::size_t degenerate_limit_ = 0;
  std::size_t pivot_limit_ = 0;
  SolveStats stats_;
};

}  // namespace

SimplexResult transportation_simplex(const CostMatrix& cost, std::span<const double> supply,
                                     std::span<const double> demand) {
  if (supply.size() != cost.rows || demand.size() != cost.cols || cost.rows == 0 || cost.cols == 0)
    fail(ErrorCode::MarginalMismatch, "marginals do not match the cost matrix shape");
  return TransportationSimplex(cost, supply, demand).run();
}

}  // namespace polarfact::detail
