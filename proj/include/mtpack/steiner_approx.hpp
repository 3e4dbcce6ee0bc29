// Copyright 2026 The mtpack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTPACK_STEINER_APPROX_HPP_
#define MTPACK_STEINER_APPROX_HPP_

// Level-i greedy approximation for the directed Steiner tree problem
// (Charikar et al.). The recursion works on the shortest-path metric
// closure; the closure tree is expanded back into graph arcs and reduced to
// a shortest-path arborescence over the expanded arcs, which can only lower
// its cost.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/network.hpp"
#include "mtpack/tree.hpp"

namespace mtpack {

struct ApproxConfig {
  int level = 2;

  void validate() const {
    if (level < 2) throw ConfigError("approximation level must be >= 2");
  }
};

// Guaranteed ratio i(i-1) r^(1/i), floored at 1.
inline double ratio_bound(int level, int receivers) {
  if (level < 2 || receivers < 1) throw ConfigError("ratio_bound needs level >= 2, receivers >= 1");
  return std::max(1.0, level * (level - 1) * std::pow(static_cast<double>(receivers), 1.0 / level));
}

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Single-source shortest paths, ties by hop count then by arc id.
struct ShortestPaths {
  std::vector<double> dist;
  std::vector<int> hops;
  std::vector<ArcId> pred;
};

inline ShortestPaths dijkstra(const Network& net, std::span<const double> arc_cost, NodeId from,
                              const std::vector<bool>* allowed_arcs = nullptr) {
  const int n = net.num_nodes();
  ShortestPaths sp{std::vector<double>(n, kInf), std::vector<int>(n, 0), std::vector<ArcId>(n, -1)};
  using Label = std::tuple<double, int, NodeId>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  sp.dist[from] = 0.0;
  heap.emplace(0.0, 0, from);
  std::vector<bool> done(n, false);
  while (!heap.empty()) {
    const auto [d, h, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    for (ArcId a : net.out_arcs(u)) {
      if (allowed_arcs && !(*allowed_arcs)[a]) continue;
      const NodeId v = net.arc(a).head;
      if (done[v]) continue;
      const double nd = d + arc_cost[a];
      const int nh = h + 1;
      const bool better = nd < sp.dist[v] || (nd == sp.dist[v] && (nh < sp.hops[v] ||
                                              (nh == sp.hops[v] && a < sp.pred[v])));
      if (better) {
        sp.dist[v] = nd;
        sp.hops[v] = nh;
        sp.pred[v] = a;
        heap.emplace(nd, nh, v);
      }
    }
  }
  return sp;
}

// A tree in the metric closure: closure edges (u, v) plus covered terminals.
struct ClosureTree {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> covered;
  double cost = kInf;
};

class CharikarSolver {
 public:
  CharikarSolver(const Network& net, std::span<const double> arc_cost)
      : net_(net), arc_cost_(arc_cost) {
    closure_.reserve(net.num_nodes());
    for (NodeId v = 0; v < net.num_nodes(); ++v) closure_.push_back(dijkstra(net, arc_cost, v));
  }

  double distance(NodeId u, NodeId v) const { return closure_[u].dist[v]; }

  // A_level(k, root, terminals): covers k of the still-uncovered terminals.
  ClosureTree solve(int level, int k, NodeId root, std::vector<NodeId> terminals) const {
    if (level == 1) return closest(k, root, terminals);
    ClosureTree result;
    result.cost = 0.0;
    while (k > 0) {
      ClosureTree best;
      double best_density = kInf;
      NodeId best_via = -1;
      for (NodeId v = 0; v < net_.num_nodes(); ++v) {
        const double reach = distance(root, v);
        if (reach == kInf) continue;
        if (level == 2) {
          // All k' at once from one sorted distance list.
          auto order = sorted_terminals(v, terminals);
          double prefix = reach;
          std::vector<double> cost_by_count;
          for (std::size_t j = 0; j < order.size() && static_cast<int>(j) < k; ++j) {
            prefix += order[j].first;
            cost_by_count.push_back(prefix);
          }
          for (int kk = static_cast<int>(cost_by_count.size()); kk >= 1; --kk) {
            const double density = cost_by_count[kk - 1] / kk;
            if (density < best_density) {
              best_density = density;
              best_via = v;
              best = star(v, order, kk);
              best.cost = cost_by_count[kk - 1];
            }
          }
        } else {
          for (int kk = k; kk >= 1; --kk) {
            ClosureTree sub = solve(level - 1, kk, v, terminals);
            if (sub.cost == kInf || sub.covered.empty()) continue;
            const double cost = reach + sub.cost;
            const double density = cost / static_cast<double>(sub.covered.size());
            if (density < best_density) {
              best_density = density;
              best_via = v;
              best = std::move(sub);
              best.cost = cost;
            }
          }
        }
      }
      if (best_via < 0) return {};  // infeasible
      if (best_via != root) best.edges.emplace_back(root, best_via);
      result.cost += best.cost;
      result.edges.insert(result.edges.end(), best.edges.begin(), best.edges.end());
      for (NodeId c : best.covered) {
        result.covered.push_back(c);
        terminals.erase(std::remove(terminals.begin(), terminals.end(), c), terminals.end());
      }
      k -= static_cast<int>(best.covered.size());
    }
    return result;
  }

  // Expands closure edges into graph arcs.
  std::vector<ArcId> expand(const ClosureTree& t) const {
    std::set<ArcId> arcs;
    for (auto [u, v] : t.edges) {
      for (NodeId w = v; w != u;) {
        const ArcId a = closure_[u].pred[w];
        arcs.insert(a);
        w = net_.arc(a).tail;
      }
    }
    return {arcs.begin(), arcs.end()};
  }

 private:
  std::vector<std::pair<double, NodeId>> sorted_terminals(NodeId v,
                                                          const std::vector<NodeId>& terminals) const {
    std::vector<std::pair<double, NodeId>> order;
    for (NodeId x : terminals) {
      const double d = distance(v, x);
      if (d < kInf) order.emplace_back(d, x);
    }
    std::sort(order.begin(), order.end());
    return order;
  }

  static ClosureTree star(NodeId v, const std::vector<std::pair<double, NodeId>>& order, int k) {
    ClosureTree t;
    for (int j = 0; j < k; ++j) {
      t.covered.push_back(order[j].second);
      if (order[j].second != v) t.edges.emplace_back(v, order[j].second);
    }
    return t;
  }

  ClosureTree closest(int k, NodeId root, const std::vector<NodeId>& terminals) const {
    auto order = sorted_terminals(root, terminals);
    if (static_cast<int>(order.size()) < k) return {};
    ClosureTree t = star(root, order, k);
    t.cost = 0.0;
    for (int j = 0; j < k; ++j) t.cost += order[j].first;
    return t;
  }

  const Network& net_;
  std::span<const double> arc_cost_;
  std::vector<ShortestPaths> closure_;
};

}  // namespace detail

// Approximate min-cost Steiner tree under per-arc costs.
inline Tree approx_min_steiner_arcs(const Network& net, NodeId source,
                                    std::span<const NodeId> receivers,
                                    std::span<const double> arc_cost, const ApproxConfig& cfg,
                                    int session_id = 0) {
  cfg.validate();
  detail::CharikarSolver solver(net, arc_cost);
  std::vector<NodeId> terminals(receivers.begin(), receivers.end());
  for (NodeId r : terminals) {
    if (solver.distance(source, r) == detail::kInf) {
      throw InfeasibleError("receiver '" + net.label(r) + "' unreachable from source");
    }
  }
  const auto closure_tree =
      solver.solve(cfg.level, static_cast<int>(terminals.size()), source, terminals);
  if (closure_tree.cost == detail::kInf) throw InfeasibleError("approximation found no tree");

  // Shortest-path arborescence inside the expanded arcs, then drop branches
  // that lead to no receiver.
  std::vector<bool> allowed(net.num_arcs(), false);
  for (ArcId a : solver.expand(closure_tree)) allowed[a] = true;
  const auto sp = detail::dijkstra(net, arc_cost, source, &allowed);
  std::set<ArcId> arcs;
  for (NodeId r : terminals) {
    for (NodeId w = r; w != source;) {
      const ArcId a = sp.pred[w];
      if (a < 0) throw InfeasibleError("expanded tree misses a receiver");
      if (!arcs.insert(a).second) break;
      w = net.arc(a).tail;
    }
  }
  return Tree(session_id, std::vector<ArcId>(arcs.begin(), arcs.end()));
}

inline Tree approx_min_steiner(const Network& net, NodeId source, std::span<const NodeId> receivers,
                               std::span<const double> link_prices, const ApproxConfig& cfg,
                               int session_id = 0) {
  const auto costs = arc_costs(net, link_prices);
  return approx_min_steiner_arcs(net, source, receivers, costs, cfg, session_id);
}

}  // namespace mtpack

#endif  // MTPACK_STEINER_APPROX_HPP_
