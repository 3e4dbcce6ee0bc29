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

#ifndef MTPACK_EXACT_HPP_
#define MTPACK_EXACT_HPP_

// Exact tree oracles: enumeration of minimal Steiner arborescences, the
// exact min-cost Steiner tree by branch and bound over that enumeration, and
// the min-cost spanning arborescence (Chu-Liu/Edmonds contraction).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/network.hpp"
#include "mtpack/tree.hpp"

namespace mtpack {

struct EnumerationLimits {
  int max_nodes = 12;
  std::uint64_t max_candidates = std::uint64_t{1} << 20;
};

namespace detail {

// The search space of minimal Steiner arborescences for one (source,
// receivers) pair: every tree is identified by its node set S (source,
// receivers and a subset of Steiner candidates) plus one in-arc per
// non-source node of S.
class SteinerSpace {
 public:
  SteinerSpace(const Network& net, NodeId source, std::span<const NodeId> receivers,
               const EnumerationLimits& limits)
      : net_(net), source_(source), receivers_(receivers.begin(), receivers.end()) {
    const auto fwd = net.reachable_from(source);
    for (NodeId r : receivers_) {
      if (!fwd[r]) {
        throw InfeasibleError("receiver '" + net.label(r) + "' unreachable from source");
      }
    }
    // Nodes that can reach some receiver.
    std::vector<bool> back(net.num_nodes(), false);
    std::queue<NodeId> q;
    for (NodeId r : receivers_) {
      back[r] = true;
      q.push(r);
    }
    while (!q.empty()) {
      const NodeId v = q.front();
      q.pop();
      for (ArcId a : net.in_arcs(v)) {
        const NodeId u = net.arc(a).tail;
        if (!back[u]) {
          back[u] = true;
          q.push(u);
        }
      }
    }
    std::vector<bool> terminal(net.num_nodes(), false);
    terminal[source] = true;
    for (NodeId r : receivers_) terminal[r] = true;
    for (NodeId v = 0; v < net.num_nodes(); ++v) {
      if (fwd[v] && back[v] && !terminal[v]) steiner_.push_back(v);
    }
    const int relevant = 1 + static_cast<int>(receivers_.size() + steiner_.size());
    if (relevant > limits.max_nodes) {
      throw ScaleExceededError(std::to_string(relevant) + " relevant nodes > " +
                               std::to_string(limits.max_nodes));
    }
    if (steiner_.size() >= 31) throw ScaleExceededError("too many Steiner candidates");

    std::uint64_t total = 0;
    for (std::uint32_t mask = 0; mask < (1u << steiner_.size()); ++mask) {
      const std::uint64_t count = candidate_count(mask);
      total += count;
      if (total > limits.max_candidates) {
        throw ScaleExceededError("more than " + std::to_string(limits.max_candidates) +
                                 " candidate parent assignments");
      }
    }
  }

  // Calls visit(arcs, cost) for every minimal Steiner arborescence. If
  // `bound` is set, branches whose partial cost exceeds *bound are skipped;
  // the visitor may tighten *bound.
  template <class Visit>
  void for_each(std::span<const double> arc_cost, const double* bound, Visit&& visit) const {
    for (std::uint32_t mask = 0; mask < (1u << steiner_.size()); ++mask) {
      search_subset(mask, arc_cost, bound, visit);
    }
  }

 private:
  std::vector<bool> members(std::uint32_t mask) const {
    std::vector<bool> in(net_.num_nodes(), false);
    in[source_] = true;
    for (NodeId r : receivers_) in[r] = true;
    for (std::size_t i = 0; i < steiner_.size(); ++i) {
      if (mask & (1u << i)) in[steiner_[i]] = true;
    }
    return in;
  }

  std::uint64_t candidate_count(std::uint32_t mask) const {
    const auto in = members(mask);
    std::uint64_t product = 1;
    for (NodeId v = 0; v < net_.num_nodes(); ++v) {
      if (!in[v] || v == source_) continue;
      std::uint64_t choices = 0;
      for (ArcId a : net_.in_arcs(v)) choices += in[net_.arc(a).tail] ? 1 : 0;
      if (choices == 0) return 0;
      product *= choices;
      if (product > (std::uint64_t{1} << 40)) return product;
    }
    return product;
  }

  template <class Visit>
  void search_subset(std::uint32_t mask, std::span<const double> arc_cost, const double* bound,
                     Visit& visit) const {
    const auto in = members(mask);
    std::vector<NodeId> order;
    std::vector<std::vector<ArcId>> choices;
    for (NodeId v = 0; v < net_.num_nodes(); ++v) {
      if (!in[v] || v == source_) continue;
      std::vector<ArcId> c;
      for (ArcId a : net_.in_arcs(v)) {
        if (in[net_.arc(a).tail]) c.push_back(a);
      }
      if (c.empty()) return;
      std::sort(c.begin(), c.end(),
                [&](ArcId x, ArcId y) { return arc_cost[x] < arc_cost[y] || (arc_cost[x] == arc_cost[y] && x < y); });
      order.push_back(v);
      choices.push_back(std::move(c));
    }
    std::vector<NodeId> parent(net_.num_nodes(), -1);
    std::vector<ArcId> chosen;
    chosen.reserve(order.size());
    assign(0, 0.0, order, choices, parent, chosen, in, arc_cost, bound, visit);
  }

  template <class Visit>
  void assign(std::size_t depth, double partial, const std::vector<NodeId>& order,
              const std::vector<std::vector<ArcId>>& choices, std::vector<NodeId>& parent,
              std::vector<ArcId>& chosen, const std::vector<bool>& in,
              std::span<const double> arc_cost, const double* bound, Visit& visit) const {
    if (depth == order.size()) {
      // Steiner nodes must have a child, otherwise the tree is not minimal.
      for (std::size_t i = 0; i < steiner_.size(); ++i) {
        const NodeId v = steiner_[i];
        if (!in[v]) continue;
        bool has_child = false;
        for (ArcId a : chosen) has_child |= net_.arc(a).tail == v;
        if (!has_child) return;
      }
      visit(std::span<const ArcId>(chosen), partial);
      return;
    }
    const NodeId v = order[depth];
    for (ArcId a : choices[depth]) {
      const double next = partial + arc_cost[a];
      if (bound && next > *bound + 1e-12 * std::max(1.0, *bound)) break;  // sorted by cost
      const NodeId u = net_.arc(a).tail;
      bool cycle = false;
      for (NodeId w = u; w != -1 && w != source_; w = parent[w]) {
        if (w == v) {
          cycle = true;
          break;
        }
      }
      if (cycle) continue;
      parent[v] = u;
      chosen.push_back(a);
      assign(depth + 1, next, order, choices, parent, chosen, in, arc_cost, bound, visit);
      chosen.pop_back();
      parent[v] = -1;
    }
  }

  const Network& net_;
  NodeId source_;
  std::vector<NodeId> receivers_;
  std::vector<NodeId> steiner_;
};

}  // namespace detail

// Every minimal Steiner arborescence of the session, sorted by key. Throws
// ScaleExceededError past `cap` trees or the enumeration guard.
inline std::vector<Tree> enumerate_trees(const Network& net, const Session& s, std::size_t cap,
                                         const EnumerationLimits& limits = {}) {
  detail::SteinerSpace space(net, s.source, s.receivers, limits);
  std::vector<double> zero(net.num_arcs(), 0.0);
  std::vector<Tree> out;
  space.for_each(zero, nullptr, [&](std::span<const ArcId> arcs, double) {
    if (out.size() >= cap) {
      throw ScaleExceededError("more than " + std::to_string(cap) + " trees");
    }
    out.emplace_back(s.id, std::vector<ArcId>(arcs.begin(), arcs.end()));
  });
  std::sort(out.begin(), out.end(), [](const Tree& a, const Tree& b) { return a.arcs < b.arcs; });
  return out;
}

// Exact global min-cost Steiner tree under per-arc costs. Ties go to the
// lexicographically smallest key.
inline Tree exact_min_steiner_arcs(const Network& net, NodeId source,
                                   std::span<const NodeId> receivers,
                                   std::span<const double> arc_cost, int session_id = 0,
                                   const EnumerationLimits& limits = {}) {
  detail::SteinerSpace space(net, source, receivers, limits);
  double best = std::numeric_limits<double>::infinity();
  Tree best_tree;
  bool found = false;
  space.for_each(arc_cost, &best, [&](std::span<const ArcId> arcs, double) {
    Tree t(session_id, std::vector<ArcId>(arcs.begin(), arcs.end()));
    const double c = tree_cost_from_arcs(t, arc_cost);
    if (!found || c < best || (c == best && t.arcs < best_tree.arcs)) {
      best = c;
      best_tree = std::move(t);
      found = true;
    }
  });
  if (!found) throw InfeasibleError("no Steiner tree reaches every receiver");
  return best_tree;
}

inline Tree exact_min_steiner(const Network& net, NodeId source, std::span<const NodeId> receivers,
                              std::span<const double> link_prices, int session_id = 0,
                              const EnumerationLimits& limits = {}) {
  const auto costs = arc_costs(net, link_prices);
  return exact_min_steiner_arcs(net, source, receivers, costs, session_id, limits);
}

namespace detail {

struct WeightedArc {
  int tail;
  int head;
  double weight;
  int origin;  // index into the caller's arc list
};

// Chu-Liu/Edmonds. Returns indices into `arcs` forming a min-cost
// arborescence rooted at `root` spanning all `n` nodes.
inline std::vector<int> edmonds(int n, int root, const std::vector<WeightedArc>& arcs) {
  std::vector<int> best_in(n, -1);
  for (int i = 0; i < static_cast<int>(arcs.size()); ++i) {
    const auto& a = arcs[i];
    if (a.head == root || a.tail == a.head) continue;
    const int cur = best_in[a.head];
    if (cur < 0 || a.weight < arcs[cur].weight) best_in[a.head] = i;
  }
  for (int v = 0; v < n; ++v) {
    if (v != root && best_in[v] < 0) throw InfeasibleError("node unreachable from root");
  }

  // Look for a cycle among the cheapest in-arcs.
  std::vector<int> mark(n, -1);
  std::vector<int> cycle;
  for (int start = 0; start < n && cycle.empty(); ++start) {
    int v = start;
    while (v != root && mark[v] == -1) {
      mark[v] = start;
      v = arcs[best_in[v]].tail;
    }
    if (v != root && mark[v] == start) {
      int w = v;
      do {
        cycle.push_back(w);
        w = arcs[best_in[w]].tail;
      } while (w != v);
    }
  }
  if (cycle.empty()) {
    std::vector<int> out;
    for (int v = 0; v < n; ++v) {
      if (v != root) out.push_back(best_in[v]);
    }
    return out;
  }

  std::vector<bool> on_cycle(n, false);
  for (int v : cycle) on_cycle[v] = true;
  std::vector<int> renumber(n, -1);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (!on_cycle[v]) renumber[v] = next++;
  }
  const int merged = next++;
  for (int v : cycle) renumber[v] = merged;

  std::vector<WeightedArc> reduced;
  for (int i = 0; i < static_cast<int>(arcs.size()); ++i) {
    const auto& a = arcs[i];
    const int u = renumber[a.tail];
    const int v = renumber[a.head];
    if (u == v) continue;
    const double w = on_cycle[a.head] ? a.weight - arcs[best_in[a.head]].weight : a.weight;
    reduced.push_back({u, v, w, i});
  }
  const auto sub = edmonds(next, renumber[root], reduced);
  std::vector<int> out;
  int entered = -1;
  for (int j : sub) {
    const int i = reduced[j].origin;
    out.push_back(i);
    if (on_cycle[arcs[i].head]) entered = arcs[i].head;
  }
  for (int v : cycle) {
    if (v != entered) out.push_back(best_in[v]);
  }
  return out;
}

}  // namespace detail

// Min-cost arborescence rooted at `source` spanning every node reachable
// from it, under per-arc costs.
inline Tree min_arborescence_arcs(const Network& net, NodeId source,
                                  std::span<const double> arc_cost, int session_id = 0) {
  const auto seen = net.reachable_from(source);
  std::vector<int> local(net.num_nodes(), -1);
  int n = 0;
  for (NodeId v = 0; v < net.num_nodes(); ++v) {
    if (seen[v]) local[v] = n++;
  }
  std::vector<detail::WeightedArc> arcs;
  for (ArcId a = 0; a < net.num_arcs(); ++a) {
    const Arc& arc = net.arc(a);
    if (local[arc.tail] < 0 || local[arc.head] < 0) continue;
    arcs.push_back({local[arc.tail], local[arc.head], arc_cost[a], a});
  }
  std::vector<ArcId> chosen;
  for (int i : detail::edmonds(n, local[source], arcs)) chosen.push_back(arcs[i].origin);
  return Tree(session_id, std::move(chosen));
}

inline Tree min_arborescence(const Network& net, NodeId source, std::span<const double> link_prices,
                             int session_id = 0) {
  const auto costs = arc_costs(net, link_prices);
  return min_arborescence_arcs(net, source, costs, session_id);
}

// Repeatedly drops leaves that are not receivers.
inline Tree prune_steiner_leaves(const Network& net, const Session& s, Tree t) {
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<int> out_degree(net.num_nodes(), 0);
    for (ArcId a : t.arcs) ++out_degree[net.arc(a).tail];
    std::vector<ArcId> kept;
    for (ArcId a : t.arcs) {
      const NodeId head = net.arc(a).head;
      if (out_degree[head] == 0 && !s.is_receiver(head)) {
        changed = true;
      } else {
        kept.push_back(a);
      }
    }
    t.arcs = std::move(kept);
  }
  return t;
}

// Every spanning arborescence rooted at `source` over the nodes reachable
// from it. Brute force; used to check min_arborescence on small graphs.
inline std::vector<Tree> enumerate_spanning_arborescences(const Network& net, NodeId source,
                                                          std::size_t cap) {
  const auto seen = net.reachable_from(source);
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < net.num_nodes(); ++v) {
    if (seen[v] && v != source) nodes.push_back(v);
  }
  std::vector<Tree> out;
  std::vector<ArcId> chosen;
  std::vector<NodeId> parent(net.num_nodes(), -1);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == nodes.size()) {
      if (out.size() >= cap) throw ScaleExceededError("more than " + std::to_string(cap) + " arborescences");
      out.emplace_back(0, chosen);
      return;
    }
    const NodeId v = nodes[i];
    for (ArcId a : net.in_arcs(v)) {
      const NodeId u = net.arc(a).tail;
      if (!seen[u]) continue;
      bool cycle = false;
      for (NodeId w = u; w != -1 && w != source; w = parent[w]) cycle |= (w == v);
      if (cycle) continue;
      parent[v] = u;
      chosen.push_back(a);
      rec(i + 1);
      chosen.pop_back();
      parent[v] = -1;
    }
  };
  rec(0);
  return out;
}

}  // namespace mtpack

#endif  // MTPACK_EXACT_HPP_
