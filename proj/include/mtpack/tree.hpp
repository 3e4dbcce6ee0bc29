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

#ifndef MTPACK_TREE_HPP_
#define MTPACK_TREE_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/network.hpp"

namespace mtpack {

// Sorted arc ids. Two trees are the same column iff their keys are equal.
using TreeKey = std::vector<ArcId>;

struct Tree {
  int session = 0;
  TreeKey arcs;  // sorted ascending

  Tree() = default;
  Tree(int session_id, std::vector<ArcId> arc_ids) : session(session_id), arcs(std::move(arc_ids)) {
    std::sort(arcs.begin(), arcs.end());
  }
  const TreeKey& key() const { return arcs; }
  friend bool operator==(const Tree&, const Tree&) = default;
};

inline std::string key_string(const TreeKey& key) {
  std::string s;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(key[i]);
  }
  return s;
}

// Sorted "tail>head" pairs joined by '|', using node labels.
inline std::string edge_string(const Network& net, const Tree& t) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (ArcId a : t.arcs) pairs.emplace_back(net.label(net.arc(a).tail), net.label(net.arc(a).head));
  std::sort(pairs.begin(), pairs.end());
  std::string s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) s += '|';
    s += pairs[i].first + ">" + pairs[i].second;
  }
  return s;
}

struct TreeCheck {
  bool valid = true;
  std::vector<std::string> problems;

  explicit operator bool() const { return valid; }
  std::string diagnostic() const {
    std::string s;
    for (const auto& p : problems) s += (s.empty() ? "" : "; ") + p;
    return s;
  }
  void fail(std::string why) {
    valid = false;
    problems.push_back(std::move(why));
  }
};

// A tree is valid iff it is an arborescence rooted at the session source
// (in-degree exactly 1 for every other tree node, everything reachable from
// the source), it reaches every receiver, and every leaf is a receiver.
inline TreeCheck validate_tree(const Tree& t, const Session& s, const Network& net) {
  TreeCheck check;
  for (ArcId a : t.arcs) {
    if (a < 0 || a >= net.num_arcs()) check.fail("dangling arc id " + std::to_string(a));
  }
  if (!check) return check;
  if (std::adjacent_find(t.arcs.begin(), t.arcs.end()) != t.arcs.end()) {
    check.fail("not a tree: repeated arc");
    return check;
  }

  std::map<NodeId, int> in_degree, out_degree;
  std::map<NodeId, std::vector<NodeId>> children;
  for (ArcId a : t.arcs) {
    const Arc& arc = net.arc(a);
    ++in_degree[arc.head];
    ++out_degree[arc.tail];
    in_degree.try_emplace(arc.tail, 0);
    children[arc.tail].push_back(arc.head);
  }
  for (const auto& [node, deg] : in_degree) {
    if (node == s.source && deg > 0) {
      check.fail("not a tree: arc enters the source");
    } else if (node != s.source && deg > 1) {
      check.fail("not a tree: node '" + net.label(node) + "' has in-degree " + std::to_string(deg));
    }
  }
  if (!check) return check;

  std::set<NodeId> reached{s.source};
  std::vector<NodeId> stack{s.source};
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    auto it = children.find(u);
    if (it == children.end()) continue;
    for (NodeId v : it->second) {
      if (reached.insert(v).second) stack.push_back(v);
    }
  }
  for (const auto& [node, deg] : in_degree) {
    if (!reached.contains(node)) {
      check.fail("not a tree: node '" + net.label(node) + "' not connected to the source");
    }
  }
  for (NodeId r : s.receivers) {
    if (!reached.contains(r)) check.fail("receiver unreachable: '" + net.label(r) + "'");
  }
  for (const auto& [node, deg] : in_degree) {
    if (node != s.source && !out_degree.contains(node) && !s.is_receiver(node)) {
      check.fail("Steiner leaf: '" + net.label(node) + "'");
    }
  }
  return check;
}

// Per-arc price: the sum of link prices along the arc's path.
inline std::vector<double> arc_costs(const Network& net, std::span<const double> link_prices) {
  if (static_cast<int>(link_prices.size()) != net.num_links()) {
    throw ConfigError("price vector does not cover every link");
  }
  std::vector<double> costs(net.num_arcs());
  for (ArcId a = 0; a < net.num_arcs(); ++a) {
    double c = 0.0;
    for (LinkId l : net.arc(a).path) c += link_prices[l];
    costs[a] = c;
  }
  return costs;
}

// Tree cost from precomputed arc costs, summed in key order.
inline double tree_cost_from_arcs(const Tree& t, std::span<const double> arc_cost) {
  double c = 0.0;
  for (ArcId a : t.arcs) c += arc_cost[a];
  return c;
}

// Sum of link prices over the tree (links used k times count k times).
inline double tree_cost(const Tree& t, const Network& net, std::span<const double> link_prices) {
  if (static_cast<int>(link_prices.size()) != net.num_links()) {
    throw ConfigError("missing price: price vector does not cover every link");
  }
  double c = 0.0;
  for (ArcId a : t.arcs) {
    if (a < 0 || a >= net.num_arcs()) throw ConfigError("dangling arc id " + std::to_string(a));
    double arc_cost = 0.0;
    for (LinkId l : net.arc(a).path) arc_cost += link_prices[l];
    c += arc_cost;
  }
  return c;
}

// (link, multiplicity) pairs for the links a tree loads, sorted by link id.
inline std::vector<std::pair<LinkId, int>> link_usage(const Tree& t, const Network& net) {
  std::map<LinkId, int> count;
  for (ArcId a : t.arcs) {
    for (LinkId l : net.arc(a).path) ++count[l];
  }
  return {count.begin(), count.end()};
}

// Nodes spanned by the tree, sorted.
inline std::vector<NodeId> tree_nodes(const Tree& t, const Network& net, NodeId source) {
  std::set<NodeId> nodes{source};
  for (ArcId a : t.arcs) {
    nodes.insert(net.arc(a).tail);
    nodes.insert(net.arc(a).head);
  }
  return {nodes.begin(), nodes.end()};
}

// Link-tree incidence (the H matrix) over a set of trees, built on demand.
class IncidenceView {
 public:
  IncidenceView(const Network& net, std::span<const Tree> trees) : net_(&net) {
    for (std::size_t i = 0; i < trees.size(); ++i) {
      for (auto [link, mult] : link_usage(trees[i], net)) by_link_[link].emplace_back(i, mult);
    }
  }

  // (tree index, multiplicity) for every tree loading `link`.
  const std::vector<std::pair<std::size_t, int>>& trees_on(LinkId link) const {
    static const std::vector<std::pair<std::size_t, int>> kNone;
    auto it = by_link_.find(link);
    return it == by_link_.end() ? kNone : it->second;
  }

  // H * rates.
  std::vector<double> link_loads(std::span<const double> tree_rates) const {
    std::vector<double> load(net_->num_links(), 0.0);
    for (const auto& [link, entries] : by_link_) {
      for (auto [i, mult] : entries) load[link] += mult * tree_rates[i];
    }
    return load;
  }

 private:
  const Network* net_;
  std::map<LinkId, std::vector<std::pair<std::size_t, int>>> by_link_;
};

}  // namespace mtpack

#endif  // MTPACK_TREE_HPP_
