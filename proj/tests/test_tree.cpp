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


#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mtpack/exact.hpp"
#include "mtpack/instances.hpp"
#include "mtpack/tree.hpp"

namespace mtpack {
namespace {

Session make_session(NodeId src, std::vector<NodeId> receivers, int id = 1) {
  Session s;
  s.id = id;
  s.source = src;
  s.receivers = std::move(receivers);
  s.max_rate = 10;
  return s;
}

// Every arc subset that passes validate_tree. Independent of the
// enumerator's growth strategy; only for graphs with few arcs.
std::vector<Tree> brute_force_trees(const Network& net, const Session& s) {
  const int m = net.num_arcs();
  std::vector<Tree> out;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<ArcId> arcs;
    for (int a = 0; a < m; ++a) {
      if (mask >> a & 1u) arcs.push_back(a);
    }
    Tree t(s.id, arcs);
    if (validate_tree(t, s, net)) out.push_back(t);
  }
  return out;
}

double brute_min(const std::vector<Tree>& trees, std::span<const double> arc_cost) {
  double best = std::numeric_limits<double>::infinity();
  for (const Tree& t : trees) {
    double c = 0;
    for (ArcId a : t.arcs) c += arc_cost[a];
    best = std::min(best, c);
  }
  return best;
}

Network triangle() {
  Network net;
  for (const char* l : {"s", "a", "b"}) net.add_node(l);
  net.add_direct_link(0, 1, 1);  // 0
  net.add_direct_link(0, 2, 1);  // 1
  net.add_direct_link(1, 2, 1);  // 2
  net.add_direct_link(2, 1, 1);  // 3
  return net;
}

TEST(ValidateTree, StarIsValid) {
  const Network net = triangle();
  const auto s = make_session(0, {1, 2});
  EXPECT_TRUE(validate_tree(Tree(1, {0, 1}), s, net));
}

TEST(ValidateTree, InDegreeTwoIsNotATree) {
  const Network net = triangle();
  const auto s = make_session(0, {1, 2});
  const auto check = validate_tree(Tree(1, {0, 1, 2}), s, net);
  EXPECT_FALSE(check);
  EXPECT_NE(check.diagnostic().find("not a tree"), std::string::npos);
}

TEST(ValidateTree, MissingReceiver) {
  const Network net = triangle();
  const auto s = make_session(0, {1, 2});
  const auto check = validate_tree(Tree(1, {0}), s, net);
  EXPECT_FALSE(check);
  EXPECT_NE(check.diagnostic().find("receiver unreachable"), std::string::npos);
}

TEST(ValidateTree, DanglingIdsReportedIndividually) {
  const Network net = triangle();
  const auto s = make_session(0, {1, 2});
  const auto check = validate_tree(Tree(1, {0, 17, 23}), s, net);
  EXPECT_FALSE(check);
  ASSERT_EQ(check.problems.size(), 2u);
  EXPECT_NE(check.problems[0].find("17"), std::string::npos);
  EXPECT_NE(check.problems[1].find("23"), std::string::npos);
}

TEST(ValidateTree, SteinerLeafRejected) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  EXPECT_FALSE(validate_tree(Tree(1, {0, 1, 2}), inst.sessions[0], inst.network));
}

TEST(TreeCost, Examples) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  const std::vector<double> ones(5, 1.0), zeros(5, 0.0);
  const Tree t(1, {2, 3, 4});
  EXPECT_DOUBLE_EQ(tree_cost(t, inst.network, ones), 3.0);
  EXPECT_DOUBLE_EQ(tree_cost(t, inst.network, zeros), 0.0);
  EXPECT_THROW(tree_cost(t, inst.network, std::vector<double>(3, 1.0)), ConfigError);
}

TEST(TreeCost, MatchesEdgeByEdgeSum) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p(5);
    for (double& v : p) v = u(rng);
    for (const Tree& t : enumerate_trees(inst.network, inst.sessions[0], 100)) {
      double sum = 0;
      for (ArcId a : t.arcs) sum += p[inst.network.arc(a).path.front()];
      EXPECT_DOUBLE_EQ(tree_cost(t, inst.network, p), sum);
    }
  }
}

TEST(TreeCost, MultiLinkArcsSumEveryLink) {
  Network net;
  for (const char* l : {"s", "hub", "a"}) net.add_node(l);
  const LinkId up = net.add_link(0, 1, 1), down = net.add_link(1, 2, 1);
  net.add_arc(0, 2, {up, down});
  EXPECT_DOUBLE_EQ(tree_cost(Tree(1, {0}), net, std::vector<double>{0.25, 2.0}), 2.25);
  EXPECT_EQ(link_usage(Tree(1, {0}), net).size(), 2u);
}

TEST(Enumerate, CompleteOverlayTwoReceivers) {
  const Network net = triangle();
  EXPECT_EQ(enumerate_trees(net, make_session(0, {1, 2}), 100).size(), 3u);
}

TEST(Enumerate, SingleReceiverDirectEdge) {
  Network net;
  net.add_node("s");
  net.add_node("r");
  net.add_direct_link(0, 1, 1);
  EXPECT_EQ(enumerate_trees(net, make_session(0, {1}), 10).size(), 1u);
}

TEST(Enumerate, RelayToyHasFourTrees) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  const auto trees = enumerate_trees(inst.network, inst.sessions[0], 100);
  ASSERT_EQ(trees.size(), 4u);
  std::set<std::string> edges;
  for (const Tree& t : trees) edges.insert(edge_string(inst.network, t));
  EXPECT_EQ(edges, (std::set<std::string>{"1>2|1>3", "1>2|1>4|4>3", "1>3|1>4|4>2", "1>4|4>2|4>3"}));
}

TEST(Enumerate, CompleteOverlayCayleyCount) {
  // Without Steiner nodes the count is (r + 1)^(r - 1).
  for (int r = 1; r <= 4; ++r) {
    Network net;
    for (int v = 0; v <= r; ++v) net.add_node("n" + std::to_string(v));
    for (int u = 0; u <= r; ++u) {
      for (int v = 1; v <= r; ++v) {
        if (u != v) net.add_direct_link(u, v, 1);
      }
    }
    std::vector<NodeId> rec;
    for (int v = 1; v <= r; ++v) rec.push_back(v);
    const auto n = static_cast<std::size_t>(std::lround(std::pow(r + 1, r - 1)));
    EXPECT_EQ(enumerate_trees(net, make_session(0, rec), 1000).size(), n) << r;
  }
}

TEST(Enumerate, CapExceededIsAnError) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  EXPECT_THROW(enumerate_trees(inst.network, inst.sessions[0], 3), ScaleExceededError);
}

TEST(Enumerate, GuardRejectsLargeInstances) {
  Network net;
  for (int v = 0; v < 14; ++v) net.add_node("n" + std::to_string(v));
  for (int v = 1; v < 14; ++v) {
    net.add_direct_link(v - 1, v, 1);
    net.add_direct_link(0, v, 1);
  }
  EXPECT_THROW(enumerate_trees(net, make_session(0, {13}), 100000), ScaleExceededError);
  EXPECT_THROW(exact_min_steiner(net, 0, std::vector<NodeId>{13},
                                 std::vector<double>(net.num_links(), 1.0)),
               ScaleExceededError);
}

TEST(Enumerate, UnreachableReceiverIsInfeasible) {
  Network net;
  for (const char* l : {"s", "a", "b"}) net.add_node(l);
  net.add_direct_link(0, 1, 1);
  EXPECT_THROW(enumerate_trees(net, make_session(0, {2}), 10), InfeasibleError);
}

TEST(Enumerate, MatchesBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(9);
  int checked = 0;
  while (checked < 60) {
    const auto inst = random_instance(rng);
    if (inst.network.num_arcs() > 16) continue;
    for (const Session& s : inst.sessions) {
      auto fast = enumerate_trees(inst.network, s, 100000);
      auto slow = brute_force_trees(inst.network, s);
      std::sort(slow.begin(), slow.end(), [](const Tree& a, const Tree& b) { return a.arcs < b.arcs; });
      EXPECT_EQ(fast, slow);
      std::set<TreeKey> keys;
      for (const Tree& t : fast) EXPECT_TRUE(keys.insert(t.key()).second);
    }
    ++checked;
  }
}

TEST(ExactSteiner, DirectStar) {
  const Network net = triangle();
  const auto t = exact_min_steiner(net, 0, std::vector<NodeId>{1, 2}, std::vector<double>{1, 1, 5, 5});
  EXPECT_EQ(t.arcs, (TreeKey{0, 1}));
}

TEST(ExactSteiner, ZeroPricesPickSmallestKey) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  const auto t = exact_min_steiner(inst.network, 0, inst.sessions[0].receivers, std::vector<double>(5, 0.0));
  EXPECT_EQ(t.arcs, (TreeKey{0, 1}));
}

TEST(ExactSteiner, DiamondUsesSteinerNode) {
  Network net;
  for (const char* l : {"s", "a", "b", "x"}) net.add_node(l);
  net.add_direct_link(0, 1, 1);  // 0
  net.add_direct_link(0, 2, 1);  // 1
  net.add_direct_link(0, 3, 1);  // 2
  net.add_direct_link(3, 1, 1);  // 3
  net.add_direct_link(3, 2, 1);  // 4
  const std::vector<double> p{5, 5, 1, 1, 1};
  const auto s = make_session(0, {1, 2});
  const auto t = exact_min_steiner(net, 0, s.receivers, p);
  EXPECT_EQ(t.arcs, (TreeKey{2, 3, 4}));
  EXPECT_DOUBLE_EQ(tree_cost(t, net, p), brute_min(brute_force_trees(net, s), p));
  EXPECT_DOUBLE_EQ(tree_cost(t, net, p), 3.0);
}

TEST(ExactSteiner, MatchesBruteForceMinimum) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 3);
  int checked = 0;
  while (checked < 100) {
    const auto inst = random_instance(rng);
    if (inst.network.num_arcs() > 16) continue;
    std::vector<double> p(inst.network.num_links());
    for (double& v : p) v = std::round(u(rng) * 4) / 4;  // ties on purpose
    const auto costs = arc_costs(inst.network, p);
    for (const Session& s : inst.sessions) {
      const auto all = brute_force_trees(inst.network, s);
      const Tree t = exact_min_steiner(inst.network, s.source, s.receivers, p, s.id);
      EXPECT_TRUE(validate_tree(t, s, inst.network));
      const double best = brute_min(all, costs);
      EXPECT_NEAR(tree_cost(t, inst.network, p), best, 1e-12);
      // Ties broken by smallest key.
      for (const Tree& o : all) {
        if (tree_cost(o, inst.network, p) == tree_cost(t, inst.network, p)) {
          EXPECT_LE(t.arcs, o.arcs);
        }
      }
    }
    ++checked;
  }
}

TEST(Arborescence, UniformPricesCompleteTriangle) {
  const Network net = triangle();
  const auto t = min_arborescence(net, 0, std::vector<double>(4, 0.7));
  EXPECT_EQ(t.arcs.size(), 2u);
  EXPECT_DOUBLE_EQ(tree_cost(t, net, std::vector<double>(4, 0.7)), 1.4);
  EXPECT_DOUBLE_EQ(tree_cost(min_arborescence(net, 0, std::vector<double>(4, 0.0)), net,
                             std::vector<double>(4, 0.0)),
                   0.0);
}

TEST(Arborescence, MatchesEnumerationOnCompleteSixNodeOverlays) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 10);
  Network net;
  for (int v = 0; v < 6; ++v) net.add_node("n" + std::to_string(v));
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      if (a != b) net.add_direct_link(a, b, 1);
    }
  }
  const auto all = enumerate_spanning_arborescences(net, 0, 100000);
  EXPECT_EQ(all.size(), 1296u);  // 6^4
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p(net.num_links());
    for (double& v : p) v = u(rng);
    const auto t = min_arborescence(net, 0, p);
    EXPECT_EQ(t.arcs.size(), 5u);
    EXPECT_NEAR(tree_cost(t, net, p), brute_min(all, arc_costs(net, p)), 1e-9);
  }
}

TEST(Arborescence, SteinerNeverDearerThanSpanning) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 4);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng);
    std::vector<double> p(inst.network.num_links());
    for (double& v : p) v = u(rng);
    for (const Session& s : inst.sessions) {
      const double steiner = tree_cost(exact_min_steiner(inst.network, s.source, s.receivers, p), inst.network, p);
      const double span = tree_cost(min_arborescence(inst.network, s.source, p), inst.network, p);
      EXPECT_LE(steiner, span + 1e-12);
      for (const Tree& t : enumerate_trees(inst.network, s, 100000)) {
        EXPECT_GE(tree_cost(t, inst.network, p), steiner - 1e-12);
      }
    }
  }
}

TEST(Arborescence, PruneDropsSteinerLeaves) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  const Tree pruned = prune_steiner_leaves(inst.network, inst.sessions[0], Tree(1, {0, 1, 2}));
  EXPECT_EQ(pruned.arcs, (TreeKey{0, 1}));
}

TEST(Incidence, LinkLoads) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  const std::vector<Tree> trees{Tree(1, {0, 1}), Tree(1, {2, 3, 4}), Tree(1, {0, 2, 4})};
  IncidenceView h(inst.network, trees);
  const auto load = h.link_loads(std::vector<double>{1.0, 2.0, 0.5});
  EXPECT_EQ(load, (std::vector<double>{1.5, 1.0, 2.5, 2.0, 2.5}));
  EXPECT_EQ(h.trees_on(2).size(), 2u);
}

TEST(Tree, KeyAndEdgeStrings) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  const Tree t(1, {4, 2, 3});
  EXPECT_EQ(t.key(), (TreeKey{2, 3, 4}));
  EXPECT_EQ(key_string(t.key()), "2-3-4");
  EXPECT_EQ(edge_string(inst.network, t), "1>4|4>2|4>3");
}

}  // namespace
}  // namespace mtpack
