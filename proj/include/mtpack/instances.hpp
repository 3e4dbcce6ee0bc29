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

#ifndef MTPACK_INSTANCES_HPP_
#define MTPACK_INSTANCES_HPP_

// Small instances: the four-node relay example and seeded random graphs
// sized for the exact oracles.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/exact.hpp"
#include "mtpack/network.hpp"

namespace mtpack {

struct Instance {
  Network network;
  std::vector<Session> sessions;
};

// Source 1, receivers 2 and 3, relay 4; unit capacities. Universal mode has
// arcs 1->2, 1->3, 1->4, 4->2, 4->3 and four trees; separate mode keeps only
// the in-session arcs 1->2, 1->3.
inline Instance relay_toy(SwarmMode mode, double max_rate = 10.0) {
  Instance inst;
  Network& net = inst.network;
  for (const char* label : {"1", "2", "3", "4"}) net.add_node(label);
  net.add_direct_link(0, 1, 1.0);
  net.add_direct_link(0, 2, 1.0);
  if (mode == SwarmMode::kUniversal) {
    net.add_direct_link(0, 3, 1.0);
    net.add_direct_link(3, 1, 1.0);
    net.add_direct_link(3, 2, 1.0);
  }
  Session s;
  s.id = 1;
  s.source = 0;
  s.receivers = {1, 2};
  s.min_rate = 0.0;
  s.max_rate = max_rate;
  s.utility = UtilitySpec::log_shifted(1.0);
  inst.sessions.push_back(s);
  return inst;
}

struct RandomInstanceOptions {
  int min_nodes = 4;
  int max_nodes = 8;
  double arc_probability = 0.35;
  int max_sessions = 2;
  int max_receivers = 3;
  double min_capacity = 1.0;
  double max_capacity = 10.0;
  double max_rate = 50.0;
  std::size_t max_trees = 400;  // per session; larger draws are rejected
};

// Draws until the instance is feasible and every session's trees can be
// enumerated within `max_trees`.
inline Instance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& opt = {}) {
  std::uniform_int_distribution<int> node_count(opt.min_nodes, opt.max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Instance inst;
    Network& net = inst.network;
    const int n = node_count(rng);
    for (int v = 0; v < n; ++v) net.add_node("v" + std::to_string(v));
    auto capacity = [&] {
      const double c = opt.min_capacity + (opt.max_capacity - opt.min_capacity) * unit(rng);
      return std::round(c * 10.0) / 10.0;
    };
    std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u != v && unit(rng) < opt.arc_probability) {
          net.add_direct_link(u, v, capacity());
          has[u][v] = true;
        }
      }
    }
    const int sessions = std::uniform_int_distribution<int>(1, opt.max_sessions)(rng);
    for (int s = 0; s < sessions; ++s) {
      std::vector<int> perm(n);
      for (int v = 0; v < n; ++v) perm[v] = v;
      std::shuffle(perm.begin(), perm.end(), rng);
      const int max_r = std::min(opt.max_receivers, n - 1);
      const int r = std::uniform_int_distribution<int>(1, max_r)(rng);
      Session ss;
      ss.id = s + 1;
      ss.source = perm[0];
      ss.receivers.assign(perm.begin() + 1, perm.begin() + 1 + r);
      std::sort(ss.receivers.begin(), ss.receivers.end());
      ss.min_rate = 0.0;
      ss.max_rate = opt.max_rate;
      ss.utility = UtilitySpec::log_shifted(std::round((0.5 + 1.5 * unit(rng)) * 100.0) / 100.0);
      const auto seen = net.reachable_from(ss.source);
      for (NodeId rv : ss.receivers) {
        if (!seen[rv] && !has[ss.source][rv]) {
          net.add_direct_link(ss.source, rv, capacity());
          has[ss.source][rv] = true;
        }
      }
      inst.sessions.push_back(std::move(ss));
    }
    try {
      for (const Session& ss : inst.sessions) enumerate_trees(net, ss, opt.max_trees);
    } catch (const ScaleExceededError&) {
      continue;
    }
    return inst;
  }
  throw ConfigError("could not draw a random instance within the enumeration limits");
}


struct IspOptions {
  int nodes = 30;
  int links = 100;  // directed; even, at least 2 * nodes
  double delay_ms = 100.0;
  double min_capacity = 100.0;
  double max_capacity = 1000.0;
  int sessions = 2;
  int receivers = 4;
  double max_rate = 1000.0;
};

// Backbone-like topology: a bidirectional ring plus random bidirectional
// chords, uniform per-link delay, sessions on random distinct nodes.
inline Instance isp_like(std::mt19937_64& rng, const IspOptions& opt = {}) {
  if (opt.nodes < 3 || opt.links < 2 * opt.nodes || opt.links % 2 != 0 ||
      opt.links > opt.nodes * (opt.nodes - 1)) {
    throw ConfigError("isp_like needs >= 3 nodes and an even link count in [2n, n(n-1)]");
  }
  if (opt.sessions * (opt.receivers + 1) > opt.nodes) throw ConfigError("too many session members");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto capacity = [&] {
    return std::round(opt.min_capacity + (opt.max_capacity - opt.min_capacity) * unit(rng));
  };
  Instance inst;
  Network& net = inst.network;
  const int n = opt.nodes;
  for (int v = 0; v < n; ++v) net.add_node("r" + std::to_string(v));
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  auto pair = [&](int u, int v) {
    const double c = capacity();
    net.add_direct_link(u, v, c, opt.delay_ms);
    net.add_direct_link(v, u, c, opt.delay_ms);
    has[u][v] = has[v][u] = true;
  };
  for (int v = 0; v < n; ++v) pair(v, (v + 1) % n);
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (net.num_links() < opt.links) {
    const int u = pick(rng), v = pick(rng);
    if (u != v && !has[u][v]) pair(u, v);
  }
  std::vector<int> perm(n);
  for (int v = 0; v < n; ++v) perm[v] = v;
  std::shuffle(perm.begin(), perm.end(), rng);
  int next = 0;
  for (int s = 0; s < opt.sessions; ++s) {
    Session ss;
    ss.id = s + 1;
    ss.source = perm[next++];
    for (int r = 0; r < opt.receivers; ++r) ss.receivers.push_back(perm[next++]);
    std::sort(ss.receivers.begin(), ss.receivers.end());
    ss.min_rate = 0.0;
    ss.max_rate = opt.max_rate;
    ss.utility = UtilitySpec::log_shifted(1.0);
    inst.sessions.push_back(std::move(ss));
  }
  return inst;
}

}  // namespace mtpack

#endif  // MTPACK_INSTANCES_HPP_
