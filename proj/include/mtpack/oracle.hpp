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

#ifndef MTPACK_ORACLE_HPP_
#define MTPACK_ORACLE_HPP_

// Global min-cost tree oracles behind one interface, selected by name:
// "exact", "approx:<level>" or "arborescence".

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/exact.hpp"
#include "mtpack/network.hpp"
#include "mtpack/steiner_approx.hpp"
#include "mtpack/tree.hpp"

namespace mtpack {

enum class OracleKind { kExact, kApprox, kArborescence };

struct OracleSpec {
  OracleKind kind = OracleKind::kExact;
  int level = 2;

  static OracleSpec parse(const std::string& text) {
    if (text == "exact") return {OracleKind::kExact, 2};
    if (text == "arborescence") return {OracleKind::kArborescence, 2};
    if (text.rfind("approx", 0) == 0) {
      int level = 2;
      if (text.size() > 6) {
        if (text[6] != ':') throw ConfigError("bad oracle '" + text + "'");
        try {
          level = std::stoi(text.substr(7));
        } catch (const std::exception&) {
          throw ConfigError("bad approximation level in '" + text + "'");
        }
      }
      ApproxConfig{level}.validate();
      return {OracleKind::kApprox, level};
    }
    throw ConfigError("unknown oracle '" + text + "' (expected exact|approx:<i>|arborescence)");
  }

  std::string name() const {
    switch (kind) {
      case OracleKind::kExact: return "exact";
      case OracleKind::kArborescence: return "arborescence";
      case OracleKind::kApprox: return "approx:" + std::to_string(level);
    }
    return "?";
  }
};

class TreeOracle {
 public:
  virtual ~TreeOracle() = default;
  // Min-cost (or approximately min-cost) tree for `s` under per-arc costs.
  virtual Tree solve(const Session& s, std::span<const double> arc_cost) = 0;
  // Approximation ratio guaranteed for `s` (1 for exact oracles).
  virtual double ratio(const Session& s) const = 0;
  virtual std::string name() const = 0;
};

// Exact global oracle. Enumerates each session's trees once and then scans
// them; ties go to the smallest key, matching exact_min_steiner.
class ExactOracle final : public TreeOracle {
 public:
  explicit ExactOracle(const Network& net, EnumerationLimits limits = {},
                       std::size_t max_trees = 200000)
      : net_(net), limits_(limits), max_trees_(max_trees) {}

  // When every node reachable from the source is a terminal the minimum
  // Steiner tree is the minimum arborescence, so enumeration is skipped.
  Tree solve(const Session& s, std::span<const double> arc_cost) override {
    if (terminals_only(s)) return min_arborescence_arcs(net_, s.source, arc_cost, s.id);
    const auto& trees = trees_for(s);
    const Tree* best = nullptr;
    double best_cost = 0.0;
    for (const Tree& t : trees) {
      const double c = tree_cost_from_arcs(t, arc_cost);
      if (!best || c < best_cost) {
        best = &t;
        best_cost = c;
      }
    }
    return *best;  // trees are key-sorted, so the first minimum wins ties
  }

  double ratio(const Session&) const override { return 1.0; }
  std::string name() const override { return "exact"; }

  bool terminals_only(const Session& s) {
    auto it = terminals_only_.find(s.id);
    if (it == terminals_only_.end()) {
      const auto seen = net_.reachable_from(s.source);
      bool only = true;
      for (NodeId v = 0; v < net_.num_nodes(); ++v) {
        if (seen[v] && v != s.source && !s.is_receiver(v)) only = false;
      }
      it = terminals_only_.emplace(s.id, only).first;
    }
    return it->second;
  }

  const std::vector<Tree>& trees_for(const Session& s) {
    auto it = cache_.find(s.id);
    if (it == cache_.end()) {
      auto trees = enumerate_trees(net_, s, max_trees_, limits_);
      if (trees.empty()) throw InfeasibleError("session " + std::to_string(s.id) + " has no tree");
      it = cache_.emplace(s.id, std::move(trees)).first;
    }
    return it->second;
  }

 private:
  const Network& net_;
  EnumerationLimits limits_;
  std::size_t max_trees_;
  std::map<int, std::vector<Tree>> cache_;
  std::map<int, bool> terminals_only_;
};

class ApproxOracle final : public TreeOracle {
 public:
  ApproxOracle(const Network& net, ApproxConfig cfg) : net_(net), cfg_(cfg) { cfg_.validate(); }

  Tree solve(const Session& s, std::span<const double> arc_cost) override {
    return approx_min_steiner_arcs(net_, s.source, s.receivers, arc_cost, cfg_, s.id);
  }
  double ratio(const Session& s) const override {
    return ratio_bound(cfg_.level, static_cast<int>(s.receivers.size()));
  }
  std::string name() const override { return "approx:" + std::to_string(cfg_.level); }

 private:
  const Network& net_;
  ApproxConfig cfg_;
};

// Spanning arborescence over everything reachable from the source, with
// non-receiver leaves pruned. Exact when the session's overlay holds no
// Steiner nodes (separate swarming).
class ArborescenceOracle final : public TreeOracle {
 public:
  explicit ArborescenceOracle(const Network& net) : net_(net) {}

  Tree solve(const Session& s, std::span<const double> arc_cost) override {
    return prune_steiner_leaves(net_, s, min_arborescence_arcs(net_, s.source, arc_cost, s.id));
  }
  double ratio(const Session&) const override { return 1.0; }
  std::string name() const override { return "arborescence"; }

 private:
  const Network& net_;
};

inline std::unique_ptr<TreeOracle> make_oracle(const Network& net, const OracleSpec& spec,
                                               EnumerationLimits limits = {}) {
  switch (spec.kind) {
    case OracleKind::kExact: return std::make_unique<ExactOracle>(net, limits);
    case OracleKind::kApprox: return std::make_unique<ApproxOracle>(net, ApproxConfig{spec.level});
    case OracleKind::kArborescence: return std::make_unique<ArborescenceOracle>(net);
  }
  throw ConfigError("unknown oracle");
}

}  // namespace mtpack

#endif  // MTPACK_ORACLE_HPP_
