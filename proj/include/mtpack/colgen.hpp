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

#ifndef MTPACK_COLGEN_HPP_
#define MTPACK_COLGEN_HPP_

// Column generation over a restricted tree pool. Subgradient steps pick the
// cheapest pooled tree; every `pricing_interval` iterations each session
// first asks the global (possibly approximate) oracle for a tree under the
// new prices and admits it when it is new and strictly cheaper than the
// pool's best. With pricing_interval = 1 and an exact oracle the trajectory
// is the plain subgradient algorithm.

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/network.hpp"
#include "mtpack/optimizer.hpp"
#include "mtpack/oracle.hpp"
#include "mtpack/tree.hpp"
#include "mtpack/utility.hpp"

namespace mtpack {

struct AdmissionEvent {
  long iteration = 0;
  int session = 0;
  TreeKey key;
  double cost = 0.0;
  std::size_t pool_size = 0;  // q after admission
};

// Restricted tree set, per session index. Trees are never removed.
class TreePool {
 public:
  explicit TreePool(std::size_t num_sessions = 0) : trees_(num_sessions), keys_(num_sessions) {}

  std::size_t num_sessions() const { return trees_.size(); }
  std::size_t size() const { return total_; }
  std::size_t size(std::size_t s) const { return trees_.at(s).size(); }
  const std::vector<Tree>& trees(std::size_t s) const { return trees_.at(s); }
  const std::vector<AdmissionEvent>& log() const { return log_; }
  bool contains(std::size_t s, const TreeKey& key) const { return keys_.at(s).contains(key); }

  bool add(std::size_t s, Tree t, long iteration, double cost) {
    if (!keys_.at(s).insert(t.key()).second) return false;
    ++total_;
    log_.push_back({iteration, t.session, t.key(), cost, total_});
    trees_[s].push_back(std::move(t));
    return true;
  }

 private:
  std::vector<std::vector<Tree>> trees_;
  std::vector<std::set<TreeKey>> keys_;
  std::vector<AdmissionEvent> log_;
  std::size_t total_ = 0;
};

// Cheapest pooled tree for session index `s`; ties go to the smaller key.
inline std::pair<Tree, double> local_min_cost_tree(const TreePool& pool, std::size_t s,
                                                   std::span<const double> arc_cost) {
  const auto& trees = pool.trees(s);
  if (trees.empty()) throw ConfigError("empty tree pool for session index " + std::to_string(s));
  const Tree* best = nullptr;
  double best_cost = 0.0;
  for (const Tree& t : trees) {
    const double c = tree_cost_from_arcs(t, arc_cost);
    if (!best || c < best_cost || (c == best_cost && t.key() < best->key())) {
      best = &t;
      best_cost = c;
    }
  }
  return {*best, best_cost};
}

struct AdmissionResult {
  bool admitted = false;
  bool duplicate = false;
  double candidate_cost = 0.0;
  double local_cost = std::numeric_limits<double>::infinity();
  // Cost of the tree that answers the pricing round: the candidate when
  // admitted, otherwise the pool's best.
  double pricing_cost = 0.0;
};

// Admits `candidate` iff it is new to the pool and strictly cheaper than the
// pool's current best for that session.
inline AdmissionResult maybe_admit(TreePool& pool, const Network& net, const Session& session,
                                   std::size_t s, const Tree& candidate,
                                   std::span<const double> arc_cost, long iteration = 0) {
  if (auto check = validate_tree(candidate, session, net); !check) {
    throw ConfigError("invalid candidate tree: " + check.diagnostic());
  }
  AdmissionResult r;
  r.candidate_cost = tree_cost_from_arcs(candidate, arc_cost);
  if (pool.size(s) > 0) r.local_cost = local_min_cost_tree(pool, s, arc_cost).second;
  if (pool.contains(s, candidate.key())) {
    r.duplicate = true;
    r.pricing_cost = r.local_cost;
    return r;
  }
  if (r.candidate_cost < r.local_cost) {
    r.admitted = pool.add(s, candidate, iteration, r.candidate_cost);
    r.pricing_cost = r.candidate_cost;
  } else {
    r.pricing_cost = r.local_cost;
  }
  return r;
}

struct ColGenConfig {
  long pricing_interval = 1;  // subgradient steps between pricing rounds
  OracleSpec oracle;
  StepRule step = StepRule::constant(1e-3);
  long max_iterations = 10000;
  long average_from = 0;
  bool stop_on_convergence = false;
  bool restart_average_on_admission = false;
  ConvergenceCriteria criteria;
  long trace_every = 1;  // 0 disables the iteration trace

  void validate() const {
    if (pricing_interval < 1) throw ConfigError("pricing interval must be >= 1");
    if (max_iterations < 0) throw ConfigError("iteration budget must be >= 0");
    if (trace_every < 0) throw ConfigError("trace_every must be >= 0");
    step.validate();
  }
};

struct ColGenResult {
  long iterations = 0;
  bool converged = false;
  std::vector<double> prices;           // lambda at the last iteration
  std::vector<double> certified_prices;  // lambda-bar: best restricted dual point
  double certified_dual = 0.0;           // theta^(q)(lambda-bar)
  std::vector<double> rates;             // x(k)
  std::vector<double> average_rates;     // x-bar
  std::map<std::pair<int, TreeKey>, double> average_tree_rates;
  std::vector<double> average_link_flows;
  double max_violation = 0.0;
  double primal = 0.0;  // sum U(x-bar)
  double dual = 0.0;    // best restricted dual in the final window
  double gap = 0.0;
  TreePool pool;
  std::vector<IterationRecord> trace;
  std::vector<std::string> final_tree_keys;
};

class ColumnGeneration {
 public:
  ColumnGeneration(const Network& net, std::vector<Session> sessions, ColGenConfig cfg,
                   EnumerationLimits limits = {})
      : net_(net),
        cfg_((cfg.validate(), cfg)),
        oracle_(make_oracle(net, cfg.oracle, limits)),
        engine_(net, std::move(sessions), cfg.step, cfg.average_from),
        pool_(engine_.sessions().size()),
        monitor_(cfg.criteria) {}

  // Seeds the pool with the global oracle's trees at lambda = 0.
  void initialize() {
    pricing_now_ = true;
    admitted_ = false;
    engine_.initialize(provider());
    observe();
  }

  // One subgradient iteration; prices globally first on pricing iterations.
  void step() {
    pricing_now_ = (engine_.iteration() + 1) % cfg_.pricing_interval == 0;
    admitted_ = false;
    engine_.step(provider());
    if (admitted_) {
      monitor_.reset();
      best_dual_ = std::numeric_limits<double>::infinity();
      if (cfg_.restart_average_on_admission) engine_.restart_average();
    }
    observe();
  }

  ColGenResult run() {
    initialize();
    bool converged = false;
    while (engine_.iteration() < cfg_.max_iterations) {
      step();
      if (cfg_.stop_on_convergence && monitor_.converged() && last_round_clean_) {
        // Confirm the pricing condition at the certified point as well.
        if (price_at(best_prices_) == 0) {
          converged = true;
          break;
        }
        monitor_.reset();
        best_dual_ = std::numeric_limits<double>::infinity();
      }
    }
    return result(converged);
  }

  // One pricing round at arbitrary prices; returns the number of admissions.
  int price_at(std::span<const double> prices) {
    const auto costs = arc_costs(net_, prices);
    int admitted = 0;
    for (std::size_t s = 0; s < engine_.sessions().size(); ++s) {
      const Session& ss = engine_.sessions()[s];
      const Tree cand = oracle_->solve(ss, costs);
      admitted += maybe_admit(pool_, net_, ss, s, cand, costs, engine_.iteration()).admitted;
    }
    return admitted;
  }

  ColGenResult result(bool converged) const {
    ColGenResult r;
    r.iterations = engine_.iteration();
    r.converged = converged;
    r.prices.assign(engine_.prices().begin(), engine_.prices().end());
    r.certified_prices = best_prices_.empty() ? r.prices : best_prices_;
    r.certified_dual = restricted_dual(r.certified_prices);
    // The window average of lambda is often the better dual point.
    const auto averaged = engine_.average_prices();
    const double averaged_dual = restricted_dual(averaged);
    if (averaged_dual < r.certified_dual) {
      r.certified_prices = averaged;
      r.certified_dual = averaged_dual;
    }
    r.rates = engine_.rates();
    r.average_rates = engine_.average_rates();
    r.average_tree_rates = engine_.average_tree_rates();
    r.average_link_flows = engine_.average_link_flows();
    r.max_violation = engine_.max_average_violation();
    r.primal = engine_.primal_value();
    r.dual = std::min(monitor_.best_dual(), r.certified_dual);
    r.gap = std::abs(r.primal - r.dual) / std::max(std::abs(r.dual), 1e-300);
    r.pool = pool_;
    r.trace = trace_;
    for (const Tree& t : engine_.trees()) r.final_tree_keys.push_back(key_string(t.key()));
    return r;
  }

  // theta^(q)(prices) over the current pool.
  double restricted_dual(std::span<const double> prices) const {
    const auto costs = arc_costs(net_, prices);
    std::vector<double> gamma;
    for (std::size_t s = 0; s < engine_.sessions().size(); ++s) {
      gamma.push_back(local_min_cost_tree(pool_, s, costs).second);
    }
    return dual_value_from_costs(net_, engine_.sessions(), prices, gamma);
  }

  const SubgradientEngine& engine() const { return engine_; }
  const TreePool& pool() const { return pool_; }
  TreeOracle& oracle() { return *oracle_; }
  const ConvergenceMonitor& monitor() const { return monitor_; }
  const std::vector<IterationRecord>& trace() const { return trace_; }

 private:
  TreeProvider provider() {
    return [this](std::size_t s, std::span<const double> costs) {
      if (pricing_now_) {
        const Session& ss = engine_.sessions()[s];
        const Tree cand = oracle_->solve(ss, costs);
        if (maybe_admit(pool_, net_, ss, s, cand, costs, engine_.iteration()).admitted) {
          admitted_ = true;
        }
      }
      return local_min_cost_tree(pool_, s, costs).first;
    };
  }

  void observe() {
    if (pricing_now_) last_round_clean_ = !admitted_;
    const double dual = engine_.dual_value();
    if (dual < best_dual_) {
      best_dual_ = dual;
      best_prices_.assign(engine_.prices().begin(), engine_.prices().end());
    }
    monitor_.update(engine_.primal_value(), dual, engine_.max_average_violation());
    if (cfg_.trace_every > 0 && engine_.iteration() % cfg_.trace_every == 0) {
      trace_.push_back(engine_.record());
    }
  }

  const Network& net_;
  ColGenConfig cfg_;
  std::unique_ptr<TreeOracle> oracle_;
  SubgradientEngine engine_;
  TreePool pool_;
  ConvergenceMonitor monitor_;
  std::vector<IterationRecord> trace_;
  bool pricing_now_ = false;
  bool admitted_ = false;
  bool last_round_clean_ = false;
  double best_dual_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_prices_;
};

inline ColGenResult colgen_run(const Network& net, const std::vector<Session>& sessions,
                               const ColGenConfig& cfg, EnumerationLimits limits = {}) {
  ColumnGeneration cg(net, sessions, cfg, limits);
  return cg.run();
}

struct SessionGap {
  int session = 0;
  double global_cost = 0.0;
  double local_cost = 0.0;
  double h_global = 0.0;
  double h_local = 0.0;
  double difference = 0.0;  // h_global - h_local, >= 0
  bool at_min_rate = false;  // x-bar at m_s: the interior-rate assumption fails
};

// Per session, h at the global and at the pooled min tree cost. All
// differences zero certify that the restricted solution solves the full
// problem.
inline std::vector<SessionGap> optimality_check(const Network& net, const std::vector<Session>& sessions,
                                                const TreePool& pool, std::span<const double> prices,
                                                TreeOracle& global_oracle,
                                                std::span<const double> average_rates = {}) {
  const auto costs = arc_costs(net, prices);
  std::vector<SessionGap> out;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const Session& ss = sessions[s];
    SessionGap g;
    g.session = ss.id;
    g.global_cost = tree_cost_from_arcs(global_oracle.solve(ss, costs), costs);
    g.local_cost = local_min_cost_tree(pool, s, costs).second;
    g.h_global = session_dual_term(ss.utility, g.global_cost, ss.min_rate, ss.max_rate);
    g.h_local = session_dual_term(ss.utility, g.local_cost, ss.min_rate, ss.max_rate);
    g.difference = g.h_global - g.h_local;
    if (s < average_rates.size()) g.at_min_rate = average_rates[s] <= ss.min_rate;
    out.push_back(g);
  }
  return out;
}

}  // namespace mtpack

#endif  // MTPACK_COLGEN_HPP_
