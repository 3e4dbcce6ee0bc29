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

#ifndef MTPACK_OPTIMIZER_HPP_
#define MTPACK_OPTIMIZER_HPP_

// Dual subgradient engine for multicast tree packing.
//
// Per iteration:
//   lambda_e <- [lambda_e - delta_e(k) (c_e - sum_t H_et y_t)]_+
//   t_s      <- tree provider under the new prices
//   x_s      <- [U_s'^{-1}(cost(t_s))]_{m_s}^{M_s}
//   y        <- x_s on t_s, zero elsewhere
// Running averages of x, y and link loads are kept from a window start k0.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/network.hpp"
#include "mtpack/oracle.hpp"
#include "mtpack/tree.hpp"
#include "mtpack/utility.hpp"

namespace mtpack {

struct StepRule {
  enum class Kind { kConstant, kDiminishing };
  Kind kind = Kind::kConstant;
  double delta = 1e-3;
  double decay = 0.5;  // diminishing: delta / k^decay

  static StepRule constant(double d) { return {Kind::kConstant, d, 0.5}; }
  static StepRule diminishing(double d0, double decay = 0.5) {
    return {Kind::kDiminishing, d0, decay};
  }

  void validate() const {
    if (!(delta > 0.0)) throw ConfigError("step size must be positive");
    if (kind == Kind::kDiminishing && !(decay > 0.0 && decay <= 1.0)) {
      throw ConfigError("diminishing decay must lie in (0, 1] for a divergent step sum");
    }
  }

  // delta(0) = delta; diminishing: delta(k) = delta / k^decay for k >= 1.
  double at(long k) const {
    if (kind == Kind::kConstant || k <= 1) return delta;
    return delta / std::pow(static_cast<double>(k), decay);
  }

  // "constant:<d>" or "diminishing:<d0>[:<decay>]".
  static StepRule parse(const std::string& text) {
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) throw ConfigError("bad step rule '" + text + "'");
    const std::string kind = text.substr(0, c1);
    const std::string rest = text.substr(c1 + 1);
    StepRule r;
    try {
      if (kind == "constant") {
        r = constant(std::stod(rest));
      } else if (kind == "diminishing") {
        const auto c2 = rest.find(':');
        r = c2 == std::string::npos ? diminishing(std::stod(rest))
                                    : diminishing(std::stod(rest.substr(0, c2)),
                                                  std::stod(rest.substr(c2 + 1)));
      } else {
        throw ConfigError("unknown step rule '" + kind + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad step rule '" + text + "'");
    }
    r.validate();
    return r;
  }

  std::string to_string() const {
    char buf[64];
    if (kind == Kind::kConstant) {
      std::snprintf(buf, sizeof buf, "constant:%.17g", delta);
    } else {
      std::snprintf(buf, sizeof buf, "diminishing:%.17g:%.17g", delta, decay);
    }
    return buf;
  }
};

// Step size on a link at iteration k. Links share one rule.
inline double step_size(const StepRule& rule, long k, LinkId /*link*/ = 0) { return rule.at(k); }

// Returns the tree to use for session index `s` under the given arc costs.
using TreeProvider = std::function<Tree(std::size_t s, std::span<const double> arc_cost)>;

inline TreeProvider oracle_provider(TreeOracle& oracle, const std::vector<Session>& sessions) {
  return [&oracle, &sessions](std::size_t s, std::span<const double> arc_cost) {
    return oracle.solve(sessions[s], arc_cost);
  };
}

inline double primal_value(const std::vector<Session>& sessions, std::span<const double> rates) {
  double v = 0.0;
  for (std::size_t s = 0; s < sessions.size(); ++s) v += value(sessions[s].utility, rates[s]);
  return v;
}

// Dual function value given each session's min tree cost under `prices`.
inline double dual_value_from_costs(const Network& net, const std::vector<Session>& sessions,
                                    std::span<const double> prices,
                                    std::span<const double> min_tree_costs) {
  double v = 0.0;
  for (LinkId e = 0; e < net.num_links(); ++e) v += prices[e] * net.link(e).capacity;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const Session& ss = sessions[s];
    v += session_dual_term(ss.utility, min_tree_costs[s], ss.min_rate, ss.max_rate);
  }
  return v;
}

// theta(lambda) with tree costs from `oracle` (global or restricted).
inline double dual_value(const Network& net, const std::vector<Session>& sessions,
                         std::span<const double> prices, TreeOracle& oracle) {
  const auto costs = arc_costs(net, prices);
  std::vector<double> gamma;
  for (const Session& s : sessions) gamma.push_back(tree_cost_from_arcs(oracle.solve(s, costs), costs));
  return dual_value_from_costs(net, sessions, prices, gamma);
}

struct ConvergenceCriteria {
  double rel_gap = 1e-3;
  long sustain = 100;
  double max_violation = 1e-2;
};

// Relative gap between the averaged primal value and the best dual value
// seen since the last reset, sustained over a number of iterations.
class ConvergenceMonitor {
 public:
  explicit ConvergenceMonitor(ConvergenceCriteria c = {}) : criteria_(c) {}

  bool update(double primal, double dual, double violation) {
    best_dual_ = std::min(best_dual_, dual);
    gap_ = std::abs(primal - best_dual_) / std::max(std::abs(best_dual_), 1e-300);
    if (gap_ < criteria_.rel_gap && violation < criteria_.max_violation) {
      ++streak_;
    } else {
      streak_ = 0;
    }
    return converged();
  }
  bool converged() const { return streak_ >= criteria_.sustain; }
  void reset() {
    best_dual_ = std::numeric_limits<double>::infinity();
    streak_ = 0;
  }
  double gap() const { return gap_; }
  double best_dual() const { return best_dual_; }
  const ConvergenceCriteria& criteria() const { return criteria_; }

 private:
  ConvergenceCriteria criteria_;
  double best_dual_ = std::numeric_limits<double>::infinity();
  double gap_ = std::numeric_limits<double>::infinity();
  long streak_ = 0;
};

struct IterationRecord {
  long k = 0;
  double primal = 0.0;
  double dual = 0.0;
  std::vector<double> rates;
  double max_violation = 0.0;
  std::vector<std::string> tree_keys;
  std::vector<std::string> tree_edges;  // sorted tail>head pairs
};

class SubgradientEngine {
 public:
  SubgradientEngine(const Network& net, std::vector<Session> sessions, StepRule rule,
                    long average_from = 0)
      : net_(net), sessions_(std::move(sessions)), rule_(rule), window_start_(average_from) {
    rule_.validate();
    if (average_from < 0) throw ConfigError("averaging window start must be >= 0");
    for (const Session& s : sessions_) s.validate(net_);
  }

  // lambda(0) = 0 and the iterate (x(0), y(0)) it induces.
  void initialize(const TreeProvider& provider) {
    k_ = 0;
    prices_.assign(net_.num_links(), 0.0);
    max_price_.assign(net_.num_links(), 0.0);
    clear_sums();
    choose(provider);
  }

  void step(const TreeProvider& provider) {
    if (prices_.empty()) throw ConfigError("engine not initialized");
    const auto flow = link_flows();
    const double delta = rule_.at(k_);
    for (LinkId e = 0; e < net_.num_links(); ++e) {
      prices_[e] = std::max(0.0, prices_[e] - delta * (net_.link(e).capacity - flow[e]));
      max_price_[e] = std::max(max_price_[e], prices_[e]);
    }
    ++k_;
    choose(provider);
  }

  // Starts a fresh averaging window at the current iteration.
  void restart_average() {
    window_start_ = k_;
    clear_sums();
    accumulate();
  }

  long iteration() const { return k_; }
  long window_start() const { return window_start_; }
  long window_length() const { return count_; }
  const StepRule& rule() const { return rule_; }
  const Network& network() const { return net_; }
  const std::vector<Session>& sessions() const { return sessions_; }
  std::span<const double> prices() const { return prices_; }
  std::span<const double> max_prices() const { return max_price_; }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<double>& tree_costs() const { return costs_; }

  // H y(k), accumulated session by session in index order.
  std::vector<double> link_flows() const {
    std::vector<double> flow(net_.num_links(), 0.0);
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
      for (auto [link, mult] : usage_[s]) flow[link] += rates_[s] * mult;
    }
    return flow;
  }

  // Running average of y, keyed by (session id, tree key).
  std::map<std::pair<int, TreeKey>, double> average_tree_rates() const {
    std::map<std::pair<int, TreeKey>, double> avg;
    if (count_ == 0) return avg;
    for (const auto& [key, sum] : tree_sums_) avg[key] = sum / static_cast<double>(count_);
    return avg;
  }

  // x-bar defined as A * y-bar.
  std::vector<double> average_rates() const {
    std::vector<double> x(sessions_.size(), 0.0);
    if (count_ == 0) return x;
    std::map<int, std::size_t> index;
    for (std::size_t s = 0; s < sessions_.size(); ++s) index[sessions_[s].id] = s;
    for (const auto& [key, sum] : tree_sums_) x[index.at(key.first)] += sum;
    for (double& v : x) v /= static_cast<double>(count_);
    return x;
  }

  // Running average of x accumulated directly from x(u); equals A * y-bar up
  // to summation order.
  std::vector<double> average_rates_direct() const {
    std::vector<double> x(rate_sums_);
    for (double& v : x) v /= static_cast<double>(std::max<long>(count_, 1));
    return x;
  }

  std::vector<double> average_link_flows() const {
    std::vector<double> f(flow_sums_);
    for (double& v : f) v /= static_cast<double>(std::max<long>(count_, 1));
    return f;
  }

  // Running average of lambda over the window; the current prices before
  // the window opens.
  std::vector<double> average_prices() const {
    if (count_ == 0) return prices_;
    std::vector<double> p(price_sums_);
    for (double& v : p) v /= static_cast<double>(count_);
    return p;
  }

  // max_e (H y-bar - c_e) / c_e, or -1 when no window has started.
  double max_average_violation() const {
    if (count_ == 0) return -1.0;
    const auto f = average_link_flows();
    double worst = -std::numeric_limits<double>::infinity();
    for (LinkId e = 0; e < net_.num_links(); ++e) {
      const double c = net_.link(e).capacity;
      worst = std::max(worst, (f[e] - c) / c);
    }
    return worst;
  }

  double primal_value() const { return mtpack::primal_value(sessions_, average_rates()); }
  double instantaneous_primal_value() const { return mtpack::primal_value(sessions_, rates_); }

  // theta(lambda(k)) with the provider's tree costs.
  double dual_value() const { return dual_value_from_costs(net_, sessions_, prices_, costs_); }

  IterationRecord record() const {
    IterationRecord r;
    r.k = k_;
    r.primal = primal_value();
    r.dual = dual_value();
    r.rates = rates_;
    r.max_violation = max_average_violation();
    for (const Tree& t : trees_) {
      r.tree_keys.push_back(key_string(t.key()));
      r.tree_edges.push_back(edge_string(net_, t));
    }
    return r;
  }

 private:
  void choose(const TreeProvider& provider) {
    const auto costs = arc_costs(net_, prices_);
    trees_.clear();
    rates_.clear();
    costs_.clear();
    usage_.clear();
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
      const Session& ss = sessions_[s];
      Tree t = provider(s, costs);
      const double gamma = tree_cost_from_arcs(t, costs);
      rates_.push_back(rate_from_price(ss.utility, gamma, ss.min_rate, ss.max_rate));
      costs_.push_back(gamma);
      usage_.push_back(link_usage(t, net_));
      trees_.push_back(std::move(t));
    }
    accumulate();
  }

  void clear_sums() {
    tree_sums_.clear();
    rate_sums_.assign(sessions_.size(), 0.0);
    flow_sums_.assign(net_.num_links(), 0.0);
    price_sums_.assign(net_.num_links(), 0.0);
    count_ = 0;
  }

  void accumulate() {
    if (k_ < window_start_ || trees_.empty()) return;
    const auto flow = link_flows();
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
      tree_sums_[{sessions_[s].id, trees_[s].key()}] += rates_[s];
      rate_sums_[s] += rates_[s];
    }
    for (LinkId e = 0; e < net_.num_links(); ++e) {
      flow_sums_[e] += flow[e];
      price_sums_[e] += prices_[e];
    }
    ++count_;
  }

  const Network& net_;
  std::vector<Session> sessions_;
  StepRule rule_;
  long window_start_ = 0;
  long k_ = 0;
  std::vector<double> prices_;
  std::vector<double> max_price_;
  std::vector<Tree> trees_;
  std::vector<double> rates_;
  std::vector<double> costs_;
  std::vector<std::vector<std::pair<LinkId, int>>> usage_;
  std::map<std::pair<int, TreeKey>, double> tree_sums_;
  std::vector<double> rate_sums_;
  std::vector<double> price_sums_;
  std::vector<double> flow_sums_;
  long count_ = 0;
};

// Checks that the structural Lagrangian maximizer (all rate on the min-cost
// tree at the projected rate) does at least as well as `candidate` on
// g(y) = U(sum y) - sum_t y_t cost_t. The candidate must satisfy
// m <= sum y <= M, y >= 0.
inline bool lagrangian_maximizer_check(const Network& net, std::span<const double> prices,
                                       const Session& s, TreeOracle& global_oracle,
                                       const std::vector<std::pair<Tree, double>>& candidate,
                                       double tolerance = 1e-9) {
  const auto costs = arc_costs(net, prices);
  double total = 0.0, paid = 0.0;
  for (const auto& [t, y] : candidate) {
    if (y < 0.0) throw ConfigError("candidate tree rate is negative");
    total += y;
    paid += y * tree_cost_from_arcs(t, costs);
  }
  if (total < s.min_rate - 1e-12 || total > s.max_rate + 1e-12) {
    throw ConfigError("candidate violates m <= sum y <= M");
  }
  const double g_candidate = value(s.utility, total) - paid;
  const double gamma = tree_cost_from_arcs(global_oracle.solve(s, costs), costs);
  const double g_star = session_dual_term(s.utility, gamma, s.min_rate, s.max_rate);
  return g_star >= g_candidate - tolerance;
}

}  // namespace mtpack

#endif  // MTPACK_OPTIMIZER_HPP_
