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

#ifndef MTPACK_SIMULATOR_HPP_
#define MTPACK_SIMULATOR_HPP_

// Event-driven replay of the distributed protocol.
//
// Each slot: links update their prices from the rates announced by
// signaling packets, nodes report prices to every source with feedback
// packets, and each source picks a tree and a rate under its own (possibly
// stale) view of the prices. Control packets travel on hop-count shortest
// paths and take the summed link delays. Data is replayed at burst level:
// a tree chosen in slot k carries data in slot k+1 through per-link queues
// whose capacity left after control traffic is shared across sessions in
// proportion to backlog.

#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "mtpack/colgen.hpp"
#include "mtpack/core.hpp"
#include "mtpack/network.hpp"
#include "mtpack/optimizer.hpp"
#include "mtpack/oracle.hpp"
#include "mtpack/tree.hpp"

namespace mtpack {

// ---- control packet formats and overhead arithmetic ------------------------

inline constexpr std::int64_t kHeaderBits = 20 * 8;
inline constexpr std::int64_t kFieldBits = 32;

inline std::int64_t signaling_bits(std::int64_t links_carried) {
  return kHeaderBits + kFieldBits + kFieldBits + kFieldBits * links_carried;
}
inline std::int64_t feedback_bits(std::int64_t links_reported) {
  return kHeaderBits + kFieldBits + 2 * kFieldBits * links_reported;
}

using Rational = boost::rational<std::int64_t>;

struct ControlOverhead {
  Rational forward_bits_per_slot;
  Rational feedback_bits_per_slot;
  Rational forward_bps;
  Rational feedback_bps;
  Rational fraction;  // (forward + feedback) / data rate
};

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

// Per-source bounds: signaling to n nodes carrying m link ids in total, and
// feedback from n nodes reporting m links in total.
inline ControlOverhead control_overhead(std::int64_t n, std::int64_t m, Rational slot_s,
                                        Rational data_bps) {
  if (n < 1 || m < 1) throw ConfigError("node and link counts must be >= 1");
  if (slot_s <= 0) throw ConfigError("slot length must be positive");
  if (data_bps <= 0) throw ConfigError("data rate must be positive");
  ControlOverhead o;
  o.forward_bits_per_slot = Rational((kHeaderBits + 2 * kFieldBits) * n + kFieldBits * m);
  o.feedback_bits_per_slot = Rational((kHeaderBits + kFieldBits) * n + 2 * kFieldBits * m);
  o.forward_bps = o.forward_bits_per_slot / slot_s;
  o.feedback_bps = o.feedback_bits_per_slot / slot_s;
  o.fraction = (o.forward_bps + o.feedback_bps) / data_bps;
  return o;
}

// Decimal expansion of r, exact when it terminates within `max_digits`
// fractional digits (otherwise truncated).
inline std::string format_decimal(const Rational& r, int max_digits = 12) {
  std::int64_t num = r.numerator();
  const std::int64_t den = r.denominator();
  std::string out;
  if (num < 0) {
    out = "-";
    num = -num;
  }
  out += std::to_string(num / den);
  std::int64_t rem = num % den;
  if (rem == 0) return out;
  out += '.';
  for (int i = 0; i < max_digits && rem != 0; ++i) {
    rem *= 10;
    out += static_cast<char>('0' + rem / den);
    rem %= den;
  }
  return out;
}

// Exact rational for a decimal literal such as "0.5" or "100e6".
inline Rational parse_rational(const std::string& text) {
  std::string mant = text;
  std::int64_t exp10 = 0;
  if (auto e = text.find_first_of("eE"); e != std::string::npos) {
    mant = text.substr(0, e);
    try {
      exp10 = std::stoll(text.substr(e + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + text + "'");
    }
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    neg = mant[0] == '-';
    mant = mant.substr(1);
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool dot = false;
  bool digits = false;
  for (char ch : mant) {
    if (ch == '.' && !dot) {
      dot = true;
    } else if (ch >= '0' && ch <= '9') {
      digits = true;
      if (num > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
        throw ConfigError("number '" + text + "' has too many digits");
      }
      num = num * 10 + (ch - '0');
      if (dot) den *= 10;
    } else {
      throw ConfigError("bad number '" + text + "'");
    }
  }
  if (!digits || std::abs(exp10) > 18) throw ConfigError("bad number '" + text + "'");
  Rational r(neg ? -num : num, den);
  for (std::int64_t i = 0; i < std::abs(exp10); ++i) r = exp10 > 0 ? r * 10 : r / 10;
  return r;
}

// ---- simulator -------------------------------------------------------------

enum class PacketSizing { kFormat, kFixed };

struct SimConfig {
  double slot_s = 1.0;
  long horizon_slots = 1000;
  long pricing_interval = 1;
  OracleSpec oracle;
  StepRule step = StepRule::diminishing(1e-2);
  double rate_unit_bps = 1000.0;  // capacities and rates are in this unit
  PacketSizing sizing = PacketSizing::kFormat;
  std::int64_t fixed_packet_bits = 400 * 8;
  int receiver_window = 10;  // slots in the receiver rate average

  void validate() const {
    if (!(slot_s > 0)) throw ConfigError("slot length must be positive");
    if (horizon_slots < 1) throw ConfigError("horizon must be >= 1 slot");
    if (pricing_interval < 1) throw ConfigError("pricing interval must be >= 1");
    if (!(rate_unit_bps > 0)) throw ConfigError("rate unit must be positive");
    if (fixed_packet_bits < 1) throw ConfigError("packet size must be positive");
    if (receiver_window < 1) throw ConfigError("receiver window must be >= 1");
    step.validate();
  }
};

struct SlotRecord {
  long slot = 0;
  std::vector<double> prices;           // true link prices after this slot's update
  std::vector<double> rates;            // x_s chosen in this slot
  std::vector<std::string> tree_keys;   // tree chosen in this slot
  std::vector<double> receiver_rates;   // mean over receivers, window average
  double aggregate_backlog_bits = 0.0;
  double max_link_backlog_bits = 0.0;
  std::int64_t forward_bits = 0;
  std::int64_t feedback_bits = 0;
};

struct SimResult {
  std::vector<SlotRecord> slots;
  std::vector<double> final_prices;
  TreePool pool{0};
  double max_staleness_s = 0.0;  // longest control path delay
};

class Simulator {
 public:
  Simulator(const Network& net, std::vector<Session> sessions, SimConfig cfg,
            EnumerationLimits limits = {})
      : net_(net),
        sessions_(std::move(sessions)),
        cfg_((cfg.validate(), cfg)),
        oracle_(make_oracle(net, cfg.oracle, limits)),
        pool_(sessions_.size()) {
    for (const Session& s : sessions_) {
      s.validate(net_);
      require_reachable(net_, s);
    }
    build_routes();
  }

  SimResult run() {
    const int E = net_.num_links();
    const std::size_t S = sessions_.size();
    prices_.assign(E, 0.0);
    announced_.assign(E, 0.0);
    view_.assign(S, std::vector<double>(E, 0.0));
    trees_.assign(S, Tree{});
    rates_.assign(S, 0.0);
    data_.assign(E, {});
    burst_index_.assign(S, {});
    burst_trees_.assign(S, {});
    delivered_.assign(S, std::deque<double>{});
    has_data_tree_ = false;

    SimResult out;
    for (long k = 0; k < cfg_.horizon_slots; ++k) {
      const double t = static_cast<double>(k) * cfg_.slot_s;
      control_bits_.assign(E, 0);
      forward_ = 0;
      feedback_ = 0;
      if (k > 0) push(t, kPriceUpdate, Event{});
      push(t, kDecision, Event{});
      slot_ = k;
      drain_until(t);
      SlotRecord rec;
      rec.slot = k;
      rec.prices = prices_;
      rec.rates = rates_;
      for (const Tree& tr : trees_) rec.tree_keys.push_back(key_string(tr.key()));
      rec.forward_bits = forward_;
      rec.feedback_bits = feedback_;
      run_data_plane(rec);
      // The tree and rate chosen now carry data in the next slot.
      data_trees_ = trees_;
      data_rates_ = rates_;
      has_data_tree_ = true;
      out.slots.push_back(std::move(rec));
    }
    out.final_prices = prices_;
    out.pool = pool_;
    out.max_staleness_s = max_delay_s_;
    return out;
  }

  const TreePool& pool() const { return pool_; }

 private:
  // Same-time events run in this order.
  enum Priority { kFeedbackArrival = 0, kPriceUpdate = 1, kDecision = 2, kSignalingArrival = 3 };

  struct Event {
    std::size_t session = 0;
    NodeId node = 0;
    double rate = 0.0;
    std::vector<std::pair<LinkId, int>> links;   // signaling: owned tree links and multiplicity
    std::vector<std::pair<LinkId, double>> prices;  // feedback
  };

  struct Queued {
    double time;
    int priority;
    std::uint64_t seq;
    std::shared_ptr<Event> ev;
    bool operator>(const Queued& o) const {
      if (time != o.time) return time > o.time;
      if (priority != o.priority) return priority > o.priority;
      return seq > o.seq;
    }
  };

  void push(double time, int priority, Event ev) {
    queue_.push(Queued{time, priority, seq_++, std::make_shared<Event>(std::move(ev))});
  }

  void drain_until(double t) {
    while (!queue_.empty() && queue_.top().time <= t) {
      Queued q = queue_.top();
      queue_.pop();
      switch (q.priority) {
        case kFeedbackArrival:
          for (auto [link, price] : q.ev->prices) view_[q.ev->session][link] = price;
          break;
        case kPriceUpdate:
          update_prices(q.time);
          break;
        case kDecision:
          decide(q.time);
          break;
        case kSignalingArrival:
          for (auto [link, mult] : q.ev->links) announced_[link] += q.ev->rate * mult;
          break;
        default:
          break;
      }
    }
  }

  // lambda_e <- [lambda_e - delta (c_e - r_e)]_+, then r_e <- 0 and every
  // node reports its outgoing prices to every source.
  void update_prices(double t) {
    const long k = slot_ - 1;
    for (LinkId e = 0; e < net_.num_links(); ++e) {
      const double delta = step_size(cfg_.step, k, e);
      prices_[e] = std::max(0.0, prices_[e] - delta * (net_.link(e).capacity - announced_[e]));
      announced_[e] = 0.0;
    }
    for (NodeId v = 0; v < net_.num_nodes(); ++v) {
      const auto& out = net_.out_links(v);
      if (out.empty()) continue;
      for (std::size_t s = 0; s < sessions_.size(); ++s) {
        Event ev;
        ev.session = s;
        ev.node = v;
        for (LinkId e : out) ev.prices.emplace_back(e, prices_[e]);
        const std::int64_t bits = packet_bits(feedback_bits(static_cast<std::int64_t>(out.size())));
        feedback_ += bits;
        const double arrive = t + send(v, sessions_[s].source, bits);
        push(arrive, kFeedbackArrival, std::move(ev));
      }
    }
  }

  // Each source prices (every pricing_interval slots), picks its local tree
  // and rate under its own view, then signals the nodes owning tree links.
  void decide(double t) {
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
      const Session& ss = sessions_[s];
      const auto costs = arc_costs(net_, view_[s]);
      if (slot_ % cfg_.pricing_interval == 0) {
        const Tree cand = oracle_->solve(ss, costs);
        maybe_admit(pool_, net_, ss, s, cand, costs, slot_);
      }
      Tree tree = local_min_cost_tree(pool_, s, costs).first;
      const double gamma = tree_cost_from_arcs(tree, costs);
      rates_[s] = rate_from_price(ss.utility, gamma, ss.min_rate, ss.max_rate);
      trees_[s] = std::move(tree);
    }
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
      std::map<NodeId, std::vector<std::pair<LinkId, int>>> owned;
      for (auto [link, mult] : link_usage(trees_[s], net_)) {
        owned[net_.link(link).tail].emplace_back(link, mult);
      }
      for (auto& [node, links] : owned) {
        Event ev;
        ev.session = s;
        ev.node = node;
        ev.rate = rates_[s];
        const std::int64_t bits = packet_bits(signaling_bits(static_cast<std::int64_t>(links.size())));
        ev.links = std::move(links);
        forward_ += bits;
        const double arrive = t + send(sessions_[s].source, node, bits);
        push(arrive, kSignalingArrival, std::move(ev));
      }
    }
  }

  std::int64_t packet_bits(std::int64_t format_bits) const {
    return cfg_.sizing == PacketSizing::kFormat ? format_bits : cfg_.fixed_packet_bits;
  }

  // Charges `bits` to every link on the control route and returns its delay.
  double send(NodeId from, NodeId to, std::int64_t bits) {
    if (from == to) return 0.0;
    const Route& r = routes_[from][to];
    for (LinkId e : r.links) control_bits_[e] += bits;
    return r.delay_s;
  }

  // Store-and-forward at burst level. A burst follows the tree it was sent
  // on. Every link keeps one queue per (session, tree, arc, hop); the
  // capacity left after control traffic is split across queues in
  // proportion to backlog. Bits served on a hop join the next hop one slot
  // later; bits reaching the head of an arc are counted for the receiver
  // there and replicated onto the node's outgoing arcs in the burst's tree.
  // Sources inject x * slot on their outgoing tree arcs.
  void run_data_plane(SlotRecord& rec) {
    const int E = net_.num_links();
    const std::size_t S = sessions_.size();
    std::vector<std::map<ClassKey, double>> arrivals(E);
    std::vector<std::map<NodeId, double>> got(S);
    auto forward = [&](int s, int tree, NodeId v, double bits) {
      const auto& kids = burst_trees_[s][tree].children;
      auto it = kids.find(v);
      if (it == kids.end()) return;
      for (ArcId a : it->second) arrivals[net_.arc(a).path.front()][ClassKey{s, tree, a, 0}] += bits;
    };

    for (LinkId e = 0; e < E; ++e) {
      auto& q = data_[e];
      if (q.empty()) continue;
      double queued = 0.0;
      for (const auto& [key, bits] : q) queued += bits;
      const double avail = std::max(0.0, net_.link(e).capacity * cfg_.rate_unit_bps * cfg_.slot_s -
                                             static_cast<double>(control_bits_[e]));
      const double share = queued > 0.0 ? std::min(1.0, avail / queued) : 0.0;
      for (auto it = q.begin(); it != q.end();) {
        const ClassKey key = it->first;
        const double served = share >= 1.0 ? it->second : it->second * share;
        it->second = share >= 1.0 ? 0.0 : it->second - served;
        const Arc& arc = net_.arc(key.arc);
        if (key.hop + 1 < static_cast<int>(arc.path.size())) {
          arrivals[arc.path[key.hop + 1]][ClassKey{key.session, key.tree, key.arc, key.hop + 1}] += served;
        } else {
          got[key.session][arc.head] += served;
          forward(key.session, key.tree, arc.head, served);
        }
        it = it->second > 0.0 ? std::next(it) : q.erase(it);
      }
    }
    if (has_data_tree_) {
      for (std::size_t s = 0; s < S; ++s) {
        const int tree = burst_tree(s, data_trees_[s]);
        forward(static_cast<int>(s), tree, sessions_[s].source,
                data_rates_[s] * cfg_.rate_unit_bps * cfg_.slot_s);
      }
    }
    double total = 0.0;
    double worst = 0.0;
    for (LinkId e = 0; e < E; ++e) {
      for (const auto& [key, bits] : arrivals[e]) data_[e][key] += bits;
      double left = 0.0;
      for (const auto& [key, bits] : data_[e]) left += bits;
      total += left;
      worst = std::max(worst, left);
    }
    rec.aggregate_backlog_bits = total;
    rec.max_link_backlog_bits = worst;

    rec.receiver_rates.assign(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      double bits = 0.0;
      for (NodeId r : sessions_[s].receivers) {
        auto it = got[s].find(r);
        if (it != got[s].end()) bits += it->second;
      }
      bits /= static_cast<double>(sessions_[s].receivers.size());
      auto& window = delivered_[s];
      window.push_back(bits);
      if (static_cast<int>(window.size()) > cfg_.receiver_window) window.pop_front();
      double sum = 0.0;
      for (double b : window) sum += b;
      rec.receiver_rates[s] =
          sum / (static_cast<double>(window.size()) * cfg_.slot_s * cfg_.rate_unit_bps);
    }
  }

  struct Route {
    std::vector<LinkId> links;
    double delay_s = 0.0;
  };

  // Hop-count shortest paths over the links. When no directed path exists,
  // links may be traversed against their direction (the control channel is
  // assumed bidirectional); ties go to the smaller link id.
  void build_routes() {
    const int n = net_.num_nodes();
    routes_.assign(n, std::vector<Route>(n));
    std::vector<std::vector<std::pair<NodeId, LinkId>>> fwd(n), both(n);
    for (LinkId e = 0; e < net_.num_links(); ++e) {
      const Link& l = net_.link(e);
      fwd[l.tail].emplace_back(l.head, e);
      both[l.tail].emplace_back(l.head, e);
      both[l.head].emplace_back(l.tail, e);
    }
    for (auto* adj : {&fwd, &both}) {
      for (auto& list : *adj) std::sort(list.begin(), list.end(), [](auto a, auto b) { return a.second < b.second; });
    }
    for (NodeId src = 0; src < n; ++src) {
      auto directed = bfs(src, fwd);
      auto loose = bfs(src, both);
      for (NodeId dst = 0; dst < n; ++dst) {
        if (dst == src) continue;
        Route r = directed[dst].second ? directed[dst].first : loose[dst].first;
        for (LinkId e : r.links) r.delay_s += net_.link(e).delay_ms / 1000.0;
        max_delay_s_ = std::max(max_delay_s_, r.delay_s);
        routes_[src][dst] = std::move(r);
      }
    }
  }

  std::vector<std::pair<Route, bool>> bfs(NodeId src,
                                          const std::vector<std::vector<std::pair<NodeId, LinkId>>>& adj) const {
    const int n = net_.num_nodes();
    std::vector<int> via(n, -1);
    std::vector<NodeId> prev(n, -1);
    std::vector<bool> seen(n, false);
    std::queue<NodeId> q;
    q.push(src);
    seen[src] = true;
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop();
      for (auto [v, e] : adj[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        via[v] = e;
        prev[v] = u;
        q.push(v);
      }
    }
    std::vector<std::pair<Route, bool>> out(n);
    for (NodeId v = 0; v < n; ++v) {
      out[v].second = seen[v];
      if (!seen[v] || v == src) continue;
      for (NodeId w = v; w != src; w = prev[w]) out[v].first.links.push_back(via[w]);
      std::reverse(out[v].first.links.begin(), out[v].first.links.end());
    }
    return out;
  }

  const Network& net_;
  std::vector<Session> sessions_;
  SimConfig cfg_;
  std::unique_ptr<TreeOracle> oracle_;
  TreePool pool_;

  std::priority_queue<Queued, std::vector<Queued>, std::greater<Queued>> queue_;
  std::uint64_t seq_ = 0;
  long slot_ = 0;

  std::vector<double> prices_;
  std::vector<double> announced_;          // r_e
  std::vector<std::vector<double>> view_;  // lambda-tilde per source
  std::vector<Tree> trees_;
  std::vector<double> rates_;
  std::vector<Tree> data_trees_;
  std::vector<double> data_rates_;
  bool has_data_tree_ = false;
  struct BurstTree {
    std::map<NodeId, std::vector<ArcId>> children;
  };

  int burst_tree(std::size_t s, const Tree& t) {
    auto [it, fresh] = burst_index_[s].try_emplace(t.key(), static_cast<int>(burst_trees_[s].size()));
    if (fresh) {
      BurstTree b;
      for (ArcId a : t.arcs) b.children[net_.arc(a).tail].push_back(a);
      burst_trees_[s].push_back(std::move(b));
    }
    return it->second;
  }

  std::vector<std::map<TreeKey, int>> burst_index_;
  std::vector<std::vector<BurstTree>> burst_trees_;

  struct ClassKey {
    int session;
    int tree;
    ArcId arc;
    int hop;
    auto operator<=>(const ClassKey&) const = default;
  };
  std::vector<std::map<ClassKey, double>> data_;  // per link
  std::vector<std::deque<double>> delivered_;
  std::vector<std::int64_t> control_bits_;
  std::int64_t forward_ = 0;
  std::int64_t feedback_ = 0;
  std::vector<std::vector<Route>> routes_;
  double max_delay_s_ = 0.0;
};

inline SimResult run_sim(const Network& net, const std::vector<Session>& sessions, const SimConfig& cfg,
                         EnumerationLimits limits = {}) {
  Simulator sim(net, sessions, cfg, limits);
  return sim.run();
}

}  // namespace mtpack

#endif  // MTPACK_SIMULATOR_HPP_
