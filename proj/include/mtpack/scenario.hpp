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

#ifndef MTPACK_SCENARIO_HPP_
#define MTPACK_SCENARIO_HPP_

// Line-based scenario files.
//
//   # comment
//   profile A1                      built-in two-session profile
//   scale 0.1
//   mode universal | separate
//   node a b c                      custom topology
//   link a b 10 [delay_ms]
//   session 1 a b,c [min=0] [max=10] [utility=log|iso] [weight=1] [beta=0.5] [shift=2.718]
//   pricing_interval 1
//   oracle exact | arborescence | approx[:i]
//   step constant:1e-3 | diminishing:1e-2[:0.5]
//   iterations 20000
//   average_from 10000
//   slot_s 1
//   horizon_slots 1000
//   packet format | <bytes>
//
// A scenario holds either a profile or a custom topology, not both.

#include <charconv>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mtpack/colgen.hpp"
#include "mtpack/core.hpp"
#include "mtpack/instances.hpp"
#include "mtpack/network.hpp"
#include "mtpack/simulator.hpp"
#include "mtpack/utility.hpp"

namespace mtpack {

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& where, int line, const std::string& what)
      : ConfigError(where + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct LinkDecl {
  std::string tail, head;
  double capacity = 0.0;
  double delay_ms = 0.0;
  int line = 0;
};

struct SessionDecl {
  int id = 0;
  std::string source;
  std::vector<std::string> receivers;
  double min_rate = 0.0;
  double max_rate = 0.0;  // 0: sum of the source's outgoing capacities
  UtilitySpec utility;
  int line = 0;
};

struct Scenario {
  std::string origin = "<scenario>";
  std::optional<std::string> profile;
  double scale = 1.0;
  SwarmMode mode = SwarmMode::kUniversal;
  double access_delay_ms = 0.0;
  double utility_weight = 1.0;
  double max_rate_factor = 1.0;
  std::vector<std::string> nodes;
  std::vector<LinkDecl> links;
  std::vector<SessionDecl> sessions;
  ColGenConfig solver;
  SimConfig sim;

  // Materializes the network and sessions. Separate mode keeps, for custom
  // topologies, only links joining two members of the same session and
  // requires sessions to be node-disjoint.
  Instance build() const {
    if (profile) {
      ProfileSpec spec = builtin_profile(*profile);
      spec.mode = mode;
      spec.access_delay_ms = access_delay_ms;
      spec.utility_weight = utility_weight;
      spec.max_rate_factor = max_rate_factor;
      BuiltNetwork b = build_profile(spec, scale);
      return Instance{std::move(b.network), std::move(b.sessions)};
    }
    Instance inst;
    Network& net = inst.network;
    std::map<std::string, NodeId> ids;
    for (const std::string& n : nodes) ids[n] = net.add_node(n);
    auto node = [&](const std::string& label, int line) {
      auto it = ids.find(label);
      if (it == ids.end()) throw ParseError(origin, line, "unknown node '" + label + "'");
      return it->second;
    };
    std::vector<std::set<NodeId>> members;
    for (const SessionDecl& d : sessions) {
      std::set<NodeId> m{node(d.source, d.line)};
      for (const auto& r : d.receivers) m.insert(node(r, d.line));
      members.push_back(std::move(m));
    }
    if (mode == SwarmMode::kSeparate) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          for (NodeId v : members[a]) {
            if (members[b].count(v)) {
              throw ParseError(origin, sessions[b].line,
                               "separate mode needs node-disjoint sessions; '" + net.label(v) +
                                   "' is shared");
            }
          }
        }
      }
    }
    for (const LinkDecl& l : links) {
      const NodeId t = node(l.tail, l.line);
      const NodeId h = node(l.head, l.line);
      if (mode == SwarmMode::kSeparate) {
        bool inside = false;
        for (const auto& m : members) inside = inside || (m.count(t) && m.count(h));
        if (!inside) continue;
      }
      try {
        net.add_direct_link(t, h, l.capacity, l.delay_ms);
      } catch (const ConfigError& e) {
        throw ParseError(origin, l.line, e.what());
      }
    }
    for (const SessionDecl& d : sessions) {
      Session s;
      s.id = d.id;
      s.source = node(d.source, d.line);
      for (const auto& r : d.receivers) s.receivers.push_back(node(r, d.line));
      std::sort(s.receivers.begin(), s.receivers.end());
      s.min_rate = d.min_rate;
      s.max_rate = d.max_rate;
      if (s.max_rate <= 0.0) {
        double out = 0.0;
        for (LinkId e : net.out_links(s.source)) out += net.link(e).capacity;
        s.max_rate = out > 0.0 ? out : 1.0;
      }
      s.utility = d.utility;
      try {
        s.validate(net);
        require_reachable(net, s);
      } catch (const ConfigError& e) {
        throw ParseError(origin, d.line, e.what());
      } catch (const InfeasibleError& e) {
        throw InfeasibleError(origin + ":" + std::to_string(d.line) + ": " + e.what());
      }
      inst.sessions.push_back(std::move(s));
    }
    if (inst.sessions.empty()) throw ParseError(origin, 0, "scenario declares no sessions");
    return inst;
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in, const std::string& origin = "<scenario>") {
  Scenario sc;
  sc.origin = origin;
  std::string raw;
  int line = 0;
  std::set<std::string> seen_nodes;
  std::set<int> seen_sessions;
  auto fail = [&](const std::string& what) { throw ParseError(origin, line, what); };
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      fail("expected a number, got '" + text + "'");
    }
    if (used != text.size()) fail("expected a number, got '" + text + "'");
    return v;
  };
  auto integer = [&](const std::string& text) {
    const double v = number(text);
    if (v != std::floor(v) || std::abs(v) > 9e15) fail("expected an integer, got '" + text + "'");
    return static_cast<long>(v);
  };
  auto boolean = [&](const std::string& text) {
    if (text == "yes" || text == "true" || text == "1") return true;
    if (text == "no" || text == "false" || text == "0") return false;
    fail("expected yes or no, got '" + text + "'");
    return false;
  };

  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (tok.size() - 1 < lo || tok.size() - 1 > hi) {
        fail("'" + key + "' takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi)) +
             " argument(s)");
      }
    };
    try {
      if (key == "profile") {
        arity(1, 1);
        builtin_profile(tok[1]);
        sc.profile = tok[1];
      } else if (key == "scale") {
        arity(1, 1);
        sc.scale = number(tok[1]);
        if (!(sc.scale > 0.0) || sc.scale > 1.0) fail("scale must lie in (0, 1]");
      } else if (key == "mode") {
        arity(1, 1);
        sc.mode = parse_swarm_mode(tok[1]);
      } else if (key == "access_delay_ms") {
        arity(1, 1);
        sc.access_delay_ms = number(tok[1]);
      } else if (key == "utility_weight") {
        arity(1, 1);
        sc.utility_weight = number(tok[1]);
      } else if (key == "max_rate_factor") {
        arity(1, 1);
        sc.max_rate_factor = number(tok[1]);
      } else if (key == "node") {
        arity(1, 1u << 20);
        for (std::size_t i = 1; i < tok.size(); ++i) {
          if (!seen_nodes.insert(tok[i]).second) fail("duplicate node '" + tok[i] + "'");
          sc.nodes.push_back(tok[i]);
        }
      } else if (key == "link") {
        arity(3, 4);
        LinkDecl l;
        l.tail = tok[1];
        l.head = tok[2];
        l.capacity = number(tok[3]);
        if (tok.size() == 5) l.delay_ms = number(tok[4]);
        if (!(l.capacity > 0)) fail("link capacity must be positive");
        if (l.delay_ms < 0) fail("link delay must be >= 0");
        if (!seen_nodes.count(l.tail)) fail("unknown node '" + l.tail + "'");
        if (!seen_nodes.count(l.head)) fail("unknown node '" + l.head + "'");
        l.line = line;
        sc.links.push_back(l);
      } else if (key == "session") {
        arity(3, 9);
        SessionDecl d;
        d.line = line;
        d.id = static_cast<int>(integer(tok[1]));
        if (!seen_sessions.insert(d.id).second) fail("duplicate session id " + tok[1]);
        d.source = tok[2];
        d.receivers = detail::split(tok[3], ',');
        if (d.receivers.empty()) fail("session needs at least one receiver");
        for (const auto& n : d.receivers) {
          if (!seen_nodes.count(n)) fail("unknown node '" + n + "'");
        }
        if (!seen_nodes.count(d.source)) fail("unknown node '" + d.source + "'");
        std::string kind = "log";
        double weight = 1.0, beta = 0.5, shift = std::numbers::e;
        for (std::size_t i = 4; i < tok.size(); ++i) {
          const auto eq = tok[i].find('=');
          if (eq == std::string::npos) fail("expected key=value, got '" + tok[i] + "'");
          const std::string k = tok[i].substr(0, eq), v = tok[i].substr(eq + 1);
          if (k == "min") d.min_rate = number(v);
          else if (k == "max") d.max_rate = number(v);
          else if (k == "utility") kind = v;
          else if (k == "weight") weight = number(v);
          else if (k == "beta") beta = number(v);
          else if (k == "shift") shift = number(v);
          else fail("unknown session attribute '" + k + "'");
        }
        if (kind == "log") d.utility = UtilitySpec::log_shifted(weight, shift);
        else if (kind == "iso") d.utility = UtilitySpec::isoelastic(weight, beta);
        else fail("utility must be log or iso, got '" + kind + "'");
        d.utility.validate();
        sc.sessions.push_back(std::move(d));
      } else if (key == "pricing_interval") {
        arity(1, 1);
        sc.solver.pricing_interval = sc.sim.pricing_interval = integer(tok[1]);
      } else if (key == "oracle") {
        arity(1, 1);
        sc.solver.oracle = sc.sim.oracle = OracleSpec::parse(tok[1]);
      } else if (key == "step") {
        arity(1, 1);
        sc.solver.step = sc.sim.step = StepRule::parse(tok[1]);
      } else if (key == "iterations") {
        arity(1, 1);
        sc.solver.max_iterations = integer(tok[1]);
      } else if (key == "average_from") {
        arity(1, 1);
        sc.solver.average_from = integer(tok[1]);
      } else if (key == "stop_on_convergence") {
        arity(1, 1);
        sc.solver.stop_on_convergence = boolean(tok[1]);
      } else if (key == "restart_average_on_admission") {
        arity(1, 1);
        sc.solver.restart_average_on_admission = boolean(tok[1]);
      } else if (key == "trace_every") {
        arity(1, 1);
        sc.solver.trace_every = integer(tok[1]);
      } else if (key == "slot_s") {
        arity(1, 1);
        sc.sim.slot_s = number(tok[1]);
      } else if (key == "horizon_slots") {
        arity(1, 1);
        sc.sim.horizon_slots = integer(tok[1]);
      } else if (key == "rate_unit_bps") {
        arity(1, 1);
        sc.sim.rate_unit_bps = number(tok[1]);
      } else if (key == "receiver_window") {
        arity(1, 1);
        sc.sim.receiver_window = static_cast<int>(integer(tok[1]));
      } else if (key == "packet") {
        arity(1, 1);
        if (tok[1] == "format") {
          sc.sim.sizing = PacketSizing::kFormat;
        } else {
          sc.sim.sizing = PacketSizing::kFixed;
          sc.sim.fixed_packet_bits = integer(tok[1]) * 8;
        }
      } else {
        fail("unknown directive '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  if (sc.profile && (!sc.nodes.empty() || !sc.sessions.empty())) {
    throw ParseError(origin, line, "a scenario uses either a profile or a custom topology");
  }
  if (!sc.profile && sc.sessions.empty()) throw ParseError(origin, line, "scenario declares no sessions");
  try {
    sc.solver.validate();
    sc.sim.validate();
  } catch (const ConfigError& e) {
    throw ParseError(origin, line, e.what());
  }
  return sc;
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<scenario>") {
  std::istringstream in(text);
  return parse_scenario(in, origin);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  return parse_scenario(in, path);
}

// Writes an instance back as a custom-topology scenario.
inline std::string format_scenario(const Instance& inst, SwarmMode mode = SwarmMode::kUniversal) {
  auto num = [](double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, end) : std::string("nan");
  };
  std::ostringstream out;
  const Network& net = inst.network;
  out << "mode " << to_string(mode) << "\n";
  out << "node";
  for (NodeId v = 0; v < net.num_nodes(); ++v) out << ' ' << net.label(v);
  out << "\n";
  for (LinkId e = 0; e < net.num_links(); ++e) {
    const Link& l = net.link(e);
    out << "link " << net.label(l.tail) << ' ' << net.label(l.head) << ' ' << num(l.capacity);
    if (l.delay_ms > 0) out << ' ' << num(l.delay_ms);
    out << "\n";
  }
  for (const Session& s : inst.sessions) {
    out << "session " << s.id << ' ' << net.label(s.source) << ' ';
    for (std::size_t i = 0; i < s.receivers.size(); ++i) out << (i ? "," : "") << net.label(s.receivers[i]);
    out << " min=" << num(s.min_rate) << " max=" << num(s.max_rate);
    if (s.utility.kind == UtilityKind::kLogShifted) {
      out << " utility=log weight=" << num(s.utility.weight);
      if (s.utility.shift != std::numbers::e) out << " shift=" << num(s.utility.shift);
    } else {
      out << " utility=iso weight=" << num(s.utility.weight) << " beta=" << num(s.utility.beta);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mtpack

#endif  // MTPACK_SCENARIO_HPP_
