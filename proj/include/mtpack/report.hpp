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

#ifndef MTPACK_REPORT_HPP_
#define MTPACK_REPORT_HPP_

// CSV emission. Numbers use the shortest representation that round-trips,
// so identical runs give byte-identical files.

#include <charconv>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mtpack/bounds.hpp"
#include "mtpack/colgen.hpp"
#include "mtpack/network.hpp"
#include "mtpack/optimizer.hpp"
#include "mtpack/simulator.hpp"
#include "mtpack/tree.hpp"

namespace mtpack {

inline std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

inline void write_iteration_trace(std::ostream& os, const std::vector<Session>& sessions,
                                  std::span<const IterationRecord> trace) {
  os << "k,primal,dual";
  for (const Session& s : sessions) os << ",x_" << s.id;
  os << ",max_violation";
  for (const Session& s : sessions) os << ",tree_" << s.id;
  os << "\n";
  for (const IterationRecord& r : trace) {
    os << r.k << ',' << fmt(r.primal) << ',' << fmt(r.dual);
    for (double x : r.rates) os << ',' << fmt(x);
    os << ',' << fmt(r.max_violation);
    for (const std::string& t : r.tree_edges) os << ',' << t;
    os << "\n";
  }
}

inline void write_admission_log(std::ostream& os, const Network& net, const TreePool& pool) {
  os << "iteration,session,tree,cost,q\n";
  for (const AdmissionEvent& ev : pool.log()) {
    Tree t;
    t.session = ev.session;
    t.arcs = ev.key;
    os << ev.iteration << ',' << t.session << ',' << edge_string(net, t) << ',' << fmt(ev.cost) << ','
       << ev.pool_size << "\n";
  }
}

inline void write_sim_trace(std::ostream& os, const std::vector<Session>& sessions,
                            std::span<const SlotRecord> slots) {
  os << "slot";
  for (const Session& s : sessions) os << ",x_" << s.id;
  for (const Session& s : sessions) os << ",receiver_rate_" << s.id;
  os << ",aggregate_backlog_bits,max_link_backlog_bits,control_forward_bits,control_feedback_bits\n";
  for (const SlotRecord& r : slots) {
    os << r.slot;
    for (double x : r.rates) os << ',' << fmt(x);
    for (double x : r.receiver_rates) os << ',' << fmt(x);
    os << ',' << fmt(r.aggregate_backlog_bits) << ',' << fmt(r.max_link_backlog_bits) << ','
       << r.forward_bits << ',' << r.feedback_bits << "\n";
  }
}

inline void write_certificate(std::ostream& os, const Certificate& c, bool header = true) {
  if (header) {
    os << "rho,restricted_dual,optimum_lower,optimum_upper,scaled_global_dual,rho_restricted_dual,"
          "primal,certifying,lower_ok,middle_ok,upper_ok,primal_ok,passed\n";
  }
  auto yn = [](bool b) { return b ? "1" : "0"; };
  os << fmt(c.rho) << ',' << fmt(c.restricted_dual) << ','
     << (c.has_reference ? fmt(c.optimum_lower) : std::string()) << ','
     << (c.has_reference ? fmt(c.optimum_upper) : std::string()) << ',' << fmt(c.scaled_global_dual) << ','
     << fmt(c.rho_restricted_dual) << ',' << fmt(c.primal) << ',' << yn(c.certifying) << ','
     << yn(c.lower_ok) << ',' << yn(c.middle_ok) << ',' << yn(c.upper_ok) << ',' << yn(c.primal_ok) << ','
     << yn(c.passed()) << "\n";
}

}  // namespace mtpack

#endif  // MTPACK_REPORT_HPP_
