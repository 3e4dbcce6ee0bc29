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

// mtpack command-line front end: solve, simulate, certify, gen.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "mtpack/bounds.hpp"
#include "mtpack/colgen.hpp"
#include "mtpack/instances.hpp"
#include "mtpack/report.hpp"
#include "mtpack/scenario.hpp"
#include "mtpack/simulator.hpp"

namespace {

using namespace mtpack;

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kRefused = 4 };

// Flags shared by solve, simulate and certify; unset flags keep the
// scenario's values.
struct Overrides {
  std::optional<double> scale;
  std::optional<std::string> mode;
  std::optional<long> delta;
  std::optional<std::string> oracle;
  std::optional<std::string> step;
  std::optional<long> iterations;
  std::optional<long> average_from;
  std::optional<long> trace_every;
  bool stop_on_convergence = false;
  bool restart_average = false;

  void attach(CLI::App* app) {
    app->add_option("--scale", scale, "Receiver scale for profile scenarios, in (0, 1]");
    app->add_option("--mode", mode, "separate or universal");
    app->add_option("--delta", delta, "Subgradient steps between pricing rounds");
    app->add_option("--oracle", oracle, "exact, arborescence or approx[:level]");
    app->add_option("--step", step, "constant:<d> or diminishing:<d0>[:<decay>]");
    app->add_option("--iterations", iterations, "Iteration budget");
    app->add_option("--average-from", average_from, "First iteration of the averaging window");
    app->add_option("--trace-every", trace_every, "Trace sampling period (0 disables)");
    app->add_flag("--stop-on-convergence", stop_on_convergence, "Stop once the gap criteria hold");
    app->add_flag("--restart-average", restart_average, "Restart averages after each admission");
  }

  void apply(Scenario& sc) const {
    if (scale) sc.scale = *scale;
    if (mode) sc.mode = parse_swarm_mode(*mode);
    if (delta) sc.solver.pricing_interval = sc.sim.pricing_interval = *delta;
    if (oracle) sc.solver.oracle = sc.sim.oracle = OracleSpec::parse(*oracle);
    if (step) sc.solver.step = sc.sim.step = StepRule::parse(*step);
    if (iterations) sc.solver.max_iterations = *iterations;
    if (average_from) sc.solver.average_from = *average_from;
    if (trace_every) sc.solver.trace_every = *trace_every;
    if (stop_on_convergence) sc.solver.stop_on_convergence = true;
    if (restart_average) sc.solver.restart_average_on_admission = true;
    sc.solver.validate();
    sc.sim.validate();
  }
};

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + (std::filesystem::path(dir) / name).string());
  out << text;
}

std::string config_echo(const std::string& path, const Scenario& sc, const Instance& inst) {
  std::ostringstream os;
  os << "scenario: " << path << "\n";
  if (sc.profile) os << "profile: " << *sc.profile << " scale " << fmt(sc.scale) << "\n";
  os << "mode: " << to_string(sc.mode) << "\n";
  os << "nodes: " << inst.network.num_nodes() << " links: " << inst.network.num_links()
     << " arcs: " << inst.network.num_arcs() << "\n";
  os << "oracle: " << sc.solver.oracle.name() << "\n";
  os << "pricing_interval: " << sc.solver.pricing_interval << "\n";
  os << "step: " << sc.solver.step.to_string() << "\n";
  os << "iterations: " << sc.solver.max_iterations << " average_from: " << sc.solver.average_from << "\n";
  return os.str();
}

std::string solution_text(const Instance& inst, const ColGenResult& r) {
  std::ostringstream os;
  os << "iterations_used: " << r.iterations << "\n";
  os << "converged: " << (r.converged ? "yes" : "no") << "\n";
  os << "primal: " << fmt(r.primal) << "\n";
  os << "dual: " << fmt(r.dual) << "\n";
  os << "gap: " << fmt(r.gap) << "\n";
  os << "max_violation: " << fmt(r.max_violation) << "\n";
  os << "pool_size: " << r.pool.size() << "\n";
  for (std::size_t s = 0; s < inst.sessions.size(); ++s) {
    const Session& ss = inst.sessions[s];
    os << "session " << ss.id << ": x=" << fmt(r.average_rates[s]) << " q=" << r.pool.size(s);
    if (r.average_rates[s] <= ss.min_rate) os << " at_min_rate";
    os << "\n";
  }
  return os.str();
}

std::string certificate_text(const Certificate& c) {
  std::ostringstream os;
  os << "certificate:\n";
  os << "  rho: " << fmt(c.rho) << (c.certifying ? "" : " (non-certifying global oracle)") << "\n";
  os << "  restricted_dual: " << fmt(c.restricted_dual) << "\n";
  if (c.has_reference) {
    os << "  optimum: [" << fmt(c.optimum_lower) << ", " << fmt(c.optimum_upper) << "]\n";
  }
  os << "  scaled_global_dual: " << fmt(c.scaled_global_dual) << "\n";
  os << "  rho_restricted_dual: " << fmt(c.rho_restricted_dual) << "\n";
  os << "  primal: " << fmt(c.primal) << "\n";
  os << "  lower: " << (c.lower_ok ? "ok" : "VIOLATED") << "\n";
  os << "  middle: " << (c.middle_ok ? "ok" : "VIOLATED") << "\n";
  os << "  upper: " << (c.upper_ok ? "ok" : "VIOLATED") << "\n";
  os << "  primal_bracket: " << (c.primal_ok ? "ok" : "VIOLATED") << "\n";
  if (c.rho == 1.0 && c.has_reference) {
    const double spread = std::max({std::abs(c.restricted_dual - c.optimum_upper),
                                    std::abs(c.scaled_global_dual - c.optimum_upper)}) /
                          std::max(1.0, std::abs(c.optimum_upper));
    os << "  equalities: " << (spread <= c.convergence_tolerance ? "yes" : "no") << " (spread "
       << fmt(spread) << ")\n";
  }
  for (int id : c.sessions_at_min_rate) os << "  flag: session " << id << " converged at its minimum rate\n";
  os << "verdict: " << (c.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

struct Loaded {
  Scenario scenario;
  Instance instance;
};

Loaded load(const std::string& path, const Overrides& ov) {
  Loaded l;
  l.scenario = load_scenario(path);
  ov.apply(l.scenario);
  l.instance = l.scenario.build();
  return l;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_solve(const std::string& path, const Overrides& ov, const std::string& out_dir, bool certify) {
  const auto t0 = std::chrono::steady_clock::now();
  Loaded l = load(path, ov);
  const Instance& inst = l.instance;
  ColGenResult r = colgen_run(inst.network, inst.sessions, l.scenario.solver);
  std::string report = config_echo(path, l.scenario, inst) + solution_text(inst, r);
  std::ostringstream trace, admissions;
  write_iteration_trace(trace, inst.sessions, r.trace);
  write_admission_log(admissions, inst.network, r.pool);
  if (certify) {
    auto pricing = make_oracle(inst.network, l.scenario.solver.oracle);
    double rho = 1.0;
    for (const Session& s : inst.sessions) rho = std::max(rho, pricing->ratio(s));
    ExactOracle exact(inst.network);
    const auto reference = exact_reference(inst.network, inst.sessions);
    const Certificate c =
        sandwich(inst.network, inst.sessions, r.pool, r.certified_prices, r.average_rates, rho, exact, &reference);
    report += certificate_text(c);
  }
  report += "elapsed_s: " + fmt(seconds_since(t0)) + "\n";
  std::cout << report;
  write_file(out_dir, "report.txt", report);
  write_file(out_dir, "trace.csv", trace.str());
  write_file(out_dir, "admissions.csv", admissions.str());
  return kOk;
}

int cmd_simulate(const std::optional<std::string>& path, const Overrides& ov, const std::string& out_dir,
                 const std::vector<std::string>& overhead, const std::string& data_rate,
                 std::optional<long> slots, std::optional<double> slot_s, std::optional<std::string> packet) {
  if (!overhead.empty()) {
    if (overhead.size() != 3) throw ConfigError("--overhead-only takes N M SLOT_S");
    const auto o = control_overhead(std::stoll(overhead[0]), std::stoll(overhead[1]), parse_rational(overhead[2]),
                                     parse_rational(data_rate));
    std::cout << "forward_bits_per_slot: " << format_decimal(o.forward_bits_per_slot) << "\n"
              << "feedback_bits_per_slot: " << format_decimal(o.feedback_bits_per_slot) << "\n"
              << "forward_kbps: " << format_decimal(o.forward_bps / 1000) << "\n"
              << "feedback_kbps: " << format_decimal(o.feedback_bps / 1000) << "\n"
              << "overhead_percent: " << format_decimal(o.fraction * 100) << "\n";
    return kOk;
  }
  if (!path) throw ConfigError("simulate needs a scenario or --overhead-only");
  Loaded l = load(*path, ov);
  SimConfig cfg = l.scenario.sim;
  if (slots) cfg.horizon_slots = *slots;
  if (slot_s) cfg.slot_s = *slot_s;
  if (packet) {
    if (*packet == "format") {
      cfg.sizing = PacketSizing::kFormat;
    } else {
      cfg.sizing = PacketSizing::kFixed;
      cfg.fixed_packet_bits = std::stoll(*packet) * 8;
    }
  }
  const SimResult r = run_sim(l.instance.network, l.instance.sessions, cfg);
  std::ostringstream trace;
  write_sim_trace(trace, l.instance.sessions, r.slots);
  const SlotRecord& last = r.slots.back();
  std::cout << "slots: " << r.slots.size() << "\n";
  for (std::size_t s = 0; s < l.instance.sessions.size(); ++s) {
    std::cout << "session " << l.instance.sessions[s].id << ": x=" << fmt(last.rates[s])
              << " receiver_rate=" << fmt(last.receiver_rates[s]) << "\n";
  }
  std::cout << "aggregate_backlog_bits: " << fmt(last.aggregate_backlog_bits) << "\n";
  std::cout << "max_control_delay_s: " << fmt(r.max_staleness_s) << "\n";
  write_file(out_dir, "sim_trace.csv", trace.str());
  return kOk;
}

int cmd_certify(const std::string& path, const Overrides& ov, const std::string& out_dir,
                std::optional<double> rho_flag, bool no_exact) {
  Loaded l = load(path, ov);
  const Instance& inst = l.instance;
  require_nonnegative_intercepts(inst.sessions);
  ColGenResult r = colgen_run(inst.network, inst.sessions, l.scenario.solver);
  auto pricing = make_oracle(inst.network, l.scenario.solver.oracle);
  double rho = 1.0;
  for (const Session& s : inst.sessions) rho = std::max(rho, pricing->ratio(s));
  if (rho_flag) rho = *rho_flag;

  std::optional<ReferenceSolution> reference;
  std::unique_ptr<TreeOracle> global;
  if (no_exact) {
    global = make_oracle(inst.network, OracleSpec::parse("approx:2"));
  } else {
    reference = exact_reference(inst.network, inst.sessions);  // throws past the guard
    global = std::make_unique<ExactOracle>(inst.network);
  }
  Certificate c = sandwich(inst.network, inst.sessions, r.pool, r.certified_prices, r.average_rates, rho, *global,
                           reference ? &*reference : nullptr);
  std::string text = config_echo(path, l.scenario, inst) + solution_text(inst, r) + certificate_text(c);
  std::cout << text;
  std::ostringstream row;
  write_certificate(row, c);
  write_file(out_dir, "certificate.txt", text);
  write_file(out_dir, "certificate.csv", row.str());
  return c.passed() ? kOk : kRefused;
}

int cmd_gen(std::uint64_t seed, int count, const RandomInstanceOptions& opt, const std::string& out_dir) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const Instance inst = random_instance(rng, opt);
    std::string text = "# random instance " + std::to_string(i) + ", seed " + std::to_string(seed) + "\n" +
                       format_scenario(inst);
    if (out_dir.empty()) {
      std::cout << text << (i + 1 < count ? "\n" : "");
    } else {
      char name[32];
      std::snprintf(name, sizeof name, "random_%03d.scn", i);
      write_file(out_dir, name, text);
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicast tree packing: rate allocation, simulation and certification"};
  app.require_subcommand(1);

  Overrides solve_ov, sim_ov, cert_ov;
  std::string solve_path, solve_out, sim_out, cert_path, cert_out, gen_out;
  std::optional<std::string> sim_path;
  bool solve_certify = false;

  auto* solve = app.add_subcommand("solve", "Run column generation on a scenario");
  solve->add_option("scenario", solve_path, "Scenario file")->required();
  solve->add_option("--out", solve_out, "Directory for report.txt, trace.csv, admissions.csv");
  solve->add_flag("--certify", solve_certify, "Append an exact-reference certificate");
  solve_ov.attach(solve);

  std::vector<std::string> overhead;
  std::string data_rate = "100e6";
  std::optional<long> slots;
  std::optional<double> slot_s;
  std::optional<std::string> packet;
  auto* simulate = app.add_subcommand("simulate", "Replay the distributed protocol");
  simulate->add_option("scenario", sim_path, "Scenario file");
  simulate->add_option("--out", sim_out, "Directory for sim_trace.csv");
  simulate->add_option("--overhead-only", overhead, "N M SLOT_S: print control overhead and exit")->expected(3);
  simulate->add_option("--data-rate", data_rate, "Data rate in bit/s for --overhead-only");
  simulate->add_option("--slots", slots, "Horizon in slots");
  simulate->add_option("--slot-s", slot_s, "Slot length in seconds");
  simulate->add_option("--packet", packet, "Control packet size: format or <bytes>");
  sim_ov.attach(simulate);

  std::optional<double> rho;
  bool no_exact = false;
  auto* certify = app.add_subcommand("certify", "Check the approximation chain at the converged prices");
  certify->add_option("scenario", cert_path, "Scenario file")->required();
  certify->add_option("--out", cert_out, "Directory for certificate.txt and certificate.csv");
  certify->add_option("--rho", rho, "Approximation ratio (default: the oracle's bound)");
  certify->add_flag("--no-exact", no_exact, "Skip the exact reference (non-certifying)");
  cert_ov.attach(certify);

  std::uint64_t seed = 1;
  int count = 1;
  RandomInstanceOptions gen_opt;
  auto* gen = app.add_subcommand("gen", "Write seeded random instances as scenarios");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--count", count, "Number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--min-nodes", gen_opt.min_nodes, "Smallest node count");
  gen->add_option("--max-nodes", gen_opt.max_nodes, "Largest node count");
  gen->add_option("--sessions", gen_opt.max_sessions, "Largest session count");
  gen->add_option("--receivers", gen_opt.max_receivers, "Largest receiver count");
  gen->add_option("--arc-probability", gen_opt.arc_probability, "Probability of each directed link");
  gen->add_option("--out", gen_out, "Directory for random_NNN.scn (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(solve_path, solve_ov, solve_out, solve_certify);
    if (*simulate) return cmd_simulate(sim_path, sim_ov, sim_out, overhead, data_rate, slots, slot_s, packet);
    if (*certify) return cmd_certify(cert_path, cert_ov, cert_out, rho, no_exact);
    if (*gen) return cmd_gen(seed, count, gen_opt, gen_out);
  } catch (const RefusedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRefused;
  } catch (const ScaleExceededError& e) {
    std::cerr << "error: refused: " << e.what() << " (use --no-exact)\n";
    return kRefused;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
