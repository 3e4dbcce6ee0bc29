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


#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mtpack/instances.hpp"
#include "mtpack/report.hpp"
#include "mtpack/simulator.hpp"

namespace mtpack {
namespace {

TEST(Overhead, PublishedFigures) {
  const auto o = control_overhead(300, 3000, Rational(1, 2), Rational(100000000));
  EXPECT_EQ(o.forward_bits_per_slot, Rational(163200));
  EXPECT_EQ(o.feedback_bits_per_slot, Rational(249600));
  EXPECT_EQ(o.forward_bps, Rational(326400));
  EXPECT_EQ(o.feedback_bps, Rational(499200));
  EXPECT_EQ(o.fraction, Rational(8256, 1000000));
  EXPECT_EQ(format_decimal(o.fraction * 100), "0.8256");
  EXPECT_EQ(format_decimal(o.forward_bps / 1000), "326.4");
}

TEST(Overhead, SmallestCase) {
  const auto o = control_overhead(1, 1, Rational(1), Rational(1000));
  EXPECT_EQ(o.forward_bits_per_slot, Rational(256));
  EXPECT_EQ(o.feedback_bits_per_slot, Rational(256));
}

TEST(Overhead, ControlBitsIgnoreDataRate) {
  const auto a = control_overhead(50, 400, Rational(1), Rational(1000000));
  const auto b = control_overhead(50, 400, Rational(1), Rational(7000000));
  EXPECT_EQ(a.forward_bps, b.forward_bps);
  EXPECT_EQ(a.feedback_bps, b.feedback_bps);
  EXPECT_EQ(a.fraction, b.fraction * 7);
}

TEST(Overhead, RejectsBadArguments) {
  EXPECT_THROW(control_overhead(0, 1, Rational(1), Rational(1)), ConfigError);
  EXPECT_THROW(control_overhead(1, 1, Rational(0), Rational(1)), ConfigError);
  EXPECT_THROW(control_overhead(1, 1, Rational(1), Rational(-1)), ConfigError);
}

TEST(Overhead, PacketFormats) {
  EXPECT_EQ(signaling_bits(0), 160 + 32 + 32);
  EXPECT_EQ(signaling_bits(3), 160 + 32 + 32 + 96);
  EXPECT_EQ(feedback_bits(2), 160 + 32 + 128);
}

TEST(Rational, ParseAndFormat) {
  EXPECT_EQ(parse_rational("0.5"), Rational(1, 2));
  EXPECT_EQ(parse_rational("100e6"), Rational(100000000));
  EXPECT_EQ(parse_rational("1.25e-1"), Rational(1, 8));
  EXPECT_EQ(parse_rational("-3"), Rational(-3));
  EXPECT_THROW(parse_rational("abc"), ConfigError);
  EXPECT_EQ(format_decimal(Rational(1, 8)), "0.125");
  EXPECT_EQ(format_decimal(Rational(-7, 2)), "-3.5");
  EXPECT_EQ(format_decimal(Rational(12)), "12");
}

SimConfig toy_config() {
  SimConfig cfg;
  cfg.horizon_slots = 1000;
  cfg.pricing_interval = 1;
  cfg.oracle = OracleSpec::parse("exact");
  cfg.step = StepRule::diminishing(0.05, 0.6);
  return cfg;
}

TEST(Simulator, ZeroDelayMatchesSynchronousEngine) {
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  const auto cfg = toy_config();
  const auto sim = run_sim(inst.network, inst.sessions, cfg);
  ASSERT_EQ(sim.slots.size(), 1000u);
  ExactOracle oracle(inst.network);
  const auto provider = oracle_provider(oracle, inst.sessions);
  SubgradientEngine eng(inst.network, inst.sessions, cfg.step);
  eng.initialize(provider);
  for (long k = 0; k < 1000; ++k) {
    if (k > 0) eng.step(provider);
    const auto& rec = sim.slots[k];
    ASSERT_EQ(rec.rates, eng.rates()) << k;
    ASSERT_EQ(rec.prices, std::vector<double>(eng.prices().begin(), eng.prices().end())) << k;
    ASSERT_EQ(rec.tree_keys[0], key_string(eng.trees()[0].key())) << k;
  }
  EXPECT_DOUBLE_EQ(sim.max_staleness_s, 0.0);
}

TEST(Simulator, Deterministic) {
  std::mt19937_64 rng(2);
  IspOptions opt;
  opt.nodes = 12;
  opt.links = 30;
  const auto inst = isp_like(rng, opt);
  SimConfig cfg;
  cfg.horizon_slots = 200;
  cfg.pricing_interval = 5;
  cfg.oracle = OracleSpec::parse("approx:2");
  cfg.step = StepRule::diminishing(1e-5);
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    std::ostringstream os;
    write_sim_trace(os, inst.sessions, run_sim(inst.network, inst.sessions, cfg).slots);
    if (rep == 0) {
      first = os.str();
    } else {
      EXPECT_EQ(os.str(), first);
    }
  }
  EXPECT_EQ(first.substr(0, first.find('\n')),
            "slot,x_1,x_2,receiver_rate_1,receiver_rate_2,aggregate_backlog_bits,max_link_backlog_bits,"
            "control_forward_bits,control_feedback_bits");
}

TEST(Simulator, OverloadedLinkLedger) {
  // One link of 1 unit (1000 bits per 1 s slot); the source starts at its
  // maximum of 3 units, so the queue gains 3000 - 1000 bits every slot
  // until prices push the rate down.
  Network net;
  net.add_node("s");
  net.add_node("r");
  net.add_direct_link(0, 1, 1.0);
  Session s;
  s.id = 1;
  s.source = 0;
  s.receivers = {1};
  s.max_rate = 3.0;
  s.utility = UtilitySpec::log_shifted(1.0);
  SimConfig cfg;
  cfg.horizon_slots = 60;
  cfg.oracle = OracleSpec::parse("exact");
  cfg.step = StepRule::constant(1e-3);
  const auto sim = run_sim(net, {s}, cfg);
  EXPECT_DOUBLE_EQ(sim.slots[0].aggregate_backlog_bits, 0.0);
  for (long k = 1; k < 60; ++k) {
    EXPECT_DOUBLE_EQ(sim.slots[k].rates[0], 3.0) << k;
    EXPECT_NEAR(sim.slots[k].prices[0], 2e-3 * k, 1e-15) << k;
    EXPECT_DOUBLE_EQ(sim.slots[k].aggregate_backlog_bits, 3000.0 + 2000.0 * (k - 1)) << k;
    EXPECT_DOUBLE_EQ(sim.slots[k].max_link_backlog_bits, sim.slots[k].aggregate_backlog_bits);
  }
  // One slot to cross the link, then 1000 bits per slot arrive.
  EXPECT_DOUBLE_EQ(sim.slots[1].receiver_rates[0], 0.0);
  EXPECT_NEAR(sim.slots[2].receiver_rates[0], 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(sim.slots[11].receiver_rates[0], 1.0);
}

TEST(Simulator, ControlBitsFollowPacketFormats) {
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  auto cfg = toy_config();
  cfg.horizon_slots = 3;
  const auto sim = run_sim(inst.network, inst.sessions, cfg);
  // Slot 0: one signaling packet to node 1 carrying two links, no feedback.
  EXPECT_EQ(sim.slots[0].forward_bits, signaling_bits(2));
  EXPECT_EQ(sim.slots[0].feedback_bits, 0);
  // Slot 1: nodes 1 and 4 report 3 and 2 links.
  EXPECT_EQ(sim.slots[1].feedback_bits, feedback_bits(3) + feedback_bits(2));
  cfg.sizing = PacketSizing::kFixed;
  const auto fixed = run_sim(inst.network, inst.sessions, cfg);
  EXPECT_EQ(fixed.slots[1].feedback_bits, 2 * 3200);
}

TEST(Simulator, ConfigValidation) {
  SimConfig cfg;
  cfg.slot_s = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.pricing_interval = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.receiver_window = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Simulator, IspLikeBacklogSettles) {
  std::mt19937_64 rng(1);
  const auto inst = isp_like(rng);
  SimConfig cfg;
  cfg.slot_s = 1.0;
  cfg.horizon_slots = 4000;
  cfg.pricing_interval = 10;
  cfg.oracle = OracleSpec::parse("approx:2");
  cfg.step = StepRule::diminishing(1e-5);
  cfg.rate_unit_bps = 1000;
  const auto sim = run_sim(inst.network, inst.sessions, cfg);
  EXPECT_NEAR(sim.max_staleness_s, 0.1 * std::ceil(sim.max_staleness_s / 0.1 - 1e-9), 1e-9);
  EXPECT_GT(sim.max_staleness_s, 0.1);

  const long n = cfg.horizon_slots;
  const long q = n / 4;
  const double start = sim.slots[n - q].aggregate_backlog_bits;
  const double end = sim.slots[n - 1].aggregate_backlog_bits;
  ASSERT_GT(start, 0.0);
  EXPECT_LT((end - start) / start / static_cast<double>(q - 1), 1e-3);

  // Source rates settle: the last two quarters agree within 5%.
  for (std::size_t s = 0; s < inst.sessions.size(); ++s) {
    double third = 0, last = 0;
    for (long k = n - 2 * q; k < n - q; ++k) third += sim.slots[k].rates[s];
    for (long k = n - q; k < n; ++k) last += sim.slots[k].rates[s];
    EXPECT_NEAR(last / third, 1.0, 0.05) << s;
    // Receivers get close to what the source sends.
    EXPECT_NEAR(sim.slots[n - 1].receiver_rates[s] / (last / q), 1.0, 0.25) << s;
  }

  // Control bits per slot stay under the per-source bounds.
  const auto bound = control_overhead(inst.network.num_nodes(), inst.network.num_links(), Rational(1),
                                      Rational(1));
  const auto S = static_cast<std::int64_t>(inst.sessions.size());
  for (const auto& rec : sim.slots) {
    ASSERT_LE(Rational(rec.forward_bits), bound.forward_bits_per_slot * S);
    ASSERT_LE(Rational(rec.feedback_bits), bound.feedback_bits_per_slot * S);
  }
}

}  // namespace
}  // namespace mtpack
