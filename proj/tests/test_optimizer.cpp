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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mtpack/bounds.hpp"
#include "mtpack/instances.hpp"
#include "mtpack/optimizer.hpp"
#include "mtpack/oracle.hpp"

namespace mtpack {
namespace {

// Best sum of tree rates on the relay toy by grid search over the four
// trees' rates, independent of any solver.
double toy_grid_optimum() {
  // Loads per link: l0 = A+B, l1 = A+C, l2 = B+C+D, l3 = C+D, l4 = B+D.
  double best = 0;
  const int n = 20;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      for (int c = 0; c <= n; ++c) {
        for (int d = 0; d <= n; ++d) {
          const double A = a / double(n), B = b / double(n), C = c / double(n), D = d / double(n);
          if (A + B > 1 + 1e-12 || A + C > 1 + 1e-12 || B + C + D > 1 + 1e-12 ||
              C + D > 1 + 1e-12 || B + D > 1 + 1e-12) {
            continue;
          }
          best = std::max(best, A + B + C + D);
        }
      }
    }
  }
  return best;
}

TEST(StepRule, ConstantIsConstant) {
  const auto r = StepRule::constant(5e-7);
  for (long k : {0L, 1L, 10L, 100000L}) EXPECT_DOUBLE_EQ(step_size(r, k, 3), 5e-7);
}

TEST(StepRule, DiminishingValues) {
  const auto r = StepRule::diminishing(1.0);
  EXPECT_DOUBLE_EQ(r.at(0), 1.0);
  EXPECT_DOUBLE_EQ(r.at(1), 1.0);
  EXPECT_DOUBLE_EQ(r.at(2), 1.0 / std::sqrt(2.0));
  for (long k = 2; k < 1000; ++k) EXPECT_LE(r.at(k), r.at(k - 1));
}

TEST(StepRule, DiminishingSumDiverges) {
  const auto r = StepRule::diminishing(1.0);
  double sum = 0;
  double at_1e4 = 0;
  for (long k = 0; k <= 1000000; ++k) {
    sum += r.at(k);
    if (k == 10000) at_1e4 = sum;
  }
  EXPECT_GT(sum, 1990.0);
  EXPECT_GT(sum, 9.0 * at_1e4);  // grows like sqrt(k)
  EXPECT_GT(r.at(1000000), 0.0);
}

TEST(StepRule, ParseAndValidate) {
  const auto a = StepRule::parse("constant:0.25");
  EXPECT_EQ(a.kind, StepRule::Kind::kConstant);
  EXPECT_DOUBLE_EQ(a.delta, 0.25);
  const auto b = StepRule::parse("diminishing:1e-2:0.6");
  EXPECT_EQ(b.kind, StepRule::Kind::kDiminishing);
  EXPECT_DOUBLE_EQ(b.decay, 0.6);
  EXPECT_EQ(StepRule::parse(b.to_string()).delta, b.delta);
  EXPECT_THROW(StepRule::parse("constant:-1"), ConfigError);
  EXPECT_THROW(StepRule::parse("diminishing:1:1.5"), ConfigError);
  EXPECT_THROW(StepRule::parse("linear:1"), ConfigError);
  EXPECT_THROW(StepRule::parse("constant:abc"), ConfigError);
}

TEST(Engine, FirstIterationAtZeroPrice) {
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  ExactOracle oracle(inst.network);
  const auto provider = oracle_provider(oracle, inst.sessions);
  SubgradientEngine eng(inst.network, inst.sessions, StepRule::constant(0.01));
  eng.initialize(provider);
  EXPECT_DOUBLE_EQ(eng.rates()[0], 10.0);
  EXPECT_EQ(eng.trees()[0].arcs, (TreeKey{0, 1}));
  eng.step(provider);
  const auto p = eng.prices();
  EXPECT_DOUBLE_EQ(p[0], 0.01 * 9.0);
  EXPECT_DOUBLE_EQ(p[1], 0.01 * 9.0);
  EXPECT_DOUBLE_EQ(p[2], 0.0);
  EXPECT_DOUBLE_EQ(p[3], 0.0);
}

TEST(Engine, RequiresInitialization) {
  const auto inst = relay_toy(SwarmMode::kUniversal);
  ExactOracle oracle(inst.network);
  SubgradientEngine eng(inst.network, inst.sessions, StepRule::constant(0.01));
  EXPECT_THROW(eng.step(oracle_provider(oracle, inst.sessions)), ConfigError);
}

TEST(Engine, ToyConvergesToGridOptimum) {
  const double target = toy_grid_optimum();
  EXPECT_DOUBLE_EQ(target, 2.0);
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  ExactOracle oracle(inst.network);
  const auto provider = oracle_provider(oracle, inst.sessions);
  SubgradientEngine eng(inst.network, inst.sessions, StepRule::diminishing(0.05, 0.6), 2500);
  eng.initialize(provider);
  for (int k = 0; k < 5000; ++k) eng.step(provider);
  EXPECT_NEAR(eng.average_rates()[0], target, 0.01 * target);
}

TEST(Engine, InvariantsEveryIteration) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const auto inst = random_instance(rng);
    ExactOracle oracle(inst.network);
    const auto provider = oracle_provider(oracle, inst.sessions);
    const double delta = 0.02;
    SubgradientEngine eng(inst.network, inst.sessions, StepRule::constant(delta), 100);
    eng.initialize(provider);
    std::vector<double> cumulative(inst.network.num_links(), 0.0);
    long terms = 0;
    for (int k = 0; k < 2000; ++k) {
      if (k >= 100) {
        const auto f = eng.link_flows();
        for (LinkId e = 0; e < inst.network.num_links(); ++e) cumulative[e] += f[e];
        ++terms;
      }
      eng.step(provider);
      for (double p : eng.prices()) ASSERT_GE(p, 0.0);
      for (std::size_t s = 0; s < inst.sessions.size(); ++s) {
        const double x = eng.rates()[s];
        ASSERT_GE(x, inst.sessions[s].min_rate);
        ASSERT_LE(x, inst.sessions[s].max_rate);
        ASSERT_TRUE(validate_tree(eng.trees()[s], inst.sessions[s], inst.network));
      }
      // A y-bar against x-bar accumulated directly.
      const auto ax = eng.average_rates();
      const auto xd = eng.average_rates_direct();
      for (std::size_t s = 0; s < ax.size(); ++s) ASSERT_NEAR(ax[s], xd[s], 1e-12 * (1 + xd[s]));
      // Flow accumulated since the window start exceeds capacity by at most
      // the largest price seen divided by the step.
      for (LinkId e = 0; e < inst.network.num_links() && terms > 0; ++e) {
        const double c = inst.network.link(e).capacity;
        ASSERT_LE(cumulative[e], c * terms + eng.max_prices()[e] / delta + 1e-9);
      }
    }
  }
}

TEST(Engine, AverageViolationShrinks) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 5; ++i) {
    const auto inst = random_instance(rng);
    ExactOracle oracle(inst.network);
    const auto provider = oracle_provider(oracle, inst.sessions);
    SubgradientEngine eng(inst.network, inst.sessions, StepRule::diminishing(1e-2, 0.6), 0);
    eng.initialize(provider);
    for (int k = 0; k < 1000; ++k) eng.step(provider);
    const double early = eng.max_average_violation();
    for (int k = 0; k < 40000; ++k) eng.step(provider);
    const double late = eng.max_average_violation();
    EXPECT_LE(late, std::max(early, 0.0) + 1e-12);
    EXPECT_LE(late, 1e-2);
  }
}

TEST(DualValue, ZeroPricesSingleSession) {
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  ExactOracle oracle(inst.network);
  const std::vector<double> zero(inst.network.num_links(), 0.0);
  const double dual = dual_value(inst.network, inst.sessions, zero, oracle);
  const double m = inst.sessions[0].max_rate;
  EXPECT_DOUBLE_EQ(dual, value(inst.sessions[0].utility, m));
  EXPECT_DOUBLE_EQ(primal_value(inst.sessions, std::vector<double>{m}), dual);
}

TEST(DualValue, WeakDualityOnRandomInstances) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  int violations = 0;
  for (int i = 0; i < 500; ++i) {
    const auto inst = random_instance(rng);
    const auto ref = exact_reference(inst.network, inst.sessions);
    ExactOracle oracle(inst.network);
    std::vector<double> p(inst.network.num_links());
    for (double& v : p) v = u(rng) < 0.3 ? 0.0 : u(rng);
    if (dual_value(inst.network, inst.sessions, p, oracle) < ref.objective - 1e-9) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(DualValue, TrajectoryStaysAboveOptimum) {
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  const double fstar = value(inst.sessions[0].utility, 2.0);
  ExactOracle oracle(inst.network);
  const auto provider = oracle_provider(oracle, inst.sessions);
  SubgradientEngine eng(inst.network, inst.sessions, StepRule::diminishing(0.05, 0.6));
  eng.initialize(provider);
  for (int k = 0; k < 3000; ++k) {
    ASSERT_GE(eng.dual_value(), fstar - 1e-12) << k;
    eng.step(provider);
  }
}

TEST(Lagrangian, StructuralMaximizerDominates) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 20; ++i) {
    const auto inst = random_instance(rng);
    ExactOracle oracle(inst.network);
    std::vector<double> p(inst.network.num_links());
    for (double& v : p) v = 0.05 + u(rng);
    const auto costs = arc_costs(inst.network, p);
    for (const Session& s : inst.sessions) {
      const auto trees = enumerate_trees(inst.network, s, 100000);
      // y* itself and the zero candidate.
      const Tree best = oracle.solve(s, costs);
      const double x = rate_from_price(s.utility, tree_cost_from_arcs(best, costs), s.min_rate, s.max_rate);
      EXPECT_TRUE(lagrangian_maximizer_check(inst.network, p, s, oracle, {{best, x}}, 0.0));
      EXPECT_TRUE(lagrangian_maximizer_check(inst.network, p, s, oracle, {{best, 0.0}}));
      for (int j = 0; j < 1000 / 20; ++j) {
        std::vector<double> w(trees.size());
        double sum = 0;
        for (double& v : w) sum += (v = u(rng) < 0.5 ? 0.0 : u(rng));
        const double total = s.max_rate * u(rng);
        std::vector<std::pair<Tree, double>> cand;
        for (std::size_t t = 0; t < trees.size(); ++t) {
          cand.emplace_back(trees[t], sum > 0 ? total * w[t] / sum : 0.0);
        }
        EXPECT_TRUE(lagrangian_maximizer_check(inst.network, p, s, oracle, cand));
      }
    }
  }
}

TEST(Lagrangian, RejectsInfeasibleCandidate) {
  const auto inst = relay_toy(SwarmMode::kUniversal, 10.0);
  ExactOracle oracle(inst.network);
  const std::vector<double> p(5, 0.1);
  EXPECT_THROW(lagrangian_maximizer_check(inst.network, p, inst.sessions[0], oracle, {{Tree(1, {0, 1}), 11.0}}),
               ConfigError);
  EXPECT_THROW(lagrangian_maximizer_check(inst.network, p, inst.sessions[0], oracle, {{Tree(1, {0, 1}), -1.0}}),
               ConfigError);
}

TEST(Monitor, RequiresSustainedGap) {
  ConvergenceMonitor m({1e-3, 3, 1e-2});
  EXPECT_FALSE(m.update(1.0, 1.0005, 0.0));
  EXPECT_FALSE(m.update(1.0, 1.0005, 0.0));
  EXPECT_TRUE(m.update(1.0, 1.0005, 0.0));
  m.reset();
  EXPECT_FALSE(m.converged());
  EXPECT_FALSE(m.update(1.0, 1.0005, 0.5));  // violation too large
}

}  // namespace
}  // namespace mtpack
