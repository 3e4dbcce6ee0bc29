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

#ifndef MTPACK_BOUNDS_HPP_
#define MTPACK_BOUNDS_HPP_

// Solution-quality certification.
//
// exact_reference solves the full tree-packing problem over every enumerated
// tree with a log-barrier Newton method. Newton systems are reduced to the
// (sessions + links) dimension through the Woodbury identity, so thousands
// of trees stay cheap. It returns a strictly feasible primal point (a lower
// bound on the optimum) and the dual value at the barrier multipliers (an
// upper bound), typically within 1e-10 of each other.
//
// sandwich evaluates the approximation chain
//   theta_q(lambda) <= f* <= theta(rho * lambda) <= rho * theta_q(lambda)
// at a converged restricted dual point.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mtpack/colgen.hpp"
#include "mtpack/core.hpp"
#include "mtpack/exact.hpp"
#include "mtpack/network.hpp"
#include "mtpack/optimizer.hpp"
#include "mtpack/oracle.hpp"
#include "mtpack/tree.hpp"
#include "mtpack/utility.hpp"

namespace mtpack {

// Raised when a certificate cannot be issued (e.g. a utility with a
// negative intercept U(m) - m U'(m)).
class RefusedError : public Error {
 public:
  explicit RefusedError(const std::string& why) : Error("certificate refused: " + why) {}
};

struct ReferenceSolution {
  std::vector<double> rates;        // x*
  double objective = 0.0;           // sum U(x*) at the returned feasible point
  double upper_bound = 0.0;         // smallest theta over the barrier multipliers
  std::vector<Tree> trees;          // every tree of every session
  std::vector<double> tree_rates;   // y, aligned with `trees`
  std::vector<double> prices;       // multipliers attaining upper_bound
  int newton_steps = 0;
};

struct ReferenceOptions {
  std::size_t max_trees = 200000;
  double gap_tolerance = 1e-11;
  EnumerationLimits limits;
};

inline ReferenceSolution exact_reference(const Network& net, const std::vector<Session>& sessions,
                                         const ReferenceOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  ReferenceSolution out;
  std::vector<int> owner;  // session index per tree
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    sessions[s].validate(net);
    for (Tree& t : enumerate_trees(net, sessions[s], opt.max_trees, opt.limits)) {
      out.trees.push_back(std::move(t));
      owner.push_back(static_cast<int>(s));
    }
  }
  const int T = static_cast<int>(out.trees.size());
  const int S = static_cast<int>(sessions.size());
  const int E = net.num_links();

  // Rows of B: sessions first, then links.
  MatrixXd B = MatrixXd::Zero(S + E, T);
  std::vector<int> per_session(S, 0);
  for (int t = 0; t < T; ++t) {
    B(owner[t], t) = 1.0;
    ++per_session[owner[t]];
    for (auto [link, mult] : link_usage(out.trees[t], net)) B(S + link, t) = mult;
  }
  for (int s = 0; s < S; ++s) {
    if (per_session[s] == 0) throw InfeasibleError("session without trees");
  }
  std::vector<bool> link_used(E, false);
  for (int e = 0; e < E; ++e) link_used[e] = B.row(S + e).sum() > 0;

  VectorXd cap(E);
  for (int e = 0; e < E; ++e) cap(e) = net.link(e).capacity;

  // Strictly feasible start: every tree at the same small rate.
  double alpha = std::numeric_limits<double>::infinity();
  for (int e = 0; e < E; ++e) {
    if (link_used[e]) alpha = std::min(alpha, 0.5 * cap(e) / B.row(S + e).sum());
  }
  for (int s = 0; s < S; ++s) {
    alpha = std::min(alpha, 0.5 * sessions[s].max_rate / per_session[s]);
  }
  VectorXd y = VectorXd::Constant(T, alpha);
  for (int s = 0; s < S; ++s) {
    if (alpha * per_session[s] <= sessions[s].min_rate) {
      throw InfeasibleError("no strictly feasible starting point for the reference solver");
    }
  }

  auto barrier_value = [&](const VectorXd& yy, double mu, bool* feasible) {
    const VectorXd r = B * yy;
    *feasible = (yy.array() > 0).all();
    double f = 0.0;
    for (int s = 0; s < S && *feasible; ++s) {
      const Session& ss = sessions[s];
      const double x = r(s);
      if (!(x < ss.max_rate) || (ss.min_rate > 0 && !(x > ss.min_rate))) *feasible = false;
      if (!*feasible) break;
      f += value(ss.utility, x) + mu * std::log(ss.max_rate - x);
      if (ss.min_rate > 0) f += mu * std::log(x - ss.min_rate);
    }
    for (int e = 0; e < E && *feasible; ++e) {
      if (!link_used[e]) continue;
      const double slack = cap(e) - r(S + e);
      if (!(slack > 0)) *feasible = false;
      else f += mu * std::log(slack);
    }
    if (*feasible) f += mu * yy.array().log().sum();
    return f;
  };

  // Every phase yields a valid dual bound; rounding can spoil the
  // multipliers once mu is tiny, so the tightest bound seen is kept.
  auto record_phase = [&](double mu_now) {
    const VectorXd r = B * y;
    std::vector<double> prices(E, 0.0);
    for (int e = 0; e < E; ++e) {
      if (link_used[e]) prices[e] = mu_now / (cap(e) - r(S + e));
    }
    const auto costs = arc_costs(net, prices);
    std::vector<double> gamma(S, std::numeric_limits<double>::infinity());
    for (int t = 0; t < T; ++t) {
      gamma[owner[t]] = std::min(gamma[owner[t]], tree_cost_from_arcs(out.trees[t], costs));
    }
    const double bound = dual_value_from_costs(net, sessions, prices, gamma);
    if (out.prices.empty() || bound < out.upper_bound) {
      out.upper_bound = bound;
      out.prices = std::move(prices);
    }
  };

  const int constraints = T + S + static_cast<int>(std::count(link_used.begin(), link_used.end(), true));
  double mu = 1.0;
  while (true) {
    for (int iter = 0; iter < 200; ++iter) {
      const VectorXd r = B * y;
      VectorXd gb(S + E), w(S + E);  // gradient and curvature per row of B
      for (int s = 0; s < S; ++s) {
        const Session& ss = sessions[s];
        const double x = r(s);
        double g = derivative(ss.utility, x) - mu / (ss.max_rate - x);
        double c = -second_derivative(ss.utility, x) + mu / std::pow(ss.max_rate - x, 2);
        if (ss.min_rate > 0) {
          g += mu / (x - ss.min_rate);
          c += mu / std::pow(x - ss.min_rate, 2);
        }
        gb(s) = g;
        w(s) = c;
      }
      for (int e = 0; e < E; ++e) {
        if (!link_used[e]) {
          gb(S + e) = 0.0;
          w(S + e) = 0.0;
          continue;
        }
        const double slack = cap(e) - r(S + e);
        gb(S + e) = -mu / slack;
        w(S + e) = mu / (slack * slack);
      }
      const VectorXd grad = B.transpose() * gb + (mu / y.array()).matrix();
      const VectorXd d_inv = (y.array().square() / mu).matrix();  // D = mu / y^2
      // (D + B' W B) dir = grad via Woodbury on the rows with w > 0.
      std::vector<int> rows;
      for (int i = 0; i < S + E; ++i) {
        if (w(i) > 0) rows.push_back(i);
      }
      const int R = static_cast<int>(rows.size());
      MatrixXd Br(R, T);
      VectorXd wr(R);
      for (int i = 0; i < R; ++i) {
        Br.row(i) = B.row(rows[i]);
        wr(i) = w(rows[i]);
      }
      const MatrixXd BD = Br * d_inv.asDiagonal();
      MatrixXd K = BD * Br.transpose();
      K.diagonal() += wr.cwiseInverse();
      const VectorXd z = K.ldlt().solve(BD * grad);
      const VectorXd dir = d_inv.asDiagonal() * (grad - Br.transpose() * z);
      const double decrement = grad.dot(dir);
      ++out.newton_steps;
      // Newton decrement of the barrier function scaled by 1/mu.
      const double scaled = decrement / mu;
      if (scaled < 1e-14) break;

      bool feasible = false;
      const double f0 = barrier_value(y, mu, &feasible);
      double step = 1.0;
      while (step > 1e-16) {
        const VectorXd trial = y + step * dir;
        const double f1 = barrier_value(trial, mu, &feasible);
        // Inside the quadratic region the Armijo test drowns in rounding;
        // any feasible step is then taken.
        if (feasible && (scaled < 1e-2 || f1 >= f0 + 0.25 * step * decrement)) {
          y = trial;
          break;
        }
        step *= 0.5;
      }
      if (step <= 1e-16) break;
    }
    record_phase(mu);
    if (mu * constraints < opt.gap_tolerance) break;
    mu *= 0.1;
  }

  out.tree_rates.assign(y.data(), y.data() + T);
  const VectorXd r = B * y;
  out.rates.resize(S);
  for (int s = 0; s < S; ++s) out.rates[s] = r(s);
  out.objective = primal_value(sessions, out.rates);
  return out;
}

// Refuses sessions whose utility has U(m) - m U'(m) < 0; the chain does not
// hold for them.
inline void require_nonnegative_intercepts(const std::vector<Session>& sessions) {
  for (const Session& s : sessions) {
    if (!satisfies_nonnegative_intercept(s.utility, s.min_rate)) {
      throw RefusedError("session " + std::to_string(s.id) + " has U(m) - m U'(m) < 0");
    }
  }
}

struct Certificate {
  double rho = 1.0;
  double restricted_dual = 0.0;    // theta_q(lambda-bar)
  double scaled_global_dual = 0.0;  // theta(rho * lambda-bar)
  double rho_restricted_dual = 0.0;
  double primal = 0.0;             // sum U(x-bar)
  bool has_reference = false;
  double optimum_lower = 0.0;      // feasible objective from exact_reference
  double optimum_upper = 0.0;      // dual bound from exact_reference
  bool certifying = true;          // false when theta(rho*lambda) used an approximate oracle
  std::vector<int> sessions_at_min_rate;

  // Chain links: theta_q <= f*, f* <= theta(rho l), theta(rho l) <= rho theta_q.
  bool lower_ok = true;
  bool middle_ok = true;
  bool upper_ok = true;
  // Primal form: sum U(x-bar) <= f* <= rho sum U(x-bar). Depends on how
  // far x-bar has converged, so it is reported but not part of the verdict.
  bool primal_ok = true;

  double exact_tolerance = 1e-9;
  double convergence_tolerance = 1e-3;

  bool passed() const { return lower_ok && middle_ok && upper_ok; }
};

struct SandwichOptions {
  double exact_tolerance = 1e-9;        // on exactly computable comparisons
  double convergence_tolerance = 1e-3;  // relative, where a converged iterate enters
};

// Evaluates the approximation chain at `prices` (the restricted dual point).
// `global_oracle` supplies gamma(s, rho * lambda); pass an exact oracle for a
// certifying result. `reference`, when given, brackets the optimum f*.
inline Certificate sandwich(const Network& net, const std::vector<Session>& sessions,
                            const TreePool& pool, std::span<const double> prices,
                            std::span<const double> average_rates, double rho,
                            TreeOracle& global_oracle, const ReferenceSolution* reference,
                            const SandwichOptions& opt = {}) {
  if (!(rho >= 1.0)) throw ConfigError("rho must be >= 1");
  require_nonnegative_intercepts(sessions);
  for (double p : prices) {
    if (p < 0) throw ConfigError("negative price");
  }
  Certificate c;
  c.rho = rho;
  c.exact_tolerance = opt.exact_tolerance;
  c.convergence_tolerance = opt.convergence_tolerance;
  c.certifying = global_oracle.name() == "exact";

  const auto costs = arc_costs(net, prices);
  std::vector<double> local(sessions.size());
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    local[s] = local_min_cost_tree(pool, s, costs).second;
  }
  c.restricted_dual = dual_value_from_costs(net, sessions, prices, local);
  c.rho_restricted_dual = rho * c.restricted_dual;

  std::vector<double> scaled(prices.begin(), prices.end());
  for (double& p : scaled) p *= rho;
  c.scaled_global_dual = dual_value(net, sessions, scaled, global_oracle);

  c.primal = primal_value(sessions, average_rates);
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (s < average_rates.size() && average_rates[s] <= sessions[s].min_rate) {
      c.sessions_at_min_rate.push_back(sessions[s].id);
    }
  }

  const double tol = opt.exact_tolerance;
  c.upper_ok = c.scaled_global_dual <= c.rho_restricted_dual + tol;
  if (reference) {
    c.has_reference = true;
    c.optimum_lower = reference->objective;
    c.optimum_upper = reference->upper_bound;
    const double scale = std::max(1.0, std::abs(c.optimum_upper));
    const double rel = opt.convergence_tolerance * scale;
    c.lower_ok = c.restricted_dual <= c.optimum_upper + rel;
    c.middle_ok = c.optimum_lower <= c.scaled_global_dual + tol;
    c.primal_ok = c.primal <= c.optimum_upper + rel && c.optimum_lower <= rho * c.primal + rel;
  } else {
    // Without a reference only the weak-duality ordering is available.
    c.middle_ok = c.primal <= c.scaled_global_dual + opt.convergence_tolerance *
                                                         std::max(1.0, std::abs(c.scaled_global_dual));
  }
  return c;
}

}  // namespace mtpack

#endif  // MTPACK_BOUNDS_HPP_
