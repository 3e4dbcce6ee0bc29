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

#ifndef MTPACK_UTILITY_HPP_
#define MTPACK_UTILITY_HPP_

// Session utility functions and the price-to-rate machinery derived from
// them. Two strictly concave families are supported:
//
//   log_shifted:  U(x) = w * ln(x + a),  a = e unless overridden
//   isoelastic:   U(x) = w / (1 - beta) * x^(1 - beta),  beta in (0, 1)

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mtpack/core.hpp"

namespace mtpack {

enum class UtilityKind { kLogShifted, kIsoelastic };

struct UtilitySpec {
  UtilityKind kind = UtilityKind::kLogShifted;
  double weight = 1.0;
  double beta = 0.5;                // isoelastic only
  double shift = std::numbers::e;   // log_shifted only

  static UtilitySpec log_shifted(double w, double shift = std::numbers::e) {
    return {UtilityKind::kLogShifted, w, 0.5, shift};
  }
  static UtilitySpec isoelastic(double w, double beta) {
    return {UtilityKind::kIsoelastic, w, beta, std::numbers::e};
  }

  void validate() const {
    if (!(weight > 0.0)) throw ConfigError("utility weight must be positive");
    if (kind == UtilityKind::kIsoelastic && !(beta > 0.0 && beta < 1.0)) {
      throw ConfigError("isoelastic exponent must lie in (0, 1)");
    }
    if (kind == UtilityKind::kLogShifted && !(shift > 0.0)) {
      throw ConfigError("log shift must be positive");
    }
  }
};

inline std::string to_string(UtilityKind kind) {
  return kind == UtilityKind::kLogShifted ? "log_shifted" : "isoelastic";
}

inline double value(const UtilitySpec& u, double x) {
  if (u.kind == UtilityKind::kLogShifted) return u.weight * std::log(x + u.shift);
  return u.weight / (1.0 - u.beta) * std::pow(x, 1.0 - u.beta);
}

// Returns +infinity for the isoelastic family at x = 0.
inline double derivative(const UtilitySpec& u, double x) {
  if (u.kind == UtilityKind::kLogShifted) return u.weight / (x + u.shift);
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  return u.weight * std::pow(x, -u.beta);
}

inline double second_derivative(const UtilitySpec& u, double x) {
  if (u.kind == UtilityKind::kLogShifted) {
    const double d = x + u.shift;
    return -u.weight / (d * d);
  }
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  return -u.beta * u.weight * std::pow(x, -u.beta - 1.0);
}

// (U')^{-1}(p) for p > 0. May be negative for the log family (p > w / e);
// callers project onto [m, M].
inline double inverse_derivative(const UtilitySpec& u, double p) {
  if (!(p > 0.0)) throw ConfigError("inverse_derivative requires a positive price");
  if (std::isinf(p)) return u.kind == UtilityKind::kLogShifted ? -u.shift : 0.0;
  if (u.kind == UtilityKind::kLogShifted) return u.weight / p - u.shift;
  return std::pow(u.weight / p, 1.0 / u.beta);
}

// Projected rate for a tree price: clamp((U')^{-1}(price), m, M). A zero
// price maps to M and an infinite price to m.
inline double rate_from_price(const UtilitySpec& u, double price, double min_rate,
                              double max_rate) {
  if (price <= 0.0) return max_rate;
  if (std::isinf(price)) return min_rate;
  return std::clamp(inverse_derivative(u, price), min_rate, max_rate);
}

// Per-session term of the dual function: max over x in [m, M] of U(x) - x*w.
// Defined for w >= 0 (w = 0 gives U(M)).
inline double session_dual_term(const UtilitySpec& u, double price, double min_rate,
                                double max_rate) {
  const double x = rate_from_price(u, price, min_rate, max_rate);
  if (x == 0.0) return value(u, 0.0);
  return value(u, x) - x * price;
}

// h(w) = U([U'^{-1}(w)]_m^M) - [U'^{-1}(w)]_m^M * w, for w > 0.
inline double h(const UtilitySpec& u, double price, double min_rate, double max_rate) {
  if (!(price > 0.0)) throw ConfigError("h is defined for positive prices only");
  return session_dual_term(u, price, min_rate, max_rate);
}

// U(m) - m U'(m) >= 0, required by the approximation bound.
inline bool satisfies_nonnegative_intercept(const UtilitySpec& u, double min_rate) {
  if (min_rate == 0.0) return value(u, 0.0) >= 0.0;
  return value(u, min_rate) - min_rate * derivative(u, min_rate) >= 0.0;
}

}  // namespace mtpack

#endif  // MTPACK_UTILITY_HPP_
