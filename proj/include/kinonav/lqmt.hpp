// Copyright 2026 The kinonav Authors
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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "kinonav/geometry.hpp"
#include "kinonav/primitives.hpp"

namespace kinonav {

/// Boundary states of an obstacle-free, input-unconstrained connection.
struct BoundaryPair {
  State current;
  State goal;
};

/// Minimum-effort cubic connecting the boundary pair in time T:
/// p*(t) = alpha t^3/6 + beta t^2/2 + v_c t + p_c per axis, with
/// control cost J*(T) = sum_d (alpha_d^2 T^3/3 + alpha_d beta_d T^2 + beta_d^2 T).
struct OptimalConnection {
  Vec2 alpha = Vec2::Zero();
  Vec2 beta = Vec2::Zero();
  double T = 0.0;
  double control_cost = 0.0;  // J*(T)
  double total_cost = 0.0;    // J*(T) + rho * T
  bool degenerate = false;

  Vec2 position(const BoundaryPair& bp, double t) const {
    return bp.current.p + bp.current.v * t + 0.5 * beta * t * t + (1.0 / 6.0) * alpha * t * t * t;
  }
  Vec2 velocity(const BoundaryPair& bp, double t) const {
    return bp.current.v + beta * t + 0.5 * alpha * t * t;
  }
  Vec2 acceleration(double t) const { return beta + alpha * t; }
};

namespace detail {

// Coefficients of J*(T) = c3/T^3 + c2/T^2 + c1/T expanded from the
// Pontryagin closed form; avoids forming alpha/beta per candidate T.
struct LqmtCostCoeffs {
  double c3, c2, c1;
  explicit LqmtCostCoeffs(const BoundaryPair& bp) {
    const Vec2 dp = bp.goal.p - bp.current.p;
    const Vec2 vc = bp.current.v, vg = bp.goal.v;
    c3 = 12.0 * dp.squaredNorm();
    c2 = -12.0 * dp.dot(vc + vg);
    c1 = 4.0 * (vc.squaredNorm() + vc.dot(vg) + vg.squaredNorm());
  }
  double control_cost(double T) const {
    const double it = 1.0 / T;
    return ((c3 * it + c2) * it + c1) * it;
  }
  double total_cost(double T, double rho) const { return control_cost(T) + rho * T; }
};

// Bisection for a root of fn inside [lo, hi], assuming a sign change.
template <typename F>
double bisect(F&& fn, double lo, double hi) {
  double flo = fn(lo);
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Positive real roots of q(T) = rho T^4 - c1 T^2 - 2 c2 T - 3 c3, the
// stationarity condition of J*(T) + rho T multiplied by T^4. Monotone
// intervals are bracketed from the roots of q' and q''; allocation-free
// since this runs once per expanded search node.
struct StationaryRoots {
  std::array<double, 3> t;
  int count = 0;
};

inline StationaryRoots stationary_durations(const LqmtCostCoeffs& c, double rho) {
  const auto q = [&](double t) { return ((rho * t * t - c.c1) * t - 2.0 * c.c2) * t - 3.0 * c.c3; };
  const auto dq = [&](double t) { return (4.0 * rho * t * t - 2.0 * c.c1) * t - 2.0 * c.c2; };

  // Cauchy-style bound: beyond it q is positive and increasing.
  const double bound =
      1.0 + std::max({std::abs(c.c1), 2.0 * std::abs(c.c2), 3.0 * std::abs(c.c3)}) / rho;

  // Breakpoints of q: 0, the up-to-two positive roots of q', and the bound
  // (q' has at most two positive roots since q'' has at most one).
  std::array<double, 4> brk;
  int nbrk = 0;
  brk[nbrk++] = 0.0;
  const double r2 = c.c1 > 0.0 ? std::sqrt(c.c1 / (6.0 * rho)) : 0.0;
  if (r2 > 0.0) {
    if ((dq(0.0) <= 0.0) != (dq(r2) <= 0.0)) brk[nbrk++] = bisect(dq, 0.0, r2);
    if ((dq(r2) <= 0.0) != (dq(bound) <= 0.0)) brk[nbrk++] = bisect(dq, r2, bound);
  } else if ((dq(0.0) <= 0.0) != (dq(bound) <= 0.0)) {
    brk[nbrk++] = bisect(dq, 0.0, bound);
  }
  brk[nbrk++] = bound;

  StationaryRoots roots;
  for (int i = 0; i + 1 < nbrk; ++i) {
    double lo = brk[i], hi = brk[i + 1];
    if (hi - lo < 1e-15) continue;
    const double eps = std::max(1e-12, lo * 1e-14);
    if ((q(lo + eps) <= 0.0) != (q(hi) <= 0.0)) {
      const double r = bisect(q, lo + eps, hi);
      if (r > 0.0 && roots.count < 3) roots.t[roots.count++] = r;
    }
  }
  return roots;
}

}  // namespace detail

/// Fixed-duration optimal connection (Pontryagin closed form).
/// total_cost is filled with J*(T) + rho * T.
inline OptimalConnection connection_for_T(const BoundaryPair& bp, double T, double rho = 0.0) {
  OptimalConnection conn;
  conn.T = T;
  const double t2 = T * T, t3 = t2 * T;
  for (int d = 0; d < 2; ++d) {
    const double dp = bp.goal.p[d] - bp.current.p[d] - bp.current.v[d] * T;
    const double dv = bp.goal.v[d] - bp.current.v[d];
    conn.alpha[d] = (-12.0 * dp + 6.0 * T * dv) / t3;
    conn.beta[d] = (6.0 * T * dp - 2.0 * t2 * dv) / t3;
    conn.control_cost += conn.alpha[d] * conn.alpha[d] * t3 / 3.0 +
                         conn.alpha[d] * conn.beta[d] * t2 + conn.beta[d] * conn.beta[d] * T;
  }
  conn.total_cost = conn.control_cost + rho * T;
  return conn;
}

inline constexpr double kDegenerateDuration = 1e-3;

/// Duration minimizing J*(T) + rho T over T > 0. Stationary points come
/// from the quartic stationarity condition; ties pick the smallest T. A
/// golden-section scan is the fallback if bracketing finds no root.
inline OptimalConnection optimal_duration(const BoundaryPair& bp, double rho) {
  const Vec2 dp = bp.goal.p - bp.current.p;
  const Vec2 dv = bp.goal.v - bp.current.v;
  if (dp.norm() < 1e-12 && dv.norm() < 1e-12) {
    OptimalConnection conn = connection_for_T(bp, kDegenerateDuration, rho);
    conn.degenerate = true;
    return conn;
  }

  const detail::LqmtCostCoeffs coeffs(bp);
  const detail::StationaryRoots roots = detail::stationary_durations(coeffs, rho);

  double best_t = -1.0, best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < roots.count; ++i) {
    const double t = roots.t[i];
    const double cost = coeffs.total_cost(t, rho);
    if (cost < best_cost - 1e-12 || (std::abs(cost - best_cost) <= 1e-12 && t < best_t)) {
      best_cost = cost;
      best_t = t;
    }
  }

  if (best_t <= 0.0) {
    // Golden-section fallback over (eps, bound]; the total cost diverges at
    // both ends so the minimum is interior.
    double lo = 1e-6;
    double hi = 1.0 + std::max({std::abs(coeffs.c1), 2.0 * std::abs(coeffs.c2),
                                3.0 * std::abs(coeffs.c3)}) / rho;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = coeffs.total_cost(x1, rho), f2 = coeffs.total_cost(x2, rho);
    for (int it = 0; it < 200; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = coeffs.total_cost(x1, rho);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = coeffs.total_cost(x2, rho);
      }
    }
    best_t = 0.5 * (a + b);
  }

  return connection_for_T(bp, best_t, rho);
}

/// Admissible heuristic: the unconstrained optimum min_T [J*(T) + rho T].
/// include_time = false drops the rho T term (the strictly smaller, equally
/// admissible variant) while keeping the same optimal duration.
inline double heuristic(const BoundaryPair& bp, double rho, bool include_time = true) {
  const OptimalConnection conn = optimal_duration(bp, rho);
  return include_time ? conn.total_cost : conn.control_cost;
}

}  // namespace kinonav
