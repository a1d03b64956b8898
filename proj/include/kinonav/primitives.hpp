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

#include <cmath>
#include <vector>

#include "kinonav/costmap.hpp"
#include "kinonav/geometry.hpp"

namespace kinonav {

/// Planar double-integrator state: torso position and velocity.
struct State {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

using ControlInput = Vec2;  // constant acceleration, m/s^2

/// Constant-acceleration segment: x0 driven by input u for duration tau.
struct MotionPrimitive {
  State x0;
  ControlInput u = ControlInput::Zero();
  double tau = 0.0;
};

/// Per-axis front-end bounds on input and velocity.
struct KinoLimits {
  double u_max = 1.0;   // m/s^2
  double v_max = 0.75;  // m/s
};

/// Control-input lattice: the Cartesian square of
/// {-u_max, ..., -u_max/mu, 0, u_max/mu, ..., u_max}, (2*mu+1)^2 inputs,
/// ordered row-major by ux then uy ascending.
inline std::vector<ControlInput> control_lattice(double u_max, int mu) {
  std::vector<ControlInput> inputs;
  inputs.reserve(static_cast<size_t>(2 * mu + 1) * (2 * mu + 1));
  for (int i = -mu; i <= mu; ++i) {
    for (int j = -mu; j <= mu; ++j) {
      inputs.emplace_back(u_max * i / mu, u_max * j / mu);
    }
  }
  return inputs;
}

/// Exact flow of the double integrator: p(t) = u t^2/2 + v0 t + p0,
/// v(t) = v0 + u t.
inline State propagate(const State& x0, const ControlInput& u, double t) {
  State out;
  out.p = x0.p + x0.v * t + 0.5 * u * t * t;
  out.v = x0.v + u * t;
  return out;
}

/// Actual cost of one primitive: (|u|^2 + rho) * tau.
inline double primitive_cost(const ControlInput& u, double tau, double rho) {
  return (u.squaredNorm() + rho) * tau;
}

/// Per-axis velocity along a primitive is affine in t, so checking both
/// endpoints bounds it; the input is constant.
inline bool dynamic_feasible(const MotionPrimitive& mp, const KinoLimits& lim) {
  if (std::abs(mp.u.x()) > lim.u_max || std::abs(mp.u.y()) > lim.u_max) return false;
  const Vec2 v1 = mp.x0.v + mp.u * mp.tau;
  for (int d = 0; d < 2; ++d) {
    if (std::abs(mp.x0.v[d]) > lim.v_max || std::abs(v1[d]) > lim.v_max) return false;
  }
  return true;
}

namespace detail {

// Sample count giving adjacent positions at most R apart along the path.
// Speed^2 is convex in t, so the primitive's top speed is at an endpoint;
// the v_max-based count is kept as a floor so sampling never gets sparser
// than the costmap resolution rule.
inline int collision_sample_count(const MotionPrimitive& mp, const KinoLimits& lim, double r) {
  const double s_end = std::max(mp.x0.v.norm(), (mp.x0.v + mp.u * mp.tau).norm());
  const double s = std::max(s_end, lim.v_max);
  return std::max(1, static_cast<int>(std::ceil(mp.tau * s / r)));
}

}  // namespace detail

/// Hard collision check: samples I+1 positions at t = i*tau/I (path spacing
/// <= R) and rejects the primitive if any lethal cell rectangle lies within
/// half the sample spacing of a sample, which covers every continuous path
/// point between samples.
inline bool collision_free(const MotionPrimitive& mp, const Costmap& cm, const KinoLimits& lim) {
  const double r = cm.resolution();
  const int samples = detail::collision_sample_count(mp, lim, r);
  const double s_end = std::max(mp.x0.v.norm(), (mp.x0.v + mp.u * mp.tau).norm());
  const double margin = 0.5 * mp.tau * std::max(s_end, 1e-9) / samples;
  for (int i = 0; i <= samples; ++i) {
    const double t = mp.tau * i / samples;
    const Vec2 p = mp.x0.p + mp.x0.v * t + 0.5 * mp.u * t * t;
    if (cm.lethal_within(p, margin)) return false;
  }
  return true;
}

/// Discretized line integral of the inflation cost along the primitive:
/// I_c = max(2, ceil(v_max tau / R)) samples including both endpoints,
/// dt = tau / (I_c - 1), sum of F(p_i) |v_i| dt.
inline double soft_cost(const MotionPrimitive& mp, const Costmap& cm, const KinoLimits& lim) {
  const int ic = std::max(2, static_cast<int>(std::ceil(lim.v_max * mp.tau / cm.resolution())));
  const double dt = mp.tau / (ic - 1);
  double total = 0.0;
  for (int i = 0; i < ic; ++i) {
    const double t = i * dt;
    const Vec2 p = mp.x0.p + mp.x0.v * t + 0.5 * mp.u * t * t;
    const Vec2 v = mp.x0.v + mp.u * t;
    total += cm.cost_at(p) * v.norm() * dt;
  }
  return total;
}

}  // namespace kinonav
