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

#include "kinonav/geometry.hpp"
#include "kinonav/lqmt.hpp"
#include "kinonav/primitives.hpp"

namespace kinonav {

/// One polynomial piece of a planned trajectory:
/// p(t) = p0 + v0 t + a0 t^2/2 + j t^3/6 per axis, t in [0, tau].
/// Lattice primitives have j = 0 and a0 = u; the closed-form goal
/// connection has a0 = beta and j = alpha.
struct Segment {
  Vec2 p0 = Vec2::Zero();
  Vec2 v0 = Vec2::Zero();
  Vec2 a0 = Vec2::Zero();
  Vec2 j = Vec2::Zero();
  double tau = 0.0;

  static Segment from_primitive(const MotionPrimitive& mp) {
    return Segment{mp.x0.p, mp.x0.v, mp.u, Vec2::Zero(), mp.tau};
  }
  static Segment from_connection(const State& from, const OptimalConnection& conn) {
    return Segment{from.p, from.v, conn.beta, conn.alpha, conn.T};
  }

  Vec2 position(double t) const {
    return p0 + v0 * t + 0.5 * a0 * t * t + (1.0 / 6.0) * j * t * t * t;
  }
  Vec2 velocity(double t) const { return v0 + a0 * t + 0.5 * j * t * t; }
  Vec2 acceleration(double t) const { return a0 + j * t; }
  State state_at(double t) const { return State{position(t), velocity(t)}; }
  State end_state() const { return state_at(tau); }

  /// Integral of |a(t)|^2 over the piece, in closed form.
  double effort() const {
    double e = 0.0;
    for (int d = 0; d < 2; ++d) {
      e += a0[d] * a0[d] * tau + a0[d] * j[d] * tau * tau + j[d] * j[d] * tau * tau * tau / 3.0;
    }
    return e;
  }
};

/// Time-ordered, state-continuous sequence of polynomial segments.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Segment> segments) : segments_(std::move(segments)) {
    for (const Segment& s : segments_) duration_ += s.tau;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double duration() const { return duration_; }

  State start_state() const {
    return segments_.empty() ? State{} : State{segments_.front().p0, segments_.front().v0};
  }
  State end_state() const { return segments_.empty() ? State{} : segments_.back().end_state(); }

  /// State at global time t (clamped to [0, duration]).
  State state_at(double t) const {
    if (segments_.empty()) return State{};
    if (t <= 0.0) return start_state();
    for (const Segment& s : segments_) {
      if (t <= s.tau) return s.state_at(t);
      t -= s.tau;
    }
    return end_state();
  }

  Vec2 accel_at(double t) const {
    if (segments_.empty()) return Vec2::Zero();
    if (t <= 0.0) return segments_.front().acceleration(0.0);
    for (const Segment& s : segments_) {
      if (t <= s.tau) return s.acceleration(t);
      t -= s.tau;
    }
    return segments_.back().acceleration(segments_.back().tau);
  }

  double effort() const {
    double e = 0.0;
    for (const Segment& s : segments_) e += s.effort();
    return e;
  }

  /// Arc length by composite Simpson over |v| (exact enough for reports).
  double path_length() const {
    double len = 0.0;
    for (const Segment& s : segments_) {
      const int n = std::max(8, static_cast<int>(std::ceil(s.tau / 0.005)) * 2);
      const double h = s.tau / n;
      double acc = s.velocity(0).norm() + s.velocity(s.tau).norm();
      for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * s.velocity(i * h).norm();
      len += acc * h / 3.0;
    }
    return len;
  }

  /// Sample times covering [0, duration] with path spacing <= max_spacing.
  std::vector<double> sample_times(double max_spacing, double v_ref) const {
    std::vector<double> ts;
    const double dt = max_spacing / std::max(v_ref, 1e-9);
    const int n = std::max(1, static_cast<int>(std::ceil(duration_ / dt)));
    ts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) ts.push_back(duration_ * i / n);
    return ts;
  }

 private:
  std::vector<Segment> segments_;
  double duration_ = 0.0;
};

}  // namespace kinonav
