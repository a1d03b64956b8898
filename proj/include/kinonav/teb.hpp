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

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kinonav/costmap.hpp"
#include "kinonav/geometry.hpp"
#include "kinonav/trajectory.hpp"

namespace kinonav {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // normalized to (-pi, pi]

  Vec2 position() const { return Vec2(x, y); }
};

/// Timed elastic band: n SE(2) poses and n-1 positive time intervals.
/// The first and last pose stay fixed during optimization.
struct Band {
  std::vector<Pose> poses;
  std::vector<double> dts;

  int size() const { return static_cast<int>(poses.size()); }
  double total_time() const {
    double t = 0.0;
    for (double dt : dts) t += dt;
    return t;
  }
};

/// Omnidirectional body-frame limits (asymmetric forward/backward bound).
struct OmniLimits {
  double v_x_max = 0.75;   // m/s forward
  double v_x_min = 0.10;   // m/s max backward speed (lower bound is -v_x_min)
  double v_y_max = 0.20;   // m/s lateral
  double omega_max = 0.70; // rad/s
  double a_x_max = 1.00;   // m/s^2
  double a_y_max = 0.17;   // m/s^2
  double alpha_max = 0.52; // rad/s^2
};

/// Weights of the squared residual blocks plus the soft-penalty shaping.
/// Lateral weights default higher than forward ones to reflect the smaller
/// lateral locomotion ability.
struct TebWeights {
  double gamma_time = 1.0;
  double gamma_obstacle = 50.0;
  double gamma_viapoint = 1.0;
  double gamma_vel_x = 1.0;
  double gamma_vel_y = 4.0;
  double gamma_vel_theta = 1.0;
  double gamma_acc_x = 1.0;
  double gamma_acc_y = 4.0;
  double gamma_acc_theta = 1.0;
  double gamma_yaw = 0.1;
  double obstacle_min_dist = 0.4;  // m
  double penalty_epsilon = 0.05;   // penalties activate this far inside the bound
};

struct TebConfig {
  double dt_ref = 0.3;   // s, reference interval for resizing
  double dt_min = 1e-3;  // s, hard lower clamp on intervals
  int outer_iters = 50;
  int inner_iters = 10;
  int min_samples = 3;
  int max_samples = 200;
  double convergence_rel = 1e-6;
  // Velocity/acceleration penalty weights grow by this factor each outer
  // round (up to the cap) so limit violations get squeezed out instead of
  // trading off against the time term.
  double weight_adapt_factor = 2.0;
  double weight_adapt_max = 100.0;
};

/// Body-frame velocity command over one interval.
struct Command {
  double v_x = 0.0;
  double v_y = 0.0;
  double omega = 0.0;
  double duration = 0.0;
};

/// World-frame pose difference of interval i, with the translation rotated
/// into the frame of pose i. dtheta is wrapped to (-pi, pi].
struct BodyDeltas {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

inline BodyDeltas body_frame_deltas(const Band& band, int i) {
  const Pose& a = band.poses[i];
  const Pose& b = band.poses[i + 1];
  const double wx = b.x - a.x, wy = b.y - a.y;
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return BodyDeltas{wx * c + wy * s, -wx * s + wy * c, wrap_angle(b.theta - a.theta)};
}

struct IntervalVelocity {
  double v_x = 0.0, v_y = 0.0, omega = 0.0;
};
struct IntervalAcceleration {
  double a_x = 0.0, a_y = 0.0, alpha = 0.0;
};

inline IntervalVelocity band_velocity(const Band& band, int i) {
  const BodyDeltas d = body_frame_deltas(band, i);
  const double dt = band.dts[i];
  return IntervalVelocity{d.dx / dt, d.dy / dt, d.dtheta / dt};
}

/// Midpoint-rule acceleration between intervals i and i+1.
inline IntervalAcceleration band_acceleration(const Band& band, int i) {
  const IntervalVelocity v0 = band_velocity(band, i);
  const IntervalVelocity v1 = band_velocity(band, i + 1);
  const double h = 0.5 * (band.dts[i] + band.dts[i + 1]);
  return IntervalAcceleration{(v1.v_x - v0.v_x) / h, (v1.v_y - v0.v_y) / h,
                              (v1.omega - v0.omega) / h};
}

/// Uniform resampling of a front-end trajectory into an initial band.
/// Headings follow the sampled velocity direction where the speed is
/// meaningful and carry forward otherwise; the endpoint headings come from
/// the scenario.
inline Band initialize_band(const Trajectory& traj, double dt_ref, double theta_start,
                            double theta_goal) {
  Band band;
  if (traj.empty() || traj.duration() <= 0.0) {
    const State s = traj.start_state();
    band.poses.push_back(Pose{s.p.x(), s.p.y(), wrap_angle(theta_start)});
    band.poses.push_back(Pose{s.p.x(), s.p.y(), wrap_angle(theta_goal)});
    band.dts.push_back(dt_ref);
    return band;
  }
  const double total = traj.duration();
  const int n = std::max(2, static_cast<int>(std::lround(total / dt_ref)) + 1);
  double prev_theta = wrap_angle(theta_start);
  for (int i = 0; i < n; ++i) {
    const double t = total * i / (n - 1);
    const State s = traj.state_at(t);
    double theta = prev_theta;
    if (s.v.norm() > 0.05) theta = std::atan2(s.v.y(), s.v.x());
    band.poses.push_back(Pose{s.p.x(), s.p.y(), theta});
    prev_theta = theta;
  }
  band.poses.front().theta = wrap_angle(theta_start);
  band.poses.back().theta = wrap_angle(theta_goal);
  for (int i = 0; i + 1 < n; ++i) band.dts.push_back(total / (n - 1));
  return band;
}

inline std::vector<Command> extract_commands(const Band& band) {
  std::vector<Command> cmds;
  cmds.reserve(band.dts.size());
  for (size_t i = 0; i < band.dts.size(); ++i) {
    const IntervalVelocity v = band_velocity(band, static_cast<int>(i));
    cmds.push_back(Command{v.v_x, v.v_y, v.omega, band.dts[i]});
  }
  return cmds;
}

namespace detail {

// Variable layout: (x, y, theta) per interior pose, then all dts.
struct BandLayout {
  int n = 0;
  int n_pose_vars = 0;
  int n_vars = 0;
  explicit BandLayout(const Band& band) : n(band.size()) {
    n_pose_vars = 3 * std::max(0, n - 2);
    n_vars = n_pose_vars + (n - 1);
  }
  // Column of coordinate k (0=x,1=y,2=theta) of pose i, or -1 if fixed.
  int pose_col(int i, int k) const {
    if (i <= 0 || i >= n - 1) return -1;
    return 3 * (i - 1) + k;
  }
  int dt_col(int i) const { return n_pose_vars + i; }
};

// Derivative of one scalar interval quantity wrt the up-to-9 variables it
// touches: poses i, i+1 (x, y, theta each) and dt_i.
struct QuantityDeriv {
  double value = 0.0;
  double d_pose[2][3] = {{0, 0, 0}, {0, 0, 0}};
  double d_dt = 0.0;
};

struct IntervalDerivs {
  QuantityDeriv vx, vy, om;
};

inline IntervalDerivs interval_derivs(const Band& band, int i) {
  const Pose& a = band.poses[i];
  const Pose& b = band.poses[i + 1];
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  const double wx = b.x - a.x, wy = b.y - a.y;
  const double dx = wx * c + wy * s;
  const double dy = -wx * s + wy * c;
  const double dth = wrap_angle(b.theta - a.theta);
  const double dt = band.dts[i];
  const double it = 1.0 / dt;

  IntervalDerivs out;
  out.vx.value = dx * it;
  out.vx.d_pose[0][0] = -c * it;
  out.vx.d_pose[0][1] = -s * it;
  out.vx.d_pose[0][2] = dy * it;
  out.vx.d_pose[1][0] = c * it;
  out.vx.d_pose[1][1] = s * it;
  out.vx.d_dt = -dx * it * it;

  out.vy.value = dy * it;
  out.vy.d_pose[0][0] = s * it;
  out.vy.d_pose[0][1] = -c * it;
  out.vy.d_pose[0][2] = -dx * it;
  out.vy.d_pose[1][0] = -s * it;
  out.vy.d_pose[1][1] = c * it;
  out.vy.d_dt = -dy * it * it;

  out.om.value = dth * it;
  out.om.d_pose[0][2] = -it;
  out.om.d_pose[1][2] = it;
  out.om.d_dt = -dth * it * it;
  return out;
}

// Sparse residual system with block labels for diagnostics.
struct ResidualSystem {
  Eigen::VectorXd r;
  std::vector<Eigen::Triplet<double>> jac;
  std::vector<std::string> block_of_row;
  int n_vars = 0;
  bool with_jacobian = false;

  int add_row(const std::string& block, double value) {
    const int row = static_cast<int>(block_of_row.size());
    block_of_row.push_back(block);
    values.push_back(value);
    return row;
  }
  void add_entry(int row, int col, double val) {
    if (col >= 0 && with_jacobian && val != 0.0) jac.emplace_back(row, col, val);
  }
  void finalize() {
    r = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
  }
  std::vector<double> values;
};

}  // namespace detail

/// Stacked weighted residual vector of the band objective. Each row enters
/// the objective as its square. Blocks, in order: time, obstacle, via-point,
/// velocity penalties, acceleration penalties, yaw change.
///
/// Penalties are one-sided hinges pen(z) = max(0, z + epsilon) applied to
/// (quantity - upper) and (lower - quantity).
inline detail::ResidualSystem build_residual_system(
    const Band& band, const Costmap& cm, const std::vector<Vec2>& via_points,
    const std::vector<int>& via_assoc, const OmniLimits& lim, const TebWeights& w,
    bool with_jacobian) {
  detail::ResidualSystem sys;
  const detail::BandLayout layout(band);
  sys.n_vars = layout.n_vars;
  sys.with_jacobian = with_jacobian;
  const int n = band.size();
  const double eps = w.penalty_epsilon;

  // time
  const double sqrt_time = std::sqrt(w.gamma_time);
  for (int i = 0; i + 1 < n; ++i) {
    const int row = sys.add_row("time", sqrt_time * band.dts[i]);
    sys.add_entry(row, layout.dt_col(i), sqrt_time);
  }

  // obstacle clearance (hinge on obstacle_min_dist - dist)
  const double sqrt_obs = std::sqrt(w.gamma_obstacle);
  for (int i = 0; i < n; ++i) {
    Vec2 grad;
    const double dist = cm.interpolated_dist(band.poses[i].position(), &grad);
    const double z = w.obstacle_min_dist - dist + eps;
    // NaN distances poison the row so the solver aborts loudly; an infinite
    // distance (obstacle-free map) simply deactivates it.
    const double val = std::isnan(dist) ? dist : (std::isfinite(dist) ? std::max(0.0, z) : 0.0);
    const int row = sys.add_row("obstacle", sqrt_obs * val);
    if (val > 0.0) {
      sys.add_entry(row, layout.pose_col(i, 0), -sqrt_obs * grad.x());
      sys.add_entry(row, layout.pose_col(i, 1), -sqrt_obs * grad.y());
    }
  }

  // via points (attraction to nearest band pose)
  const double sqrt_via = std::sqrt(w.gamma_viapoint);
  for (size_t k = 0; k < via_points.size(); ++k) {
    const int i = via_assoc[k];
    const Vec2 diff = band.poses[i].position() - via_points[k];
    const double d = diff.norm();
    const int row = sys.add_row("viapoint", sqrt_via * d);
    if (d > 1e-12) {
      sys.add_entry(row, layout.pose_col(i, 0), sqrt_via * diff.x() / d);
      sys.add_entry(row, layout.pose_col(i, 1), sqrt_via * diff.y() / d);
    }
  }

  // One scalar quantity with its sparse derivative wrt layout columns.
  struct Quantity {
    double value = 0.0;
    std::vector<std::pair<int, double>> deriv;  // (col, dvalue/dcol); col -1 dropped
    void add(int col, double d) {
      if (col >= 0 && d != 0.0) deriv.emplace_back(col, d);
    }
  };

  const auto velocity_quantity = [&](const detail::QuantityDeriv& q, int i) {
    Quantity out;
    out.value = q.value;
    for (int pk = 0; pk < 3; ++pk) {
      out.add(layout.pose_col(i, pk), q.d_pose[0][pk]);
      out.add(layout.pose_col(i + 1, pk), q.d_pose[1][pk]);
    }
    out.add(layout.dt_col(i), q.d_dt);
    return out;
  };

  // Midpoint-rule acceleration between intervals i and i+1:
  // a = (q1 - q0) / h, h = (dt_i + dt_{i+1}) / 2.
  const auto acceleration_quantity = [&](const detail::QuantityDeriv& q0,
                                         const detail::QuantityDeriv& q1, int i) {
    Quantity out;
    const double h = 0.5 * (band.dts[i] + band.dts[i + 1]);
    const double ih = 1.0 / h;
    out.value = (q1.value - q0.value) * ih;
    for (int pk = 0; pk < 3; ++pk) {
      out.add(layout.pose_col(i, pk), -ih * q0.d_pose[0][pk]);
      out.add(layout.pose_col(i + 1, pk), ih * (q1.d_pose[0][pk] - q0.d_pose[1][pk]));
      out.add(layout.pose_col(i + 2, pk), ih * q1.d_pose[1][pk]);
    }
    out.add(layout.dt_col(i), -ih * q0.d_dt - 0.5 * out.value * ih);
    out.add(layout.dt_col(i + 1), ih * q1.d_dt - 0.5 * out.value * ih);
    return out;
  };

  // Two hinge rows per bounded quantity: pen(q - upper) and pen(lower - q).
  const auto add_hinges = [&](const std::string& block, const Quantity& q, double lower,
                              double upper, double gamma) {
    const double sw = std::sqrt(gamma);
    const auto emit = [&](double resid, double sign) {
      const int row = sys.add_row(block, sw * resid);
      if (!(resid > 0.0)) return;
      for (const auto& [col, d] : q.deriv) sys.add_entry(row, col, sw * sign * d);
    };
    if (!std::isfinite(q.value)) {
      // poison both rows so diagnostics name this block
      emit(q.value, 1.0);
      emit(q.value, -1.0);
      return;
    }
    emit(std::max(0.0, q.value - upper + eps), 1.0);
    emit(std::max(0.0, lower - q.value + eps), -1.0);
  };

  // velocity penalties
  for (int i = 0; i + 1 < n; ++i) {
    const detail::IntervalDerivs dv = detail::interval_derivs(band, i);
    add_hinges("velocity_x", velocity_quantity(dv.vx, i), -lim.v_x_min, lim.v_x_max,
               w.gamma_vel_x);
    add_hinges("velocity_y", velocity_quantity(dv.vy, i), -lim.v_y_max, lim.v_y_max,
               w.gamma_vel_y);
    add_hinges("velocity_theta", velocity_quantity(dv.om, i), -lim.omega_max, lim.omega_max,
               w.gamma_vel_theta);
  }

  // acceleration penalties
  for (int i = 0; i + 2 < n; ++i) {
    const detail::IntervalDerivs d0 = detail::interval_derivs(band, i);
    const detail::IntervalDerivs d1 = detail::interval_derivs(band, i + 1);
    add_hinges("acceleration_x", acceleration_quantity(d0.vx, d1.vx, i), -lim.a_x_max,
               lim.a_x_max, w.gamma_acc_x);
    add_hinges("acceleration_y", acceleration_quantity(d0.vy, d1.vy, i), -lim.a_y_max,
               lim.a_y_max, w.gamma_acc_y);
    add_hinges("acceleration_theta", acceleration_quantity(d0.om, d1.om, i), -lim.alpha_max,
               lim.alpha_max, w.gamma_acc_theta);
  }

  // yaw change
  const double sqrt_yaw = std::sqrt(w.gamma_yaw);
  for (int i = 0; i + 1 < n; ++i) {
    const double dth = wrap_angle(band.poses[i + 1].theta - band.poses[i].theta);
    const int row = sys.add_row("yaw", sqrt_yaw * dth);
    sys.add_entry(row, layout.pose_col(i, 2), -sqrt_yaw);
    sys.add_entry(row, layout.pose_col(i + 1, 2), sqrt_yaw);
  }

  sys.finalize();
  return sys;
}

inline std::vector<int> associate_via_points(const Band& band, const std::vector<Vec2>& vias) {
  std::vector<int> assoc(vias.size(), 0);
  for (size_t k = 0; k < vias.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < band.size(); ++i) {
      const double d = (band.poses[i].position() - vias[k]).squaredNorm();
      if (d < best) {
        best = d;
        assoc[k] = i;
      }
    }
  }
  return assoc;
}

/// Weighted residual vector of the current band (via points bound to their
/// nearest pose).
inline Eigen::VectorXd residuals(const Band& band, const Costmap& cm,
                                 const std::vector<Vec2>& via_points, const OmniLimits& lim,
                                 const TebWeights& w) {
  const auto assoc = associate_via_points(band, via_points);
  return build_residual_system(band, cm, via_points, assoc, lim, w, false).r;
}

struct OptimizeResult {
  Band band;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  // Accepted objective values per outer round (for monotonicity checks;
  // resizing between rounds changes the row count and thus the scale).
  std::vector<std::vector<double>> accepted_objectives;
};

namespace detail {

inline void check_finite(const ResidualSystem& sys) {
  for (long i = 0; i < sys.r.size(); ++i) {
    if (!std::isfinite(sys.r[i])) {
      throw SolverError("non-finite residual in block '" + sys.block_of_row[i] + "' (row " +
                        std::to_string(i) + ")");
    }
  }
}

inline void apply_step(Band& band, const Eigen::VectorXd& dx, double dt_min) {
  const BandLayout layout(band);
  for (int i = 1; i + 1 < band.size(); ++i) {
    band.poses[i].x += dx[layout.pose_col(i, 0)];
    band.poses[i].y += dx[layout.pose_col(i, 1)];
    band.poses[i].theta = wrap_angle(band.poses[i].theta + dx[layout.pose_col(i, 2)]);
  }
  for (int i = 0; i + 1 < band.size(); ++i) {
    band.dts[i] = std::max(dt_min, band.dts[i] + dx[layout.dt_col(i)]);
  }
}

// Scale factor keeping the step inside a region where the linearization is
// trustworthy: intervals change by at most half (velocities are ~1/dt, so
// unrestricted Gauss-Newton steps can slam dts into the clamp and blow the
// residuals up), headings by at most 0.5 rad, positions by at most 0.5 m.
inline double step_trust_scale(const Band& band, const Eigen::VectorXd& dx) {
  const BandLayout layout(band);
  double scale = 1.0;
  for (int i = 1; i + 1 < band.size(); ++i) {
    const double dpos = std::hypot(dx[layout.pose_col(i, 0)], dx[layout.pose_col(i, 1)]);
    if (dpos > 0.5) scale = std::min(scale, 0.5 / dpos);
    const double dth = std::abs(dx[layout.pose_col(i, 2)]);
    if (dth > 0.5) scale = std::min(scale, 0.5 / dth);
  }
  for (int i = 0; i + 1 < band.size(); ++i) {
    const double ddt = std::abs(dx[layout.dt_col(i)]);
    if (ddt > 0.5 * band.dts[i]) scale = std::min(scale, 0.5 * band.dts[i] / ddt);
  }
  return scale;
}

// One resize pass: split long intervals, merge short ones (endpoints and
// the sample-count bounds respected).
inline void resize_band(Band& band, const TebConfig& cfg) {
  for (int i = 0; i + 1 < band.size() && band.size() < cfg.max_samples; ++i) {
    if (band.dts[i] > 1.5 * cfg.dt_ref) {
      const Pose& a = band.poses[i];
      const Pose& b = band.poses[i + 1];
      Pose mid;
      mid.x = 0.5 * (a.x + b.x);
      mid.y = 0.5 * (a.y + b.y);
      mid.theta = wrap_angle(a.theta + 0.5 * wrap_angle(b.theta - a.theta));
      const double half = 0.5 * band.dts[i];
      band.poses.insert(band.poses.begin() + i + 1, mid);
      band.dts[i] = half;
      band.dts.insert(band.dts.begin() + i + 1, half);
      ++i;
    }
  }
  for (int i = 0; i + 1 < band.size() && band.size() > cfg.min_samples; ++i) {
    if (band.dts[i] < 0.5 * cfg.dt_ref && i + 2 < band.size()) {
      band.dts[i] += band.dts[i + 1];
      band.poses.erase(band.poses.begin() + i + 1);
      band.dts.erase(band.dts.begin() + i + 1);
      --i;
    }
  }
}

}  // namespace detail

/// Damped Gauss-Newton (Levenberg) refinement of the band over the free
/// variables: interior poses and all time intervals (clamped at dt_min).
/// Outer rounds alternate band resizing and via re-association with inner
/// LM iterations; accepted steps never increase the objective.
inline OptimizeResult optimize(const Band& initial, const Costmap& cm,
                               const std::vector<Vec2>& via_points, const OmniLimits& lim,
                               const TebWeights& w, const TebConfig& cfg = {}) {
  OptimizeResult result;
  result.band = initial;
  Band& band = result.band;
  TebWeights cur = w;

  const auto objective_of = [&](const Band& b, const std::vector<int>& assoc) {
    const auto sys = build_residual_system(b, cm, via_points, assoc, lim, cur, false);
    detail::check_finite(sys);
    return sys.r.squaredNorm();
  };

  {
    const auto assoc0 = associate_via_points(band, via_points);
    result.initial_objective = objective_of(band, assoc0);
  }
  result.final_objective = result.initial_objective;

  double prev_round_obj = std::numeric_limits<double>::infinity();
  double adapt = 1.0;

  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    ++result.outer_iterations;
    double lambda = 1e-4;  // fresh damping each round
    const int size_before = band.size();
    detail::resize_band(band, cfg);
    const bool resized = band.size() != size_before;
    const auto assoc = associate_via_points(band, via_points);

    bool weights_changed = false;
    if (outer > 0 && adapt < cfg.weight_adapt_max) {
      adapt = std::min(adapt * cfg.weight_adapt_factor, cfg.weight_adapt_max);
      cur.gamma_vel_x = w.gamma_vel_x * adapt;
      cur.gamma_vel_y = w.gamma_vel_y * adapt;
      cur.gamma_vel_theta = w.gamma_vel_theta * adapt;
      cur.gamma_acc_x = w.gamma_acc_x * adapt;
      cur.gamma_acc_y = w.gamma_acc_y * adapt;
      cur.gamma_acc_theta = w.gamma_acc_theta * adapt;
      weights_changed = true;
    }

    double obj = objective_of(band, assoc);
    result.accepted_objectives.emplace_back();
    result.accepted_objectives.back().push_back(obj);

    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      auto sys = build_residual_system(band, cm, via_points, assoc, lim, cur, true);
      detail::check_finite(sys);
      const int n_vars = sys.n_vars;
      if (n_vars == 0) break;
      Eigen::SparseMatrix<double> jac(static_cast<int>(sys.r.size()), n_vars);
      jac.setFromTriplets(sys.jac.begin(), sys.jac.end());
      const Eigen::SparseMatrix<double> jt = jac.transpose();
      const Eigen::SparseMatrix<double> jtj = jt * jac;
      const Eigen::VectorXd g = jt * sys.r;
      if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;

      bool accepted = false;
      for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
        // Marquardt scaling plus an absolute floor: columns with near-zero
        // curvature must not blow the step up, or the high-lambda regime
        // stops being a safe gradient step.
        Eigen::SparseMatrix<double> a = jtj;
        Eigen::VectorXd diag = jtj.diagonal();
        for (int c = 0; c < n_vars; ++c) {
          a.coeffRef(c, c) += lambda * (diag[c] + 1.0);
        }
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
        if (solver.info() != Eigen::Success) {
          lambda = std::min(lambda * 10.0, 1e10);
          continue;
        }
        Eigen::VectorXd dx = solver.solve(-g);
        if (solver.info() != Eigen::Success || !dx.allFinite()) {
          lambda = std::min(lambda * 10.0, 1e10);
          continue;
        }
        dx *= detail::step_trust_scale(band, dx);
        Band candidate = band;
        detail::apply_step(candidate, dx, cfg.dt_min);
        const double cand_obj = objective_of(candidate, assoc);
        if (cand_obj < obj) {
          band = std::move(candidate);
          obj = cand_obj;
          lambda = std::max(lambda * 0.5, 1e-9);
          accepted = true;
          result.accepted_objectives.back().push_back(obj);
        } else {
          lambda = std::min(lambda * 4.0, 1e10);
        }
      }
      if (!accepted) break;
    }

    result.final_objective = obj;
    if (!resized && !weights_changed && prev_round_obj < std::numeric_limits<double>::infinity()) {
      const double rel = (prev_round_obj - obj) / std::max(prev_round_obj, 1e-300);
      if (rel >= 0.0 && rel < cfg.convergence_rel) {
        result.converged = true;
        break;
      }
    }
    prev_round_obj = obj;
  }
  return result;
}

/// Band CSV rows: x,y,theta,dt (the last row carries dt = 0).
inline void write_band_csv(std::ostream& os, const Band& band) {
  os << "x,y,theta,dt\n";
  char buf[128];
  for (int i = 0; i < band.size(); ++i) {
    const double dt = i + 1 < band.size() ? band.dts[i] : 0.0;
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g\n", band.poses[i].x, band.poses[i].y,
                  band.poses[i].theta, dt);
    os << buf;
  }
}

inline Band read_band_csv(std::istream& is) {
  Band band;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("x,", 0) == 0) continue;
    }
    Pose p;
    double dt = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p.x, &p.y, &p.theta, &dt) != 4) {
      throw ParseError("band csv: bad row '" + line + "'");
    }
    band.poses.push_back(p);
    band.dts.push_back(dt);
  }
  if (band.poses.size() < 2) throw ParseError("band csv: need at least 2 poses");
  band.dts.pop_back();
  return band;
}

}  // namespace kinonav
