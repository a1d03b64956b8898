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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include "kinonav/costmap.hpp"
#include "kinonav/geometry.hpp"
#include "kinonav/primitives.hpp"

namespace kinonav {

/// 8-connected grid path with its cell-center polyline.
struct GridPath {
  bool found = false;
  std::vector<Eigen::Vector2i> cells;
  std::vector<Vec2> polyline;
  double grid_cost = 0.0;  // accumulated soft-weighted edge cost
};

/// Traditional grid A*. Edge cost is the Euclidean step length scaled by
/// (1 + w_c * cell_cost / C_max) of the destination cell, so the baseline
/// shares the soft clearance preference of the kinodynamic front-end.
/// Diagonal steps through blocked cardinal neighbors are forbidden.
inline GridPath grid_plan(const Vec2& start, const Vec2& goal, const Costmap& cm,
                          double w_c = 1.0) {
  GridPath out;
  const OccupancyGrid& g = cm.grid();
  int sx, sy, gx, gy;
  g.world_to_cell(start, sx, sy);
  g.world_to_cell(goal, gx, gy);
  if (!g.in_bounds(sx, sy) || !g.in_bounds(gx, gy)) return out;
  const double lethal = cm.params().lethal_cost;
  const auto blocked = [&](int x, int y) { return cm.cost_cell(x, y) >= lethal; };
  if (blocked(sx, sy) || blocked(gx, gy)) return out;

  const int w = g.width, h = g.height;
  const size_t n = g.cell_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<uint8_t> closed(n, 0);

  struct Entry {
    double f, hcost;
    uint64_t seq;
    int cell;
  };
  struct Cmp {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.hcost != b.hcost) return a.hcost > b.hcost;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Cmp> open;
  uint64_t seq = 0;

  const double r = g.resolution;
  const auto heur = [&](int x, int y) {
    return std::hypot(double(x - gx), double(y - gy)) * r;
  };
  const auto index = [&](int x, int y) { return static_cast<size_t>(y) * w + x; };

  dist[index(sx, sy)] = 0.0;
  open.push({heur(sx, sy), heur(sx, sy), seq++, static_cast<int>(index(sx, sy))});

  static const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};

  int goal_idx = static_cast<int>(index(gx, gy));
  bool found = false;
  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    if (closed[top.cell]) continue;
    closed[top.cell] = 1;
    if (top.cell == goal_idx) {
      found = true;
      break;
    }
    const int cx = top.cell % w, cy = top.cell / w;
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + dx8[k], ny = cy + dy8[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      if (blocked(nx, ny)) continue;
      if (k >= 4 && (blocked(cx, ny) || blocked(nx, cy))) continue;  // no corner cutting
      const size_t ni = index(nx, ny);
      if (closed[ni]) continue;
      const double step = (k >= 4 ? std::numbers::sqrt2 : 1.0) * r;
      const double edge = step * (1.0 + w_c * cm.cost_cell(nx, ny) / cm.params().c_max);
      const double cand = dist[top.cell] + edge;
      if (cand < dist[ni] - 1e-12) {
        dist[ni] = cand;
        parent[ni] = top.cell;
        open.push({cand + heur(nx, ny), heur(nx, ny), seq++, static_cast<int>(ni)});
      }
    }
  }
  if (!found) return out;

  out.found = true;
  out.grid_cost = dist[goal_idx];
  for (int c = goal_idx; c != -1; c = parent[c]) {
    out.cells.emplace_back(c % w, c / w);
  }
  std::reverse(out.cells.begin(), out.cells.end());
  out.polyline.reserve(out.cells.size());
  for (const auto& c : out.cells) out.polyline.push_back(g.cell_center(c.x(), c.y()));
  return out;
}

/// Trapezoidal speed profile over one straight run of the simplified path.
struct ProfileRun {
  Vec2 from, to;
  double length = 0.0;
  double v_in = 0.0, v_out = 0.0, v_peak = 0.0;
  double t_acc = 0.0, t_cruise = 0.0, t_dec = 0.0;

  double duration() const { return t_acc + t_cruise + t_dec; }
};

/// Post-hoc timing of a grid path: collinear waypoints merged, each straight
/// run driven with a trapezoidal profile at a_max, corner speed zero beyond
/// the stop angle and v_max * cos(angle) below it.
struct TimedProfile {
  std::vector<Vec2> waypoints;
  std::vector<ProfileRun> runs;
  double total_duration = 0.0;
  double effort = 0.0;  // integral of a^2

  /// Longitudinal speed/acceleration at global time t (for validation).
  void sample(double t, double& speed, double& accel) const {
    for (const ProfileRun& run : runs) {
      double d = run.duration();
      if (t <= d + 1e-12) {
        if (t < run.t_acc) {
          speed = run.v_in + (run.v_peak - run.v_in) / std::max(run.t_acc, 1e-12) * t;
          accel = run.t_acc > 0 ? (run.v_peak - run.v_in) / run.t_acc : 0.0;
        } else if (t < run.t_acc + run.t_cruise) {
          speed = run.v_peak;
          accel = 0.0;
        } else {
          const double td = t - run.t_acc - run.t_cruise;
          speed = run.v_peak - (run.v_peak - run.v_out) / std::max(run.t_dec, 1e-12) * td;
          accel = run.t_dec > 0 ? -(run.v_peak - run.v_out) / run.t_dec : 0.0;
        }
        return;
      }
      t -= d;
    }
    speed = 0.0;
    accel = 0.0;
  }
};

inline TimedProfile time_parameterize(const GridPath& path, const KinoLimits& lim,
                                      double corner_stop_deg = 30.0) {
  TimedProfile prof;
  if (path.polyline.size() < 2) {
    if (!path.polyline.empty()) prof.waypoints = path.polyline;
    return prof;
  }

  // Merge collinear waypoints.
  prof.waypoints.push_back(path.polyline.front());
  for (size_t i = 1; i + 1 < path.polyline.size(); ++i) {
    const Vec2 a = (path.polyline[i] - prof.waypoints.back()).normalized();
    const Vec2 b = (path.polyline[i + 1] - path.polyline[i]).normalized();
    if (std::abs(a.x() * b.y() - a.y() * b.x()) > 1e-9 || a.dot(b) < 0.0) {
      prof.waypoints.push_back(path.polyline[i]);
    }
  }
  prof.waypoints.push_back(path.polyline.back());

  const size_t m = prof.waypoints.size();
  std::vector<double> seg_len(m - 1);
  for (size_t i = 0; i + 1 < m; ++i) seg_len[i] = (prof.waypoints[i + 1] - prof.waypoints[i]).norm();

  // Corner speeds, then reachability caps (backward then forward pass).
  const double a = lim.u_max;
  std::vector<double> v(m, 0.0);
  for (size_t i = 1; i + 1 < m; ++i) {
    const Vec2 d0 = (prof.waypoints[i] - prof.waypoints[i - 1]).normalized();
    const Vec2 d1 = (prof.waypoints[i + 1] - prof.waypoints[i]).normalized();
    const double angle = std::acos(clamp(d0.dot(d1), -1.0, 1.0)) * 180.0 / kPi;
    v[i] = angle > corner_stop_deg ? 0.0 : lim.v_max * std::cos(angle * kPi / 180.0);
  }
  for (size_t i = m - 1; i-- > 0;) v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * a * seg_len[i]));
  for (size_t i = 0; i + 1 < m; ++i) v[i + 1] = std::min(v[i + 1], std::sqrt(v[i] * v[i] + 2.0 * a * seg_len[i]));

  for (size_t i = 0; i + 1 < m; ++i) {
    ProfileRun run;
    run.from = prof.waypoints[i];
    run.to = prof.waypoints[i + 1];
    run.length = seg_len[i];
    run.v_in = v[i];
    run.v_out = v[i + 1];
    if (run.length < 1e-12) continue;
    const double peak_sq = (2.0 * a * run.length + run.v_in * run.v_in + run.v_out * run.v_out) / 2.0;
    run.v_peak = std::min(lim.v_max, std::sqrt(peak_sq));
    run.t_acc = (run.v_peak - run.v_in) / a;
    run.t_dec = (run.v_peak - run.v_out) / a;
    const double d_acc = (run.v_peak * run.v_peak - run.v_in * run.v_in) / (2.0 * a);
    const double d_dec = (run.v_peak * run.v_peak - run.v_out * run.v_out) / (2.0 * a);
    const double d_cruise = std::max(0.0, run.length - d_acc - d_dec);
    run.t_cruise = run.v_peak > 1e-12 ? d_cruise / run.v_peak : 0.0;
    prof.total_duration += run.duration();
    prof.effort += a * a * (run.t_acc + run.t_dec);
    prof.runs.push_back(run);
  }
  return prof;
}

}  // namespace kinonav
