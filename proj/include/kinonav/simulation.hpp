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

#include <string>
#include <vector>

#include "kinonav/kinodynamic_astar.hpp"
#include "kinonav/scenario.hpp"
#include "kinonav/teb.hpp"

namespace kinonav {

struct SimParams {
  double replan_hz = 2.0;
  double horizon_s = 120.0;
  double sim_dt = 0.02;
};

enum class SimStatus { ReachedGoal, Collision, NoPathHalt, HorizonExceeded };

inline const char* to_string(SimStatus s) {
  switch (s) {
    case SimStatus::ReachedGoal: return "reached_goal";
    case SimStatus::Collision: return "collision";
    case SimStatus::NoPathHalt: return "no_path_halt";
    case SimStatus::HorizonExceeded: return "horizon_exceeded";
  }
  return "unknown";
}

struct TraceRow {
  double t;
  double x, y, theta;
  double v_x, v_y, omega;  // body frame command being tracked
  std::string event;       // "", "replan", "no_path", "goal", "collision"
};

struct ReplanRecord {
  double t = 0.0;
  State robot;        // world-frame state handed to the planner
  bool success = false;
  State plan_start;   // first segment's initial state
  double plan_cost = 0.0;
};

struct SimResult {
  SimStatus status = SimStatus::HorizonExceeded;
  double end_time = 0.0;
  Vec2 end_position = Vec2::Zero();
  double collision_time = -1.0;
  Vec2 collision_position = Vec2::Zero();
  int replans = 0;
  int failed_replans = 0;
  double min_obstacle_separation = std::numeric_limits<double>::infinity();
  std::vector<TraceRow> trace;
  std::vector<ReplanRecord> replan_log;
};

namespace detail {

// Exact integration of a constant body-frame twist (v_x, v_y, omega).
inline void integrate_twist(double& x, double& y, double& theta, double vx, double vy,
                            double omega, double dt) {
  if (std::abs(omega) < 1e-9) {
    const double c = std::cos(theta), s = std::sin(theta);
    x += (vx * c - vy * s) * dt;
    y += (vx * s + vy * c) * dt;
    theta = wrap_angle(theta + omega * dt);
    return;
  }
  const double th1 = theta + omega * dt;
  x += (vx * (std::sin(th1) - std::sin(theta)) + vy * (std::cos(th1) - std::cos(theta))) / omega;
  y += (-vx * (std::cos(th1) - std::cos(theta)) + vy * (std::sin(th1) - std::sin(theta))) / omega;
  theta = wrap_angle(th1);
}

// Ground-truth contact: the robot's inscribed disc against occupied cells
// and against the scheduled discs.
inline bool ground_truth_collision(const OccupancyGrid& static_grid,
                                   const std::vector<DynamicDisc>& discs, const Vec2& p,
                                   double t, double inscribed, double* separation) {
  double sep = std::numeric_limits<double>::infinity();
  const double r = static_grid.resolution;
  int ix, iy;
  static_grid.world_to_cell(p, ix, iy);
  const int reach = static_cast<int>(std::ceil(inscribed / r)) + 1;
  for (int y = iy - reach; y <= iy + reach; ++y) {
    for (int x = ix - reach; x <= ix + reach; ++x) {
      if (!static_grid.in_bounds(x, y) || !static_grid.occupied(x, y)) continue;
      const double dx = std::max({static_grid.origin.x() + x * r - p.x(),
                                  p.x() - (static_grid.origin.x() + (x + 1) * r), 0.0});
      const double dy = std::max({static_grid.origin.y() + y * r - p.y(),
                                  p.y() - (static_grid.origin.y() + (y + 1) * r), 0.0});
      sep = std::min(sep, std::hypot(dx, dy));
    }
  }
  for (const DynamicDisc& d : discs) {
    sep = std::min(sep, (p - d.position(t)).norm() - d.radius);
  }
  if (separation) *separation = std::min(*separation, sep);
  return sep < inscribed;
}

}  // namespace detail

/// Discrete-time replanning loop with ideal command tracking: dynamic discs
/// are stamped into a working grid at each replan tick, the costmap rebuilt,
/// and a fresh plan + band computed from the robot's exact current state.
/// The robot follows the latest command list between ticks; if planning
/// fails it decelerates to rest along the current command.
inline SimResult simulate(const Scenario& scenario, const SimParams& params) {
  SimResult result;

  // Robot state
  double x = scenario.start.p.x(), y = scenario.start.p.y();
  double theta = scenario.start.theta;
  std::vector<Command> commands;
  size_t cmd_idx = 0;
  double cmd_elapsed = 0.0;
  bool halted = false;
  bool ever_planned = false;

  const double replan_period = 1.0 / params.replan_hz;
  double next_replan = 0.0;

  const auto current_command = [&]() -> Command {
    if (cmd_idx < commands.size()) return commands[cmd_idx];
    return Command{};  // rest
  };

  const auto world_velocity = [&]() {
    const Command c = current_command();
    const double cth = std::cos(theta), sth = std::sin(theta);
    return Vec2(c.v_x * cth - c.v_y * sth, c.v_x * sth + c.v_y * cth);
  };

  const auto stamp_dynamic = [&](double t) {
    OccupancyGrid g = scenario.grid;
    for (const DynamicDisc& d : scenario.dynamic_obstacles) {
      const Vec2 c = d.position(t);
      if ((c - Vec2(x, y)).norm() > scenario.sensing_range_m) continue;
      int cx0, cy0, cx1, cy1;
      g.world_to_cell(c - Vec2(d.radius, d.radius), cx0, cy0);
      g.world_to_cell(c + Vec2(d.radius, d.radius), cx1, cy1);
      for (int cy = std::max(0, cy0); cy <= std::min(g.height - 1, cy1); ++cy) {
        for (int cx = std::max(0, cx0); cx <= std::min(g.width - 1, cx1); ++cx) {
          if ((g.cell_center(cx, cy) - c).norm() <= d.radius) g.set_occupied(cx, cy, true);
        }
      }
    }
    return g;
  };

  const int steps = static_cast<int>(std::ceil(params.horizon_s / params.sim_dt));
  for (int step = 0; step <= steps; ++step) {
    const double t = step * params.sim_dt;
    std::string event;

    // Replan tick
    if (t >= next_replan - 1e-9) {
      next_replan += replan_period;
      const Vec2 v_world = world_velocity();
      const State robot_state{Vec2(x, y), v_world};

      const OccupancyGrid working = stamp_dynamic(t);
      const Costmap cm = build_costmap(working, scenario.inflation);
      const PlanResult plan_res =
          plan(robot_state, State{scenario.goal.p, scenario.goal.v}, cm, scenario.search);

      ReplanRecord rec;
      rec.t = t;
      rec.robot = robot_state;
      rec.success = plan_res.ok();
      ++result.replans;
      if (plan_res.ok() && !plan_res.trajectory.empty()) {
        rec.plan_start = plan_res.trajectory.start_state();
        rec.plan_cost = plan_res.cost;
        Band band =
            initialize_band(plan_res.trajectory, scenario.teb.dt_ref, theta, scenario.goal.theta);
        const OptimizeResult teb_res = optimize(band, cm, scenario.via_points, scenario.omni,
                                                scenario.teb_weights, scenario.teb);
        commands = extract_commands(teb_res.band);
        cmd_idx = 0;
        cmd_elapsed = 0.0;
        halted = false;
        ever_planned = true;
        event = "replan";
      } else if (plan_res.ok()) {
        // Zero-length plan: already at the goal.
        commands.clear();
        cmd_idx = 0;
        halted = false;
        ever_planned = true;
        event = "replan";
      } else {
        ++result.failed_replans;
        halted = true;
        event = "no_path";
      }
      result.replan_log.push_back(rec);
    }

    // Termination checks
    const Vec2 pos(x, y);
    if (detail::ground_truth_collision(scenario.grid, scenario.dynamic_obstacles, pos, t,
                                       scenario.inflation.l1, &result.min_obstacle_separation)) {
      result.status = SimStatus::Collision;
      result.collision_time = t;
      result.collision_position = pos;
      result.end_time = t;
      result.end_position = pos;
      result.trace.push_back({t, x, y, theta, current_command().v_x, current_command().v_y,
                              current_command().omega, "collision"});
      return result;
    }
    const Vec2 v_world = world_velocity();
    if ((pos - scenario.goal.p).norm() <= scenario.search.goal_pos_tol &&
        v_world.norm() <= scenario.search.goal_vel_tol && ever_planned) {
      result.status = SimStatus::ReachedGoal;
      result.end_time = t;
      result.end_position = pos;
      result.trace.push_back({t, x, y, theta, 0.0, 0.0, 0.0, "goal"});
      return result;
    }

    Command c = current_command();
    if (halted) {
      // Safety stop: bleed translational speed at a_x_max, rotation at
      // alpha_max, along the current command direction.
      const double speed = std::hypot(c.v_x, c.v_y);
      if (speed > 1e-9) {
        const double factor =
            std::max(0.0, speed - scenario.omni.a_x_max * params.sim_dt) / speed;
        c.v_x *= factor;
        c.v_y *= factor;
      } else {
        c.v_x = c.v_y = 0.0;
      }
      const double dw = scenario.omni.alpha_max * params.sim_dt;
      c.omega = std::abs(c.omega) <= dw ? 0.0 : c.omega - std::copysign(dw, c.omega);
      if (cmd_idx < commands.size()) {
        commands[cmd_idx].v_x = c.v_x;
        commands[cmd_idx].v_y = c.v_y;
        commands[cmd_idx].omega = c.omega;
      } else {
        commands = {c};
        cmd_idx = 0;
        cmd_elapsed = 0.0;
      }
    }

    result.trace.push_back({t, x, y, theta, c.v_x, c.v_y, c.omega, event});

    // Advance
    detail::integrate_twist(x, y, theta, c.v_x, c.v_y, c.omega, params.sim_dt);
    if (cmd_idx < commands.size() && !halted) {
      cmd_elapsed += params.sim_dt;
      while (cmd_idx < commands.size() && cmd_elapsed >= commands[cmd_idx].duration - 1e-12) {
        cmd_elapsed -= commands[cmd_idx].duration;
        ++cmd_idx;
      }
    }
  }

  result.status = halted ? SimStatus::NoPathHalt : SimStatus::HorizonExceeded;
  result.end_time = params.horizon_s;
  result.end_position = Vec2(x, y);
  return result;
}

}  // namespace kinonav
