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

#include <chrono>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kinonav/baseline_astar.hpp"
#include "kinonav/io.hpp"
#include "kinonav/kinodynamic_astar.hpp"
#include "kinonav/scenario.hpp"
#include "kinonav/simulation.hpp"
#include "kinonav/svg.hpp"
#include "kinonav/teb.hpp"

namespace kinonav {

// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNoPath = 2;
inline constexpr int kExitSolverAbort = 3;
inline constexpr int kExitCollision = 4;

namespace detail {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double traj_min_clearance(const Trajectory& traj, const Costmap& cm) {
  if (traj.empty()) return cm.clearance_at(traj.start_state().p);
  double best = std::numeric_limits<double>::infinity();
  for (double t : traj.sample_times(cm.resolution() / 2.0, 1.5)) {
    best = std::min(best, cm.clearance_at(traj.state_at(t).p));
  }
  return best;
}

inline double band_min_clearance(const Band& band, const Costmap& cm) {
  double best = std::numeric_limits<double>::infinity();
  const double step = cm.resolution() / 2.0;
  for (int i = 0; i + 1 < band.size(); ++i) {
    const Vec2 a = band.poses[i].position(), b = band.poses[i + 1].position();
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int k = 0; k <= n; ++k) {
      best = std::min(best, cm.clearance_at(a + (b - a) * (double(k) / n)));
    }
  }
  return best;
}

inline std::string trajectory_csv(const Trajectory& traj, double hz = 50.0) {
  std::string out = "t,x,y,vx,vy,ax,ay\n";
  const double dt = 1.0 / hz;
  const double dur = traj.duration();
  const int n = static_cast<int>(std::ceil(dur / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(dur, i * dt);
    const State s = traj.state_at(t);
    const Vec2 a = traj.accel_at(t);
    out += fmt(t) + "," + fmt(s.p.x()) + "," + fmt(s.p.y()) + "," + fmt(s.v.x()) + "," +
           fmt(s.v.y()) + "," + fmt(a.x()) + "," + fmt(a.y()) + "\n";
    if (t >= dur) break;
  }
  return out;
}

inline std::string commands_csv(const std::vector<Command>& cmds) {
  std::string out = "v_x,v_y,omega,dt\n";
  for (const Command& c : cmds) {
    out += fmt(c.v_x) + "," + fmt(c.v_y) + "," + fmt(c.omega) + "," + fmt(c.duration) + "\n";
  }
  return out;
}

inline std::vector<Vec2> traj_polyline(const Trajectory& traj, double spacing) {
  std::vector<Vec2> pts;
  for (double t : traj.sample_times(spacing, 1.0)) pts.push_back(traj.state_at(t).p);
  return pts;
}

inline void draw_scenario_base(SvgCanvas& svg, const Scenario& sc, const Costmap& cm) {
  svg.draw_costmap(cm);
  for (const Vec2& v : sc.via_points) svg.circle(v, 0.08, "#2e8b57");
  svg.circle(sc.start.p, 0.1, "#1e90ff");
  svg.circle(sc.goal.p, 0.1, "#d02090");
}

inline void draw_band(SvgCanvas& svg, const Band& band, const std::string& color) {
  std::vector<Vec2> pts;
  for (const Pose& p : band.poses) pts.push_back(p.position());
  svg.polyline(pts, color, 2.0);
  for (const Pose& p : band.poses) {
    const Vec2 tip = p.position() + 0.12 * Vec2(std::cos(p.theta), std::sin(p.theta));
    svg.line(p.position(), tip, color, 1.0);
  }
}

inline void write_timing(const std::filesystem::path& out_dir, double wall_ms,
                         double plan_ms = -1.0, double teb_ms = -1.0) {
  nlohmann::ordered_json j;
  j["wall_time_ms"] = wall_ms;
  if (plan_ms >= 0.0) j["plan_wall_time_ms"] = plan_ms;
  if (teb_ms >= 0.0) j["teb_wall_time_ms"] = teb_ms;
  atomic_write(out_dir / "timing.json", j.dump(2) + "\n");
}

}  // namespace detail

/// Debug export of the distance and cost fields as row-major CSV matrices.
inline void export_costmap_csv(const Costmap& cm, const std::filesystem::path& out_dir) {
  std::ostringstream dist, cost;
  cm.write_dist_csv(dist);
  cm.write_cost_csv(cost);
  atomic_write(out_dir / "costmap_dist.csv", dist.str());
  atomic_write(out_dir / "costmap_cost.csv", cost.str());
}

/// Front-end only: plan, then emit report.json, trajectory.csv and plan.svg.
inline int cmd_plan(const Scenario& scenario, const std::filesystem::path& out_dir,
                    bool export_costmap = false) {
  const detail::WallTimer timer;
  const Costmap cm = scenario.build();
  if (export_costmap) export_costmap_csv(cm, out_dir);
  const detail::WallTimer plan_timer;
  const PlanResult res = plan(State{scenario.start.p, scenario.start.v},
                              State{scenario.goal.p, scenario.goal.v}, cm, scenario.search);
  const double plan_ms = plan_timer.ms();

  nlohmann::ordered_json rep;
  rep["scenario"] = scenario.name;
  rep["command"] = "plan";
  rep["status"] = to_string(res.status);
  if (res.ok()) {
    rep["total_duration_s"] = res.trajectory.duration();
    rep["effort"] = res.effort;
    rep["soft_cost"] = res.soft_cost;
    rep["cost"] = res.cost;
    rep["path_length_m"] = res.trajectory.path_length();
    rep["min_clearance_m"] = detail::traj_min_clearance(res.trajectory, cm);
    rep["expansions"] = res.expansions;
    const State end = res.trajectory.empty() ? State{scenario.start.p, scenario.start.v}
                                             : res.trajectory.end_state();
    rep["goal_position_error_m"] = (end.p - scenario.goal.p).norm();
    rep["goal_velocity_error_mps"] = (end.v - scenario.goal.v).norm();
  } else {
    rep["message"] = res.message;
    rep["expansions"] = res.expansions;
    rep["best_frontier_f"] = res.best_frontier_f;
    rep["best_frontier_state"] = {res.best_frontier.p.x(), res.best_frontier.p.y(),
                                  res.best_frontier.v.x(), res.best_frontier.v.y()};
  }
  atomic_write(out_dir / "report.json", rep.dump(2) + "\n");
  detail::write_timing(out_dir, timer.ms(), plan_ms);

  if (!res.ok()) return kExitNoPath;

  atomic_write(out_dir / "trajectory.csv", detail::trajectory_csv(res.trajectory));
  const OccupancyGrid& g = scenario.grid;
  SvgCanvas svg(g.width * g.resolution, g.height * g.resolution);
  detail::draw_scenario_base(svg, scenario, cm);
  svg.polyline(detail::traj_polyline(res.trajectory, 0.05), "#1e60d0", 2.5);
  atomic_write(out_dir / "plan.svg", svg.finish());
  return kExitOk;
}

/// Full pipeline: plan, refine with the band optimizer, emit commands.
inline int cmd_optimize(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const detail::WallTimer timer;
  const Costmap cm = scenario.build();
  const detail::WallTimer plan_timer;
  const PlanResult res = plan(State{scenario.start.p, scenario.start.v},
                              State{scenario.goal.p, scenario.goal.v}, cm, scenario.search);
  const double plan_ms = plan_timer.ms();

  nlohmann::ordered_json rep;
  rep["scenario"] = scenario.name;
  rep["command"] = "optimize";
  if (!res.ok()) {
    rep["status"] = to_string(res.status);
    rep["message"] = res.message;
    atomic_write(out_dir / "report.json", rep.dump(2) + "\n");
    detail::write_timing(out_dir, timer.ms(), plan_ms);
    return kExitNoPath;
  }

  Band band = initialize_band(res.trajectory, scenario.teb.dt_ref, scenario.start.theta,
                              scenario.goal.theta);
  const double pre_duration = band.total_time();
  const detail::WallTimer teb_timer;
  OptimizeResult teb_res;
  try {
    teb_res = optimize(band, cm, scenario.via_points, scenario.omni, scenario.teb_weights,
                       scenario.teb);
  } catch (const SolverError& e) {
    rep["status"] = "solver_abort";
    rep["message"] = e.what();
    atomic_write(out_dir / "report.json", rep.dump(2) + "\n");
    detail::write_timing(out_dir, timer.ms(), plan_ms);
    return kExitSolverAbort;
  }
  const double teb_ms = teb_timer.ms();
  const std::vector<Command> cmds = extract_commands(teb_res.band);

  rep["status"] = "success";
  rep["pre_teb_duration_s"] = pre_duration;
  rep["post_teb_duration_s"] = teb_res.band.total_time();
  rep["front_end"] = {{"duration_s", res.trajectory.duration()},
                      {"effort", res.effort},
                      {"soft_cost", res.soft_cost},
                      {"cost", res.cost},
                      {"expansions", res.expansions},
                      {"min_clearance_m", detail::traj_min_clearance(res.trajectory, cm)}};
  rep["band"] = {{"poses", teb_res.band.size()},
                 {"initial_objective", teb_res.initial_objective},
                 {"final_objective", teb_res.final_objective},
                 {"outer_iterations", teb_res.outer_iterations},
                 {"converged", teb_res.converged},
                 {"min_clearance_m", detail::band_min_clearance(teb_res.band, cm)}};
  rep["commands"] = static_cast<int>(cmds.size());
  atomic_write(out_dir / "report.json", rep.dump(2) + "\n");
  detail::write_timing(out_dir, timer.ms(), plan_ms, teb_ms);

  atomic_write(out_dir / "trajectory.csv", detail::trajectory_csv(res.trajectory));
  atomic_write(out_dir / "commands.csv", detail::commands_csv(cmds));
  {
    std::ostringstream os;
    write_band_csv(os, teb_res.band);
    atomic_write(out_dir / "band.csv", os.str());
  }

  const OccupancyGrid& g = scenario.grid;
  SvgCanvas svg(g.width * g.resolution, g.height * g.resolution);
  detail::draw_scenario_base(svg, scenario, cm);
  svg.polyline(detail::traj_polyline(res.trajectory, 0.05), "#1e60d0", 2.0);
  detail::draw_band(svg, teb_res.band, "#d03030");
  atomic_write(out_dir / "plan.svg", svg.finish());
  return kExitOk;
}

/// Seeded comparison of the kinodynamic planner against grid A* plus the
/// trapezoidal executor on random start/goal pairs.
inline int cmd_bench(const Scenario& scenario, const std::filesystem::path& out_dir, int trials,
                     uint64_t seed) {
  const Costmap cm = scenario.build();
  std::mt19937_64 rng(seed);
  const OccupancyGrid& g = scenario.grid;
  std::uniform_real_distribution<double> ux(g.origin.x() + 1.0,
                                            g.origin.x() + g.width * g.resolution - 1.0);
  std::uniform_real_distribution<double> uy(g.origin.y() + 1.0,
                                            g.origin.y() + g.height * g.resolution - 1.0);
  const double min_separation = 0.35 * std::min(g.width, g.height) * g.resolution;
  const double clearance_needed = scenario.inflation.lethal_distance() + 3.0 * g.resolution;

  std::string csv =
      "scenario,trial,method,status,duration_s,effort,soft_cost,path_length_m,min_clearance_m,"
      "expansions,start_x,start_y,goal_x,goal_y\n";
  std::string timing_csv = "trial,method,wall_ms\n";

  for (int trial = 0; trial < trials; ++trial) {
    Vec2 start, goal;
    bool found = false;
    for (int attempt = 0; attempt < 5000; ++attempt) {
      start = Vec2(ux(rng), uy(rng));
      goal = Vec2(ux(rng), uy(rng));
      if (cm.clearance_at(start) < clearance_needed) continue;
      if (cm.clearance_at(goal) < clearance_needed) continue;
      if ((start - goal).norm() < min_separation) continue;
      found = true;
      break;
    }
    const std::string suffix = "," + fmt(start.x()) + "," + fmt(start.y()) + "," + fmt(goal.x()) +
                               "," + fmt(goal.y()) + "\n";
    if (!found) {
      csv += scenario.name + "," + std::to_string(trial) + ",kinodynamic_astar,sampling_failed" +
             ",,,,,," + suffix;
      csv += scenario.name + "," + std::to_string(trial) + ",baseline_astar,sampling_failed" +
             ",,,,,," + suffix;
      continue;
    }

    // (a) kinodynamic front end
    {
      const detail::WallTimer t;
      const PlanResult res = plan(State{start, Vec2::Zero()}, State{goal, Vec2::Zero()}, cm,
                                  scenario.search);
      timing_csv += std::to_string(trial) + ",kinodynamic_astar," + fmt(t.ms(), "%.3f") + "\n";
      csv += scenario.name + "," + std::to_string(trial) + ",kinodynamic_astar," +
             to_string(res.status);
      if (res.ok()) {
        csv += "," + fmt(res.trajectory.duration()) + "," + fmt(res.effort) + "," +
               fmt(res.soft_cost) + "," + fmt(res.trajectory.path_length()) + "," +
               fmt(detail::traj_min_clearance(res.trajectory, cm)) + "," +
               std::to_string(res.expansions) + suffix;
      } else {
        csv += ",,,,,," + suffix;
      }
    }

    // (b) grid A* + trapezoidal time parameterization
    {
      const detail::WallTimer t;
      const GridPath path = grid_plan(start, goal, cm);
      const TimedProfile prof = time_parameterize(path, scenario.limits);
      timing_csv += std::to_string(trial) + ",baseline_astar," + fmt(t.ms(), "%.3f") + "\n";
      csv += scenario.name + "," + std::to_string(trial) + ",baseline_astar," +
             (path.found ? "success" : "no_path");
      if (path.found) {
        double length = 0.0;
        for (size_t i = 1; i < path.polyline.size(); ++i) {
          length += (path.polyline[i] - path.polyline[i - 1]).norm();
        }
        double clearance = std::numeric_limits<double>::infinity();
        for (size_t i = 1; i < path.polyline.size(); ++i) {
          const Vec2 a = path.polyline[i - 1], b = path.polyline[i];
          const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() /
                                                               (cm.resolution() / 2.0))));
          for (int k = 0; k <= n; ++k) {
            clearance = std::min(clearance, cm.clearance_at(a + (b - a) * (double(k) / n)));
          }
        }
        csv += "," + fmt(prof.total_duration) + "," + fmt(prof.effort) + ",," + fmt(length) + "," +
               fmt(clearance) + ",0" + suffix;
      } else {
        csv += ",,,,,," + suffix;
      }
    }
  }
  atomic_write(out_dir / "bench.csv", csv);
  atomic_write(out_dir / "bench_timing.csv", timing_csv);
  return kExitOk;
}

/// Replanning simulation against the scenario's dynamic obstacles.
inline int cmd_simulate(const Scenario& scenario, const std::filesystem::path& out_dir,
                        const SimParams& params) {
  const detail::WallTimer timer;
  const SimResult res = simulate(scenario, params);

  std::string trace = "t,x,y,theta,v_x,v_y,omega,event\n";
  for (const TraceRow& row : res.trace) {
    trace += fmt(row.t) + "," + fmt(row.x) + "," + fmt(row.y) + "," + fmt(row.theta) + "," +
             fmt(row.v_x) + "," + fmt(row.v_y) + "," + fmt(row.omega) + "," + row.event + "\n";
  }
  atomic_write(out_dir / "sim_trace.csv", trace);

  double continuity = 0.0;
  for (const ReplanRecord& rec : res.replan_log) {
    if (!rec.success) continue;
    continuity = std::max(continuity, (rec.robot.p - rec.plan_start.p).norm());
    continuity = std::max(continuity, (rec.robot.v - rec.plan_start.v).norm());
  }

  nlohmann::ordered_json rep;
  rep["scenario"] = scenario.name;
  rep["command"] = "simulate";
  rep["status"] = to_string(res.status);
  rep["end_time_s"] = res.end_time;
  rep["end_position_m"] = {res.end_position.x(), res.end_position.y()};
  rep["replans"] = res.replans;
  rep["failed_replans"] = res.failed_replans;
  rep["min_obstacle_separation_m"] = res.min_obstacle_separation;
  rep["replan_continuity_error"] = continuity;
  if (res.status == SimStatus::Collision) {
    rep["collision_time_s"] = res.collision_time;
    rep["collision_position_m"] = {res.collision_position.x(), res.collision_position.y()};
  }
  atomic_write(out_dir / "report.json", rep.dump(2) + "\n");
  detail::write_timing(out_dir, timer.ms());

  const OccupancyGrid& g = scenario.grid;
  const Costmap cm = scenario.build();
  SvgCanvas svg(g.width * g.resolution, g.height * g.resolution);
  detail::draw_scenario_base(svg, scenario, cm);
  std::vector<Vec2> executed;
  for (const TraceRow& row : res.trace) executed.emplace_back(row.x, row.y);
  svg.polyline(executed, "#1e60d0", 2.0);
  for (const DynamicDisc& d : scenario.dynamic_obstacles) {
    std::vector<Vec2> sched;
    for (const auto& [t, p] : d.schedule) sched.push_back(p);
    svg.polyline(sched, "#909090", 1.0);
    svg.circle(d.position(res.end_time), d.radius, "#b22222");
  }
  atomic_write(out_dir / "plan.svg", svg.finish());

  switch (res.status) {
    case SimStatus::ReachedGoal: return kExitOk;
    case SimStatus::Collision: return kExitCollision;
    default: return kExitNoPath;
  }
}

}  // namespace kinonav
