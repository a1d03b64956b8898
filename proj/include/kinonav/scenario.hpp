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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinonav/costmap.hpp"
#include "kinonav/io.hpp"
#include "kinonav/kinodynamic_astar.hpp"
#include "kinonav/occupancy_grid.hpp"
#include "kinonav/teb.hpp"

namespace kinonav {

/// One moving disc obstacle: piecewise-linear schedule of its center.
struct DynamicDisc {
  double radius = 0.3;
  std::vector<std::pair<double, Vec2>> schedule;  // (t, center), t ascending

  Vec2 position(double t) const {
    if (schedule.empty()) return Vec2::Zero();
    if (t <= schedule.front().first) return schedule.front().second;
    for (size_t i = 0; i + 1 < schedule.size(); ++i) {
      const auto& [t0, p0] = schedule[i];
      const auto& [t1, p1] = schedule[i + 1];
      if (t <= t1) {
        const double f = (t - t0) / std::max(t1 - t0, 1e-12);
        return p0 + f * (p1 - p0);
      }
    }
    return schedule.back().second;
  }
};

struct ScenarioPose {
  Vec2 p = Vec2::Zero();
  double theta = 0.0;
  Vec2 v = Vec2::Zero();
};

/// Everything one planning/simulation run needs, units spelled out in the
/// JSON field names.
struct Scenario {
  OccupancyGrid grid;
  InflationParams inflation;
  ScenarioPose start;
  ScenarioPose goal;
  std::vector<Vec2> via_points;
  KinoLimits limits;        // front-end per-axis box
  OmniLimits omni;          // back-end body-frame limits
  SearchConfig search;      // tuned in apply_defaults
  TebWeights teb_weights;
  TebConfig teb;
  std::vector<DynamicDisc> dynamic_obstacles;
  double sensing_range_m = std::numeric_limits<double>::infinity();
  std::string name = "scenario";

  /// Fills the defaults that derive from other fields.
  void apply_defaults() {
    if (search.prune_pos_res <= 0.0) search.prune_pos_res = grid.resolution;
    if (search.prune_vel_res <= 0.0) search.prune_vel_res = limits.v_max / 5.0;
    if (teb_weights.obstacle_min_dist <= 0.0) {
      teb_weights.obstacle_min_dist = inflation.l1 + 0.1;
    }
    search.limits = limits;
  }

  Costmap build() const { return build_costmap(grid, inflation); }
};

namespace detail {

inline double jget(const nlohmann::json& j, const char* key, double def) {
  return j.contains(key) ? j.at(key).get<double>() : def;
}
inline int jget_int(const nlohmann::json& j, const char* key, int def) {
  return j.contains(key) ? j.at(key).get<int>() : def;
}
inline bool jget_bool(const nlohmann::json& j, const char* key, bool def) {
  return j.contains(key) ? j.at(key).get<bool>() : def;
}

inline ScenarioPose parse_pose(const nlohmann::json& j) {
  ScenarioPose p;
  p.p = Vec2(jget(j, "x_m", 0.0), jget(j, "y_m", 0.0));
  p.theta = jget(j, "theta_rad", 0.0);
  p.v = Vec2(jget(j, "vx_mps", 0.0), jget(j, "vy_mps", 0.0));
  return p;
}

}  // namespace detail

/// Parses a scenario JSON document. Map paths resolve relative to base_dir.
inline Scenario scenario_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir) {
  using detail::jget;
  using detail::jget_bool;
  using detail::jget_int;
  Scenario sc;
  try {
    if (!j.contains("map")) throw ConfigError("scenario: missing 'map'");
    const auto& jm = j.at("map");
    if (!jm.contains("pgm_path")) throw ConfigError("scenario: missing map.pgm_path");
    std::filesystem::path pgm = jm.at("pgm_path").get<std::string>();
    if (pgm.is_relative()) pgm = base_dir / pgm;
    const int threshold = jget_int(jm, "occupied_threshold", 127);
    sc.grid = load_pgm_file(pgm.string(), threshold);
    sc.grid.resolution = jget(jm, "resolution_m", 0.1);
    if (sc.grid.resolution <= 0.0) throw ConfigError("scenario: map.resolution_m must be > 0");
    sc.grid.origin = Vec2(jget(jm, "origin_x_m", 0.0), jget(jm, "origin_y_m", 0.0));

    if (j.contains("inflation")) {
      const auto& ji = j.at("inflation");
      sc.inflation.l1 = jget(ji, "l1_m", sc.inflation.l1);
      sc.inflation.l2 = jget(ji, "l2_m", sc.inflation.l2);
      sc.inflation.lambda_c = jget(ji, "lambda_c_per_m", sc.inflation.lambda_c);
      sc.inflation.c_max = jget(ji, "c_max", sc.inflation.c_max);
      sc.inflation.lethal_cost = jget(ji, "lethal_cost", sc.inflation.c_max);
    }
    sc.inflation.validate();

    if (!j.contains("start") || !j.contains("goal")) {
      throw ConfigError("scenario: missing 'start' or 'goal'");
    }
    sc.start = detail::parse_pose(j.at("start"));
    sc.goal = detail::parse_pose(j.at("goal"));

    if (j.contains("via_points_m")) {
      for (const auto& v : j.at("via_points_m")) {
        sc.via_points.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      }
    }

    if (j.contains("limits")) {
      const auto& jl = j.at("limits");
      sc.limits.u_max = jget(jl, "u_max_mps2", sc.limits.u_max);
      sc.limits.v_max = jget(jl, "v_max_mps", sc.limits.v_max);
      sc.omni.v_x_max = jget(jl, "v_x_max_mps", sc.omni.v_x_max);
      sc.omni.v_x_min = jget(jl, "v_x_min_mps", sc.omni.v_x_min);
      sc.omni.v_y_max = jget(jl, "v_y_max_mps", sc.omni.v_y_max);
      sc.omni.omega_max = jget(jl, "omega_max_radps", sc.omni.omega_max);
      sc.omni.a_x_max = jget(jl, "a_x_max_mps2", sc.omni.a_x_max);
      sc.omni.a_y_max = jget(jl, "a_y_max_mps2", sc.omni.a_y_max);
      sc.omni.alpha_max = jget(jl, "alpha_max_radps2", sc.omni.alpha_max);
    }

    if (j.contains("search")) {
      const auto& js = j.at("search");
      sc.search.rho = jget(js, "rho", sc.search.rho);
      sc.search.rho_c = jget(js, "rho_c", sc.search.rho_c);
      sc.search.tau = jget(js, "tau_s", sc.search.tau);
      sc.search.mu = jget_int(js, "mu", sc.search.mu);
      sc.search.prune_pos_res = jget(js, "prune_pos_res_m", 0.0);
      sc.search.prune_vel_res = jget(js, "prune_vel_res_mps", 0.0);
      sc.search.goal_pos_tol = jget(js, "goal_pos_tol_m", sc.search.goal_pos_tol);
      sc.search.goal_vel_tol = jget(js, "goal_vel_tol_mps", sc.search.goal_vel_tol);
      sc.search.max_expansions = jget_int(js, "max_expansions", sc.search.max_expansions);
      sc.search.try_goal_connection =
          jget_bool(js, "try_goal_connection", sc.search.try_goal_connection);
      sc.search.heuristic_includes_time =
          jget_bool(js, "heuristic_includes_time", sc.search.heuristic_includes_time);
      if (sc.search.rho <= 0.0 || sc.search.tau <= 0.0 || sc.search.mu < 1) {
        throw ConfigError("scenario: search needs rho > 0, tau_s > 0, mu >= 1");
      }
    } else {
      sc.search.prune_pos_res = 0.0;
      sc.search.prune_vel_res = 0.0;
    }

    if (j.contains("teb")) {
      const auto& jt = j.at("teb");
      sc.teb.dt_ref = jget(jt, "dt_ref_s", sc.teb.dt_ref);
      sc.teb.outer_iters = jget_int(jt, "outer_iters", sc.teb.outer_iters);
      sc.teb.inner_iters = jget_int(jt, "inner_iters", sc.teb.inner_iters);
      sc.teb.max_samples = jget_int(jt, "max_samples", sc.teb.max_samples);
      sc.teb_weights.penalty_epsilon = jget(jt, "penalty_epsilon", sc.teb_weights.penalty_epsilon);
      sc.teb_weights.obstacle_min_dist = jget(jt, "obstacle_min_dist_m", 0.0);
      if (jt.contains("weights")) {
        const auto& jw = jt.at("weights");
        sc.teb_weights.gamma_time = jget(jw, "time", sc.teb_weights.gamma_time);
        sc.teb_weights.gamma_obstacle = jget(jw, "obstacle", sc.teb_weights.gamma_obstacle);
        sc.teb_weights.gamma_viapoint = jget(jw, "viapoint", sc.teb_weights.gamma_viapoint);
        sc.teb_weights.gamma_vel_x = jget(jw, "vel_x", sc.teb_weights.gamma_vel_x);
        sc.teb_weights.gamma_vel_y = jget(jw, "vel_y", sc.teb_weights.gamma_vel_y);
        sc.teb_weights.gamma_vel_theta = jget(jw, "vel_theta", sc.teb_weights.gamma_vel_theta);
        sc.teb_weights.gamma_acc_x = jget(jw, "acc_x", sc.teb_weights.gamma_acc_x);
        sc.teb_weights.gamma_acc_y = jget(jw, "acc_y", sc.teb_weights.gamma_acc_y);
        sc.teb_weights.gamma_acc_theta = jget(jw, "acc_theta", sc.teb_weights.gamma_acc_theta);
        sc.teb_weights.gamma_yaw = jget(jw, "yaw", sc.teb_weights.gamma_yaw);
      }
    } else {
      sc.teb_weights.obstacle_min_dist = 0.0;
    }

    if (j.contains("dynamic_obstacles")) {
      for (const auto& jo : j.at("dynamic_obstacles")) {
        DynamicDisc disc;
        disc.radius = jget(jo, "radius_m", 0.3);
        for (const auto& jw : jo.at("schedule")) {
          disc.schedule.emplace_back(jw.at("t_s").get<double>(),
                                     Vec2(jw.at("x_m").get<double>(), jw.at("y_m").get<double>()));
        }
        if (disc.schedule.empty()) throw ConfigError("scenario: empty obstacle schedule");
        sc.dynamic_obstacles.push_back(std::move(disc));
      }
    }
    sc.sensing_range_m = jget(j, "sensing_range_m", sc.sensing_range_m);
    if (j.contains("name")) sc.name = j.at("name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: malformed json: ") + e.what());
  }

  sc.apply_defaults();

  // Endpoints must land inside the map.
  int ix, iy;
  sc.grid.world_to_cell(sc.start.p, ix, iy);
  if (!sc.grid.in_bounds(ix, iy)) throw ConfigError("scenario: start outside map");
  sc.grid.world_to_cell(sc.goal.p, ix, iy);
  if (!sc.grid.in_bounds(ix, iy)) throw ConfigError("scenario: goal outside map");
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario: cannot parse " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

}  // namespace kinonav
