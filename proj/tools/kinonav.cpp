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

#include <CLI11.hpp>
#include <iostream>

#include "kinonav/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kinonav: kinodynamic navigation planning toolkit"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  int trials = 4;
  double replan_hz = 2.0;
  double horizon_s = 120.0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Random seed");
  };

  bool export_costmap = false;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Run the kinodynamic front-end planner");
  add_common(plan_cmd);
  plan_cmd->add_flag("--export-costmap", export_costmap,
                     "Also write costmap_dist.csv and costmap_cost.csv");
  CLI::App* optimize_cmd =
      app.add_subcommand("optimize", "Plan, then refine with the elastic-band back end");
  add_common(optimize_cmd);
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Compare the kinodynamic planner against grid A* + trapezoid");
  add_common(bench_cmd);
  bench_cmd->add_option("--trials", trials, "Number of random start/goal pairs");
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Replanning simulation with dynamic obstacles");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--replan-hz", replan_hz, "Replanning frequency, Hz");
  simulate_cmd->add_option("--horizon", horizon_s, "Simulation horizon, s");

  CLI11_PARSE(app, argc, argv);

  try {
    const kinonav::Scenario scenario = kinonav::load_scenario(scenario_path);
    if (plan_cmd->parsed()) return kinonav::cmd_plan(scenario, out_dir, export_costmap);
    if (optimize_cmd->parsed()) return kinonav::cmd_optimize(scenario, out_dir);
    if (bench_cmd->parsed()) return kinonav::cmd_bench(scenario, out_dir, trials, seed);
    if (simulate_cmd->parsed()) {
      kinonav::SimParams params;
      params.replan_hz = replan_hz;
      params.horizon_s = horizon_s;
      return kinonav::cmd_simulate(scenario, out_dir, params);
    }
  } catch (const kinonav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kinonav::kExitConfigError;
  } catch (const kinonav::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kinonav::kExitConfigError;
  } catch (const kinonav::SolverError& e) {
    std::cerr << "solver abort: " << e.what() << "\n";
    return kinonav::kExitSolverAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kinonav::kExitConfigError;
  }
  return kinonav::kExitConfigError;
}
