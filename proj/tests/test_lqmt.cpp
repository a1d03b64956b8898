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

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kinonav/lqmt.hpp"
#include "oracles.hpp"

using namespace kinonav;

namespace {

BoundaryPair random_pair(std::mt19937& rng, double pos_range = 5.0, double vel_range = 1.0) {
  std::uniform_real_distribution<double> p(-pos_range, pos_range), v(-vel_range, vel_range);
  BoundaryPair bp;
  bp.current = State{{p(rng), p(rng)}, {v(rng), v(rng)}};
  bp.goal = State{{p(rng), p(rng)}, {v(rng), v(rng)}};
  return bp;
}

double scan_total_cost(const BoundaryPair& bp, double rho, double t) {
  const OptimalConnection c = connection_for_T(bp, t, rho);
  return c.total_cost;
}

}  // namespace

TEST_CASE("connection: boundary conditions hold for random pairs and durations") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> dur(0.1, 8.0);
  for (int trial = 0; trial < 500; ++trial) {
    const BoundaryPair bp = random_pair(rng);
    const double t = dur(rng);
    const OptimalConnection conn = connection_for_T(bp, t);
    CHECK((conn.position(bp, t) - bp.goal.p).norm() < 1e-9);
    CHECK((conn.velocity(bp, t) - bp.goal.v).norm() < 1e-9);
    CHECK((conn.position(bp, 0.0) - bp.current.p).norm() < 1e-12);
    CHECK((conn.velocity(bp, 0.0) - bp.current.v).norm() < 1e-12);
  }
}

TEST_CASE("connection: matching coasting goal needs zero control") {
  BoundaryPair bp;
  bp.current = State{{1.0, -2.0}, {0.4, 0.3}};
  const double t = 2.5;
  bp.goal = State{{bp.current.p + bp.current.v * t}, {bp.current.v}};
  const OptimalConnection conn = connection_for_T(bp, t);
  CHECK(conn.alpha.norm() < 1e-12);
  CHECK(conn.beta.norm() < 1e-12);
  CHECK(conn.control_cost < 1e-12);
}

TEST_CASE("connection: 1m rest-to-rest control cost is 12/T^3") {
  BoundaryPair bp;
  bp.goal = State{{1.0, 0.0}, {0.0, 0.0}};
  const OptimalConnection conn = connection_for_T(bp, 2.0);
  CHECK(conn.control_cost == Catch::Approx(12.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("connection: closed-form cost equals the integral of squared acceleration") {
  std::mt19937 rng(103);
  std::uniform_real_distribution<double> dur(0.2, 6.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const BoundaryPair bp = random_pair(rng);
    const double t = dur(rng);
    const OptimalConnection conn = connection_for_T(bp, t);
    const auto acc_sq = [&](double s) { return conn.acceleration(s).squaredNorm(); };
    const double numeric = oracles::simpson(acc_sq, 0.0, t, 512);
    CHECK(conn.control_cost == Catch::Approx(numeric).epsilon(1e-8).margin(1e-10));
  }
}

TEST_CASE("optimal_duration: analytic 1m rest-to-rest case") {
  BoundaryPair bp;
  bp.goal = State{{1.0, 0.0}, {0.0, 0.0}};
  const OptimalConnection conn = optimal_duration(bp, 1.0);
  CHECK(conn.T == Catch::Approx(std::pow(36.0, 0.25)).margin(1e-6));
  CHECK(conn.total_cost == Catch::Approx(8.0 / std::sqrt(6.0)).margin(1e-6));
  CHECK(heuristic(bp, 1.0) == Catch::Approx(3.2660).margin(1e-4));
}

TEST_CASE("optimal_duration: matches a dense scan argmin") {
  std::mt19937 rng(107);
  std::uniform_real_distribution<double> rho_dist(0.2, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const BoundaryPair bp = random_pair(rng, 4.0, 1.0);
    if ((bp.goal.p - bp.current.p).norm() < 1e-6) continue;
    const double rho = rho_dist(rng);
    const OptimalConnection conn = optimal_duration(bp, rho);
    const auto scan = oracles::grid_scan_argmin(
        [&](double t) { return scan_total_cost(bp, rho, t); }, 1e-3, 20.0, 1e-4);
    CHECK(std::abs(conn.T - scan.t) < 1e-3);
    CHECK(conn.total_cost <= scan.value + 1e-9);
  }
}

TEST_CASE("optimal_duration: coasting-reachable goals cost at most the coasting time") {
  // Zero control at T0 = |dp|/|v| is feasible, so the optimum can only be
  // cheaper; for small rho the optimum approaches the coasting connection.
  BoundaryPair bp;
  bp.current = State{{0.0, 0.0}, {0.5, 0.0}};
  bp.goal = State{{2.0, 0.0}, {0.5, 0.0}};
  const double t0 = 4.0;
  for (double rho : {0.01, 0.1, 1.0, 10.0}) {
    const OptimalConnection conn = optimal_duration(bp, rho);
    CHECK(conn.total_cost <= rho * t0 + 1e-9);
    const auto scan = oracles::grid_scan_argmin(
        [&](double t) { return scan_total_cost(bp, rho, t); }, 1e-3, 20.0, 1e-4);
    CHECK(std::abs(conn.T - scan.t) < 1e-3);
  }
  const OptimalConnection small_rho = optimal_duration(bp, 1e-4);
  CHECK(small_rho.T == Catch::Approx(t0).margin(0.05));
}

TEST_CASE("optimal_duration: degenerate identical states") {
  BoundaryPair bp;
  bp.current = State{{1.0, 1.0}, {0.0, 0.0}};
  bp.goal = bp.current;
  const OptimalConnection conn = optimal_duration(bp, 2.0);
  CHECK(conn.degenerate);
  CHECK(conn.T == Catch::Approx(1e-3));
  CHECK(conn.total_cost == Catch::Approx(2.0 * 1e-3).margin(1e-9));
  CHECK(heuristic(bp, 2.0) < 0.01);
}

TEST_CASE("heuristic: time-free variant is smaller but shares the optimal duration") {
  std::mt19937 rng(131);
  for (int trial = 0; trial < 50; ++trial) {
    const BoundaryPair bp = random_pair(rng, 3.0, 0.8);
    if ((bp.goal.p - bp.current.p).norm() < 1e-6) continue;
    const double rho = 1.0;
    const OptimalConnection conn = optimal_duration(bp, rho);
    const double with_time = heuristic(bp, rho, true);
    const double control_only = heuristic(bp, rho, false);
    CHECK(control_only <= with_time);
    CHECK(with_time == Catch::Approx(conn.total_cost).epsilon(1e-12));
    CHECK(control_only == Catch::Approx(conn.control_cost).margin(1e-12));
  }
}

TEST_CASE("heuristic: monotone in distance for rest-to-rest problems") {
  for (double scale : {0.5, 1.0, 2.0, 4.0}) {
    BoundaryPair a, b;
    a.goal = State{{scale, 0.0}, {0.0, 0.0}};
    b.goal = State{{2.0 * scale, 0.0}, {0.0, 0.0}};
    CHECK(heuristic(a, 1.0) < heuristic(b, 1.0));
  }
}

TEST_CASE("heuristic: axis separability") {
  std::mt19937 rng(113);
  std::uniform_real_distribution<double> p(-3.0, 3.0), v(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    BoundaryPair bp;
    bp.current = State{{p(rng), 0.0}, {v(rng), 0.0}};
    bp.goal = State{{p(rng), 0.0}, {v(rng), 0.0}};
    BoundaryPair only_x = bp;  // y axis already has zero motion
    CHECK(heuristic(bp, 1.0) == Catch::Approx(heuristic(only_x, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("heuristic: admissible against random smooth connectors") {
  // Random quintic connectors satisfying the same boundary conditions can
  // never beat the unconstrained optimum.
  std::mt19937 rng(127);
  std::uniform_real_distribution<double> dur(0.5, 8.0), free(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const BoundaryPair bp = random_pair(rng, 3.0, 0.8);
    const double rho = 1.0;
    const double h = heuristic(bp, rho);
    for (int k = 0; k < 100; ++k) {
      const double t_total = dur(rng);
      double cost = rho * t_total;
      for (int d = 0; d < 2; ++d) {
        // Quintic with a free midpoint-ish parameter: p(0), v(0), p(T), v(T)
        // pinned; interior shape randomized through one extra coefficient.
        const double p0 = bp.current.p[d], v0 = bp.current.v[d];
        const double p1 = bp.goal.p[d], v1 = bp.goal.v[d];
        const double c5 = free(rng) * 0.1;
        // p(t) = p0 + v0 t + c2 t^2 + c3 t^3 + c5 t^5 with c2, c3 solving the
        // boundary conditions given c5.
        const double T = t_total;
        const double rhs_p = p1 - p0 - v0 * T - c5 * std::pow(T, 5);
        const double rhs_v = v1 - v0 - 5.0 * c5 * std::pow(T, 4);
        // [T^2 T^3; 2T 3T^2] [c2 c3]^T = [rhs_p rhs_v]^T
        const double det = T * T * 3.0 * T * T - T * T * T * 2.0 * T;
        const double c2 = (rhs_p * 3.0 * T * T - T * T * T * rhs_v) / det;
        const double c3 = (T * T * rhs_v - 2.0 * T * rhs_p) / det;
        const auto acc = [&](double t) {
          return 2.0 * c2 + 6.0 * c3 * t + 20.0 * c5 * t * t * t;
        };
        cost += oracles::simpson([&](double t) { return acc(t) * acc(t); }, 0.0, T, 256);
      }
      CHECK(h <= cost + 1e-9);
    }
  }
}
