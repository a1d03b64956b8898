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

#include "kinonav/costmap.hpp"
#include "kinonav/primitives.hpp"
#include "oracles.hpp"

using namespace kinonav;

namespace {

Costmap empty_map(int side = 40, double res = 0.25) {
  OccupancyGrid g;
  g.width = side;
  g.height = side;
  g.resolution = res;
  g.cells.assign(g.cell_count(), 0);
  return build_costmap(g, InflationParams{});
}

Costmap map_with_block(int side, double res, int bx0, int bx1, int by0, int by1) {
  OccupancyGrid g;
  g.width = side;
  g.height = side;
  g.resolution = res;
  g.cells.assign(g.cell_count(), 0);
  for (int y = by0; y <= by1; ++y)
    for (int x = bx0; x <= bx1; ++x) g.set_occupied(x, y, true);
  return build_costmap(g, InflationParams{});
}

}  // namespace

TEST_CASE("lattice: size, spacing and ordering") {
  const auto l1 = control_lattice(1.0, 1);
  REQUIRE(l1.size() == 9);
  CHECK(l1.front() == ControlInput(-1.0, -1.0));
  CHECK(l1.back() == ControlInput(1.0, 1.0));
  CHECK(l1[4] == ControlInput(0.0, 0.0));

  const auto l2 = control_lattice(1.0, 2);
  REQUIRE(l2.size() == 25);
  bool has_half = false;
  for (const auto& u : l2) has_half |= (u == ControlInput(-0.5, 0.5));
  CHECK(has_half);
}

TEST_CASE("lattice: symmetric under negation") {
  for (int mu : {1, 2, 3, 5}) {
    const auto lat = control_lattice(0.7, mu);
    for (const auto& u : lat) {
      bool found = false;
      for (const auto& v : lat) found |= ((u + v).norm() < 1e-15);
      CHECK(found);
    }
  }
}

TEST_CASE("propagate: coasting and unit-accel examples") {
  const State coasting = propagate(State{{0, 0}, {1, 0}}, ControlInput(0, 0), 0.5);
  CHECK(coasting.p.x() == Catch::Approx(0.5));
  CHECK(coasting.v.x() == 1.0);

  const State accel = propagate(State{{0, 0}, {0, 0}}, ControlInput(1, 0), 1.0);
  CHECK(accel.p.x() == Catch::Approx(0.5));
  CHECK(accel.v.x() == Catch::Approx(1.0));
}

TEST_CASE("propagate: matches RK4 integration of the state-space model") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> val(-2.0, 2.0), dur(0.01, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const State x0{{val(rng), val(rng)}, {val(rng), val(rng)}};
    const ControlInput u(val(rng), val(rng));
    const double t = dur(rng);
    const State got = propagate(x0, u, t);
    const oracles::Vec4 ref = oracles::rk4_double_integrator(
        oracles::Vec4(x0.p.x(), x0.p.y(), x0.v.x(), x0.v.y()), u, t);
    CHECK(std::abs(got.p.x() - ref[0]) < 1e-9);
    CHECK(std::abs(got.p.y() - ref[1]) < 1e-9);
    CHECK(std::abs(got.v.x() - ref[2]) < 1e-9);
    CHECK(std::abs(got.v.y() - ref[3]) < 1e-9);
  }
}

TEST_CASE("propagate: semigroup and translation equivariance") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> val(-1.5, 1.5), dur(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const State x0{{val(rng), val(rng)}, {val(rng), val(rng)}};
    const ControlInput u(val(rng), val(rng));
    const double s = dur(rng), t = dur(rng);
    const State two_step = propagate(propagate(x0, u, s), u, t);
    const State one_step = propagate(x0, u, s + t);
    CHECK((two_step.p - one_step.p).norm() < 1e-12);
    CHECK((two_step.v - one_step.v).norm() < 1e-12);

    const Vec2 shift(val(rng), val(rng));
    State shifted = x0;
    shifted.p += shift;
    const State a = propagate(shifted, u, t);
    const State b = propagate(x0, u, t);
    CHECK((a.p - (b.p + shift)).norm() < 1e-12);
    CHECK((a.v - b.v).norm() < 1e-12);
  }
}

TEST_CASE("primitive_cost: closed-form values") {
  CHECK(primitive_cost(ControlInput(0, 0), 0.5, 1.0) == Catch::Approx(0.5));
  CHECK(primitive_cost(ControlInput(1, 1), 0.5, 1.0) == Catch::Approx(1.5));
  CHECK(primitive_cost(ControlInput(0.3, -0.4), 2.0, 0.0) == Catch::Approx(0.25 * 2.0));
}

TEST_CASE("primitive_cost: bounded below by rho tau with equality at zero input") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> val(-1.0, 1.0), dur(0.01, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ControlInput u(val(rng), val(rng));
    const double tau = dur(rng), rho = 0.5 + dur(rng);
    CHECK(primitive_cost(u, tau, rho) >= rho * tau - 1e-12);
  }
  CHECK(primitive_cost(ControlInput(0, 0), 0.7, 2.0) == Catch::Approx(1.4));
}

TEST_CASE("dynamic_feasible: affine velocity checked at the endpoints") {
  const KinoLimits lim{1.0, 0.5};
  CHECK(dynamic_feasible({State{{0, 0}, {0.5, 0}}, ControlInput(-1, 0), 1.0}, lim));
  CHECK_FALSE(
      dynamic_feasible({State{{0, 0}, {0.5, 0}}, ControlInput(1, 0), 1.0}, KinoLimits{1.0, 0.75}));
  CHECK_FALSE(dynamic_feasible({State{{0, 0}, {0, 0}}, ControlInput(1.5, 0), 0.5}, lim));
}

TEST_CASE("dynamic_feasible: agrees with dense sampling") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> vel(-1.0, 1.0), acc(-1.5, 1.5), dur(0.05, 2.0);
  const KinoLimits lim{1.2, 0.8};
  for (int trial = 0; trial < 1000; ++trial) {
    const MotionPrimitive mp{State{{0, 0}, {vel(rng), vel(rng)}},
                             ControlInput(acc(rng), acc(rng)), dur(rng)};
    bool dense_ok = std::abs(mp.u.x()) <= lim.u_max && std::abs(mp.u.y()) <= lim.u_max;
    for (int i = 0; i <= 10000 && dense_ok; ++i) {
      const Vec2 v = mp.x0.v + mp.u * (mp.tau * i / 10000.0);
      dense_ok = std::abs(v.x()) <= lim.v_max && std::abs(v.y()) <= lim.v_max;
    }
    CHECK(dynamic_feasible(mp, lim) == dense_ok);
  }
}

TEST_CASE("collision_free: free region accepts, crossing an obstacle rejects") {
  const KinoLimits lim{1.0, 0.75};
  const Costmap open = empty_map();
  CHECK(collision_free({State{{2, 2}, {0.5, 0}}, ControlInput(0, 0), 1.0}, open, lim));

  // Block in the middle of the map; a straight primitive through it must fail.
  const Costmap blocked = map_with_block(40, 0.25, 18, 22, 18, 22);
  const MotionPrimitive through{State{{2.0, 5.06}, {0.7, 0}}, ControlInput(0, 0), 0.5};
  // midpoint near x=2.2 still left of the block; use a longer, faster check
  const MotionPrimitive crossing{State{{4.0, 5.06}, {0.75, 0}}, ControlInput(0, 0), 2.0};
  CHECK_FALSE(collision_free(crossing, blocked, lim));
  (void)through;
}

TEST_CASE("collision_free: monotone in obstacles") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> pos(1.0, 9.0), vel(-0.7, 0.7), acc(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    OccupancyGrid g;
    g.width = g.height = 40;
    g.resolution = 0.25;
    g.cells.assign(g.cell_count(), 0);
    std::bernoulli_distribution occ(0.02);
    for (auto& c : g.cells) c = occ(rng) ? 1 : 0;
    const Costmap sparse = build_costmap(g, InflationParams{});
    OccupancyGrid g2 = g;
    std::bernoulli_distribution extra(0.02);
    for (auto& c : g2.cells) c = c | (extra(rng) ? 1 : 0);
    const Costmap dense = build_costmap(g2, InflationParams{});

    const MotionPrimitive mp{State{{pos(rng), pos(rng)}, {vel(rng), vel(rng)}},
                             ControlInput(acc(rng), acc(rng)), 0.5};
    const KinoLimits lim{1.0, 0.75};
    if (!collision_free(mp, sparse, lim)) {
      CHECK_FALSE(collision_free(mp, dense, lim));
    }
  }
}

TEST_CASE("collision_free: agrees with a 10x oversampled oracle away from boundaries") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> pos(1.5, 8.5), vel(-0.75, 0.75), acc(-1, 1);
  const KinoLimits lim{1.0, 0.75};
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    OccupancyGrid g;
    g.width = g.height = 40;
    g.resolution = 0.25;
    g.cells.assign(g.cell_count(), 0);
    std::bernoulli_distribution occ(0.03);
    for (auto& c : g.cells) c = occ(rng) ? 1 : 0;
    const Costmap cm = build_costmap(g, InflationParams{});

    MotionPrimitive mp{State{{pos(rng), pos(rng)}, {vel(rng), vel(rng)}},
                       ControlInput(acc(rng), acc(rng)), 0.5};
    if (!dynamic_feasible(mp, lim)) continue;

    // Oracle: 10x denser sampling of exact lethality, with the margin guard:
    // skip instances where any oracle sample sits within R/2 of a lethal
    // cell boundary (geometric point-to-rectangle distance).
    const double r = cm.resolution();
    const int base = std::max(1, static_cast<int>(std::ceil(mp.tau * lim.v_max / r)));
    const int dense_n = base * 10;
    const auto rect_distance = [&](const Vec2& p, int cx, int cy) {
      const double dx = std::max({cx * r - p.x(), p.x() - (cx + 1) * r, 0.0});
      const double dy = std::max({cy * r - p.y(), p.y() - (cy + 1) * r, 0.0});
      return std::hypot(dx, dy);
    };
    const auto boundary_clearance = [&](const Vec2& p) {
      // Distance from p to the lethal region boundary: outside the region it
      // is the distance to the nearest lethal rect; inside, the distance to
      // the nearest non-lethal rect (or map edge).
      const bool in_lethal = cm.is_lethal(p);
      double best = std::min({p.x(), p.y(), g.width * r - p.x(), g.height * r - p.y()});
      for (int cy = 0; cy < g.height; ++cy) {
        for (int cx = 0; cx < g.width; ++cx) {
          const bool lethal_cell = cm.cost_cell(cx, cy) >= cm.params().lethal_cost;
          if (lethal_cell == in_lethal) continue;
          best = std::min(best, rect_distance(p, cx, cy));
        }
      }
      return best;
    };
    bool guard_ok = true;
    bool oracle_free = true;
    for (int i = 0; i <= dense_n; ++i) {
      const double t = mp.tau * i / dense_n;
      const Vec2 p = mp.x0.p + mp.x0.v * t + 0.5 * mp.u * t * t;
      if (cm.is_lethal(p)) oracle_free = false;
      if (boundary_clearance(p) < r / 2.0) {
        guard_ok = false;
        break;
      }
    }
    if (!guard_ok) continue;
    ++checked;
    CHECK(collision_free(mp, cm, lim) == oracle_free);
  }
  CHECK(checked > 100);
}

TEST_CASE("soft_cost: zero in free space and for stationary primitives") {
  const Costmap open = empty_map();
  const KinoLimits lim{1.0, 0.75};
  CHECK(soft_cost({State{{3, 3}, {0.5, 0.1}}, ControlInput(0.2, 0), 0.5}, open, lim) == 0.0);

  const Costmap blocked = map_with_block(40, 0.25, 18, 22, 18, 22);
  CHECK(soft_cost({State{{5.06, 4.0}, {0, 0}}, ControlInput(0, 0), 0.5}, blocked, lim) == 0.0);
}

TEST_CASE("soft_cost: scales linearly in C_max") {
  const KinoLimits lim{1.0, 0.75};
  OccupancyGrid g;
  g.width = g.height = 40;
  g.resolution = 0.25;
  g.cells.assign(g.cell_count(), 0);
  for (int y = 16; y <= 24; ++y) g.set_occupied(20, y, true);
  InflationParams p1;
  InflationParams p2;
  p2.c_max = 250.0;
  p2.lethal_cost = 250.0;
  const Costmap cm1 = build_costmap(g, p1);
  const Costmap cm2 = build_costmap(g, p2);
  const MotionPrimitive mp{State{{4.3, 5.06}, {0.5, 0}}, ControlInput(0, 0.2), 0.5};
  const double s1 = soft_cost(mp, cm1, lim);
  const double s2 = soft_cost(mp, cm2, lim);
  REQUIRE(s1 > 0.0);
  CHECK(s2 == Catch::Approx(s1 * 2.5).epsilon(1e-12));
}

TEST_CASE("soft_cost: approximates the fine-quadrature line integral") {
  // Primitives skim past a small obstacle through its inflation ring,
  // entering and leaving the band within [0, tau] and staying clear of the
  // lethal core, so the endpoint-weighted discretization has no boundary
  // overshoot to fight.
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> offset(0.45, 1.1), vel(0.6, 0.75), lat(-0.03, 0.03);
  const KinoLimits lim{1.0, 0.75};
  OccupancyGrid g;
  g.width = g.height = 140;
  g.resolution = 0.1;
  g.cells.assign(g.cell_count(), 0);
  g.set_occupied(70, 70, true);  // obstacle at (7.05, 7.05)
  InflationParams params;
  params.l2 = 1.5;
  params.lambda_c = 10.0 / 3.0;  // decay scale of ~3 cells, tiny step at l2
  const Costmap cm = build_costmap(g, params);

  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 80; ++trial) {
    const double side = rng() % 2 ? 1.0 : -1.0;
    MotionPrimitive mp{State{{4.6, 7.05 + side * offset(rng)}, {vel(rng), lat(rng)}},
                       ControlInput(lat(rng), lat(rng)), 6.0};
    const auto integrand = [&](double t) {
      const Vec2 p = mp.x0.p + mp.x0.v * t + 0.5 * mp.u * t * t;
      const Vec2 v = mp.x0.v + mp.u * t;
      return cm.cost_at(p) * v.norm();
    };
    // Keep only genuine band crossings: negligible cost at both endpoints,
    // no lethal contact, and a meaningful integral.
    if (!collision_free(mp, cm, lim) || !dynamic_feasible(mp, lim)) continue;
    const double oracle = oracles::simpson(integrand, 0.0, mp.tau, 20000);
    if (oracle < 1e-3) continue;
    if (integrand(0.0) > 1e-6 || integrand(mp.tau) > 1e-6) continue;
    ++checked;
    const double got = soft_cost(mp, cm, lim);
    CHECK(got == Catch::Approx(oracle).epsilon(0.10));
  }
  CHECK(checked >= 50);
}
