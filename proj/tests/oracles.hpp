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
//
// Independent brute-force oracles used by the test suites. Nothing here may
// call into the implementation paths it is checking.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace oracles {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;

// ---------------------------------------------------------------------------
// RK4 integration of the double integrator xdot = Ax + Bu.

inline Vec4 rk4_double_integrator(const Vec4& x0, const Vec2& u, double t, int steps = 2000) {
  const auto f = [&](const Vec4& x) { return Vec4(x[2], x[3], u[0], u[1]); };
  Vec4 x = x0;
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec4 k1 = f(x);
    const Vec4 k2 = f(x + 0.5 * h * k1);
    const Vec4 k3 = f(x + 0.5 * h * k2);
    const Vec4 k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

// ---------------------------------------------------------------------------
// O(N^2) nearest-occupied scan (cell centers, in meters).

inline std::vector<double> brute_distance_transform(int width, int height, double resolution,
                                                    const std::vector<uint8_t>& occupied) {
  std::vector<double> dist(static_cast<size_t>(width) * height,
                           std::numeric_limits<double>::infinity());
  std::vector<std::pair<int, int>> obstacles;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (occupied[static_cast<size_t>(y) * width + x]) obstacles.emplace_back(x, y);
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [ox, oy] : obstacles) {
        const double d = std::hypot(double(x - ox), double(y - oy));
        best = std::min(best, d);
      }
      dist[static_cast<size_t>(y) * width + x] = best * resolution;
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Composite Simpson quadrature.

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

// ---------------------------------------------------------------------------
// Dense scalar scan argmin over a T grid.

struct ScanResult {
  double t = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

inline ScanResult grid_scan_argmin(const std::function<double(double)>& f, double lo, double hi,
                                   double step) {
  ScanResult best;
  for (double t = lo; t <= hi; t += step) {
    const double v = f(t);
    if (v < best.value) {
      best.value = v;
      best.t = t;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dijkstra over the same 8-connected soft-weighted grid as the baseline
// planner (independent search implementation, no heuristic).

inline double dijkstra_grid_cost(int width, int height, double resolution,
                                 const std::function<bool(int, int)>& blocked,
                                 const std::function<double(int, int)>& cell_cost, double c_max,
                                 double w_c, int sx, int sy, int gx, int gy) {
  const auto index = [&](int x, int y) { return static_cast<size_t>(y) * width + x; };
  std::vector<double> dist(static_cast<size_t>(width) * height,
                           std::numeric_limits<double>::infinity());
  using Item = std::pair<double, size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[index(sx, sy)] = 0.0;
  pq.emplace(0.0, index(sx, sy));
  static const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!pq.empty()) {
    const auto [d, idx] = pq.top();
    pq.pop();
    if (d > dist[idx] + 1e-15) continue;
    const int cx = static_cast<int>(idx % width), cy = static_cast<int>(idx / width);
    if (cx == gx && cy == gy) return d;
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + dx8[k], ny = cy + dy8[k];
      if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
      if (blocked(nx, ny)) continue;
      if (k >= 4 && (blocked(cx, ny) || blocked(nx, cy))) continue;
      const double step = (k >= 4 ? std::sqrt(2.0) : 1.0) * resolution;
      const double edge = step * (1.0 + w_c * cell_cost(nx, ny) / c_max);
      const double nd = d + edge;
      const size_t ni = index(nx, ny);
      if (nd < dist[ni] - 1e-15) {
        dist[ni] = nd;
        pq.emplace(nd, ni);
      }
    }
  }
  return dist[index(gx, gy)];
}

// ---------------------------------------------------------------------------
// Independent PGM writers for round-trip fixtures.

inline std::string write_pgm_p2(int width, int height, const std::vector<int>& gray) {
  std::string out = "P2\n# test fixture\n" + std::to_string(width) + " " +
                    std::to_string(height) + "\n255\n";
  for (int i = 0; i < width * height; ++i) {
    out += std::to_string(gray[i]);
    out += (i % width == width - 1) ? '\n' : ' ';
  }
  return out;
}

inline std::string write_pgm_p5(int width, int height, const std::vector<int>& gray) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (int i = 0; i < width * height; ++i) out += static_cast<char>(gray[i]);
  return out;
}

}  // namespace oracles
