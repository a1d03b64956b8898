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
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "kinonav/geometry.hpp"
#include "kinonav/occupancy_grid.hpp"

namespace kinonav {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inflation cost curve parameters. Cost is C_max inside the inscribed
/// radius l1, decays as C_max * exp(-lambda_c * (l - l1)) up to the inflation
/// radius l2, and is zero beyond it.
struct InflationParams {
  double l1 = 0.3;          // inscribed radius, m
  double l2 = 1.0;          // inflation radius, m
  double lambda_c = 10.0;   // decay rate, 1/m
  double c_max = 100.0;     // peak cost
  double lethal_cost = 100.0;

  void validate() const {
    if (!(l1 > 0.0 && l2 > l1)) throw ConfigError("inflation: need 0 < l1 < l2");
    if (!(lambda_c > 0.0)) throw ConfigError("inflation: need lambda_c > 0");
    if (!(c_max > 0.0)) throw ConfigError("inflation: need c_max > 0");
    if (!(lethal_cost > 0.0 && lethal_cost <= c_max))
      throw ConfigError("inflation: need 0 < lethal_cost <= c_max");
  }

  double cost_of_distance(double l) const {
    if (l >= l2) return 0.0;
    if (l < l1) return c_max;
    return c_max * std::exp(-lambda_c * (l - l1));
  }

  /// Largest distance at which a cell still costs >= lethal_cost.
  double lethal_distance() const {
    return std::min(l2, l1 + std::log(c_max / lethal_cost) / lambda_c);
  }
};

namespace detail {

inline constexpr double kEdtInf = 1e20;

// 1D squared-distance transform (Felzenszwalb & Huttenlocher lower envelope
// of parabolas). f holds squared distances, d receives the transform.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                   std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  d.resize(n);
  v.resize(n);
  z.resize(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kEdtInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = double(q) - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Occupancy grid plus the derived obstacle distance field and inflation
/// cost field. Immutable after construction; safe to share across threads.
class Costmap {
 public:
  Costmap() = default;

  const OccupancyGrid& grid() const { return grid_; }
  const InflationParams& params() const { return params_; }
  double resolution() const { return grid_.resolution; }

  double dist_cell(int ix, int iy) const { return dist_[idx(ix, iy)]; }
  double cost_cell(int ix, int iy) const { return cost_[idx(ix, iy)]; }

  /// Cost of the cell containing p; out-of-map positions are forbidden and
  /// return the lethal cost.
  double cost_at(const Vec2& p) const {
    int ix, iy;
    grid_.world_to_cell(p, ix, iy);
    if (!grid_.in_bounds(ix, iy)) return params_.lethal_cost;
    return cost_[idx(ix, iy)];
  }

  bool is_lethal(const Vec2& p) const { return cost_at(p) >= params_.lethal_cost; }

  /// Obstacle distance of the containing cell; -inf outside the map so that
  /// any clearance test rejects out-of-map positions.
  double clearance_at(const Vec2& p) const {
    int ix, iy;
    grid_.world_to_cell(p, ix, iy);
    if (!grid_.in_bounds(ix, iy)) return -std::numeric_limits<double>::infinity();
    return dist_[idx(ix, iy)];
  }

  /// Largest distance still treated as lethal by is_lethal.
  double lethal_distance() const { return params_.lethal_distance(); }

  /// True iff any lethal cell rectangle (or the map boundary) lies within
  /// `margin` of p. Checking path samples with margin = spacing/2 makes the
  /// whole continuous path provably lethal-free: every path point sits in
  /// some cell, and that cell's rectangle is within spacing/2 of the nearest
  /// sample.
  bool lethal_within(const Vec2& p, double margin) const {
    const double r = grid_.resolution;
    // Fast path: a point whose cell and all 8 neighbors are non-lethal
    // cannot have a lethal rectangle within half a cell.
    if (margin <= 0.5 * r) {
      int ix, iy;
      grid_.world_to_cell(p, ix, iy);
      if (!grid_.in_bounds(ix, iy)) return true;
      if (clear3x3_[idx(ix, iy)]) return false;
    }
    const Vec2 rel = p - grid_.origin;
    const int x0 = static_cast<int>(std::floor((rel.x() - margin) / r));
    const int x1 = static_cast<int>(std::floor((rel.x() + margin) / r));
    const int y0 = static_cast<int>(std::floor((rel.y() - margin) / r));
    const int y1 = static_cast<int>(std::floor((rel.y() + margin) / r));
    if (x0 < 0 || y0 < 0 || x1 >= grid_.width || y1 >= grid_.height) return true;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (cost_[idx(x, y)] < params_.lethal_cost) continue;
        const double dx = std::max({grid_.origin.x() + x * r - p.x(),
                                    p.x() - (grid_.origin.x() + (x + 1) * r), 0.0});
        const double dy = std::max({grid_.origin.y() + y * r - p.y(),
                                    p.y() - (grid_.origin.y() + (y + 1) * r), 0.0});
        if (dx * dx + dy * dy <= margin * margin) return true;
      }
    }
    return false;
  }

  bool has_obstacles() const { return has_obstacles_; }

  /// Bilinearly interpolated obstacle distance with its spatial gradient,
  /// for smooth residuals. Queries are clamped to the cell-center lattice.
  double interpolated_dist(const Vec2& p, Vec2* grad = nullptr) const {
    if (grad) grad->setZero();
    if (!p.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    if (!has_obstacles_) {
      return std::numeric_limits<double>::infinity();
    }
    const double r = grid_.resolution;
    double ux = (p.x() - grid_.origin.x()) / r - 0.5;
    double uy = (p.y() - grid_.origin.y()) / r - 0.5;
    const double max_ux = grid_.width - 1.0;
    const double max_uy = grid_.height - 1.0;
    bool clamped_x = ux <= 0.0 || ux >= max_ux;
    bool clamped_y = uy <= 0.0 || uy >= max_uy;
    ux = clamp(ux, 0.0, max_ux - 1e-9);
    uy = clamp(uy, 0.0, max_uy - 1e-9);
    int ix = std::min(static_cast<int>(ux), grid_.width - 2);
    int iy = std::min(static_cast<int>(uy), grid_.height - 2);
    if (grid_.width == 1) ix = 0;
    if (grid_.height == 1) iy = 0;
    double fx = ux - ix, fy = uy - iy;
    auto D = [&](int a, int b) { return dist_[idx(std::min(a, grid_.width - 1), std::min(b, grid_.height - 1))]; };
    double d00 = D(ix, iy), d10 = D(ix + 1, iy), d01 = D(ix, iy + 1), d11 = D(ix + 1, iy + 1);
    double dx0 = d00 + fx * (d10 - d00);
    double dx1 = d01 + fx * (d11 - d01);
    double val = dx0 + fy * (dx1 - dx0);
    if (grad) {
      double ddx = ((d10 - d00) + fy * ((d11 - d01) - (d10 - d00))) / r;
      double ddy = (dx1 - dx0) / r;
      grad->x() = clamped_x ? 0.0 : ddx;
      grad->y() = clamped_y ? 0.0 : ddy;
    }
    return val;
  }

  /// Builds the exact Euclidean distance transform (cell-center to nearest
  /// occupied cell-center) and the inflation cost field.
  static Costmap build(const OccupancyGrid& grid, const InflationParams& params) {
    params.validate();
    Costmap cm;
    cm.grid_ = grid;
    cm.params_ = params;
    const int w = grid.width, h = grid.height;
    cm.dist_.assign(grid.cell_count(), 0.0);
    cm.cost_.assign(grid.cell_count(), 0.0);
    cm.has_obstacles_ = false;
    for (size_t i = 0; i < grid.cells.size(); ++i) {
      if (grid.cells[i]) {
        cm.has_obstacles_ = true;
        break;
      }
    }
    if (!cm.has_obstacles_) {
      std::fill(cm.dist_.begin(), cm.dist_.end(), std::numeric_limits<double>::infinity());
      cm.build_clear3x3();
      return cm;  // cost stays 0 everywhere
    }

    // Two-pass separable squared EDT: columns then rows, in cell units.
    std::vector<double> sq_dist(grid.cell_count());
    std::vector<double> f(std::max(w, h)), d(std::max(w, h)), z;
    std::vector<int> v;
    for (int x = 0; x < w; ++x) {
      f.resize(h);
      for (int y = 0; y < h; ++y) f[y] = grid.occupied(x, y) ? 0.0 : detail::kEdtInf;
      detail::edt_1d(f, d, v, z);
      for (int y = 0; y < h; ++y) sq_dist[static_cast<size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
      f.resize(w);
      for (int x = 0; x < w; ++x) f[x] = sq_dist[static_cast<size_t>(y) * w + x];
      detail::edt_1d(f, d, v, z);
      for (int x = 0; x < w; ++x) {
        double l = std::sqrt(d[x]) * grid.resolution;
        size_t i = static_cast<size_t>(y) * w + x;
        cm.dist_[i] = l;
        cm.cost_[i] = params.cost_of_distance(l);
      }
    }
    cm.build_clear3x3();
    return cm;
  }

  /// Debug export: row-major matrix CSV with 6 significant digits.
  void write_dist_csv(std::ostream& os) const { write_matrix(os, dist_); }
  void write_cost_csv(std::ostream& os) const { write_matrix(os, cost_); }

 private:
  size_t idx(int ix, int iy) const { return static_cast<size_t>(iy) * grid_.width + ix; }

  void build_clear3x3() {
    clear3x3_.assign(grid_.cell_count(), 0);
    for (int y = 0; y < grid_.height; ++y) {
      for (int x = 0; x < grid_.width; ++x) {
        bool clear = x > 0 && y > 0 && x + 1 < grid_.width && y + 1 < grid_.height;
        for (int dy = -1; dy <= 1 && clear; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (cost_[idx(x + dx, y + dy)] >= params_.lethal_cost) {
              clear = false;
              break;
            }
          }
        }
        clear3x3_[idx(x, y)] = clear ? 1 : 0;
      }
    }
  }

  void write_matrix(std::ostream& os, const std::vector<double>& m) const {
    char buf[32];
    for (int y = 0; y < grid_.height; ++y) {
      for (int x = 0; x < grid_.width; ++x) {
        std::snprintf(buf, sizeof(buf), "%.6g", m[idx(x, y)]);
        os << buf;
        if (x + 1 < grid_.width) os << ',';
      }
      os << '\n';
    }
  }

  OccupancyGrid grid_;
  InflationParams params_;
  std::vector<double> dist_;
  std::vector<double> cost_;
  std::vector<uint8_t> clear3x3_;  // cell and all 8 neighbors non-lethal
  bool has_obstacles_ = false;
};

inline Costmap build_costmap(const OccupancyGrid& grid, const InflationParams& params) {
  return Costmap::build(grid, params);
}

}  // namespace kinonav
