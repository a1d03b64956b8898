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

#include "kinonav/costmap.hpp"
#include "kinonav/geometry.hpp"
#include "kinonav/io.hpp"

namespace kinonav {

/// Minimal self-contained SVG canvas in world coordinates (y up).
class SvgCanvas {
 public:
  SvgCanvas(double width_m, double height_m, double px_per_m = 60.0)
      : w_(width_m), h_(height_m), scale_(px_per_m) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w_ * scale_, "%.0f") +
             "\" height=\"" + fmt(h_ * scale_, "%.0f") + "\" viewBox=\"0 0 " +
             fmt(w_ * scale_, "%.2f") + " " + fmt(h_ * scale_, "%.2f") + "\">\n";
    body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0) {
    body_ += "<rect x=\"" + px(x) + "\" y=\"" + py(y + h) + "\" width=\"" + fmt(w * scale_, "%.2f") +
             "\" height=\"" + fmt(h * scale_, "%.2f") + "\" fill=\"" + fill + "\"";
    if (opacity < 1.0) body_ += " fill-opacity=\"" + fmt(opacity, "%.2f") + "\"";
    body_ += "/>\n";
  }

  void circle(const Vec2& c, double r_m, const std::string& fill) {
    body_ += "<circle cx=\"" + px(c.x()) + "\" cy=\"" + py(c.y()) + "\" r=\"" +
             fmt(r_m * scale_, "%.2f") + "\" fill=\"" + fill + "\"/>\n";
  }

  void line(const Vec2& a, const Vec2& b, const std::string& stroke, double width_px = 1.5) {
    body_ += "<line x1=\"" + px(a.x()) + "\" y1=\"" + py(a.y()) + "\" x2=\"" + px(b.x()) +
             "\" y2=\"" + py(b.y()) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt(width_px, "%.2f") + "\"/>\n";
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width_px = 2.0) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt(width_px, "%.2f") + "\" points=\"";
    for (const Vec2& p : pts) body_ += px(p.x()) + "," + py(p.y()) + " ";
    body_ += "\"/>\n";
  }

  /// Occupied cells as merged per-row runs; soft-cost cells tinted.
  void draw_costmap(const Costmap& cm) {
    const OccupancyGrid& g = cm.grid();
    const double r = g.resolution;
    for (int pass = 0; pass < 2; ++pass) {
      for (int y = 0; y < g.height; ++y) {
        int run = -1;
        for (int x = 0; x <= g.width; ++x) {
          bool on = false;
          if (x < g.width) {
            on = pass == 0 ? (cm.cost_cell(x, y) > 0.0 && !g.occupied(x, y)) : g.occupied(x, y);
          }
          if (on && run < 0) run = x;
          if (!on && run >= 0) {
            const double wx = g.origin.x() + run * r;
            const double wy = g.origin.y() + y * r;
            if (pass == 0) {
              rect(wx, wy, (x - run) * r, r, "#f4a460", 0.35);
            } else {
              rect(wx, wy, (x - run) * r, r, "#222222");
            }
            run = -1;
          }
        }
      }
    }
  }

  std::string finish() {
    return body_ + "</svg>\n";
  }

 private:
  std::string px(double x) const { return fmt(x * scale_, "%.2f"); }
  std::string py(double y) const { return fmt((h_ - y) * scale_, "%.2f"); }

  double w_, h_, scale_;
  std::string body_;
};

}  // namespace kinonav
