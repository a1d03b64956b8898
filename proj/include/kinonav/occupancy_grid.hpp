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

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinonav/geometry.hpp"

namespace kinonav {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary occupancy grid. Cell (ix, iy) covers the world square
/// [origin + (ix, iy) * R, origin + (ix + 1, iy + 1) * R); raster row 0 of a
/// PGM source maps to iy = 0.
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = 1.0;  // meters per cell
  Vec2 origin = Vec2::Zero();
  std::vector<uint8_t> cells;  // 1 = occupied, row-major

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width && iy >= 0 && iy < height;
  }
  bool occupied(int ix, int iy) const {
    return cells[static_cast<size_t>(iy) * width + ix] != 0;
  }
  void set_occupied(int ix, int iy, bool v) {
    cells[static_cast<size_t>(iy) * width + ix] = v ? 1 : 0;
  }
  Vec2 cell_center(int ix, int iy) const {
    return origin + Vec2((ix + 0.5) * resolution, (iy + 0.5) * resolution);
  }
  /// Containing cell of a world position (may be out of bounds).
  void world_to_cell(const Vec2& p, int& ix, int& iy) const {
    ix = static_cast<int>(std::floor((p.x() - origin.x()) / resolution));
    iy = static_cast<int>(std::floor((p.y() - origin.y()) / resolution));
  }
  size_t cell_count() const { return static_cast<size_t>(width) * height; }
};

namespace detail {

// Token scanner over a PGM header that tracks byte offsets and skips
// whitespace and '#' comments.
class PgmScanner {
 public:
  explicit PgmScanner(const std::string& data) : data_(data) {}

  size_t offset() const { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("pgm parse error at byte " + std::to_string(pos_) + ": " + what);
  }

  void skip_separators() {
    while (pos_ < data_.size()) {
      char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string next_token() {
    skip_separators();
    if (pos_ >= data_.size()) fail("unexpected end of header");
    size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])) &&
           data_[pos_] != '#') {
      ++pos_;
    }
    return data_.substr(start, pos_ - start);
  }

  int next_int(const std::string& name) {
    std::string tok = next_token();
    size_t consumed = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &consumed);
    } catch (const std::exception&) {
      fail("expected integer for " + name + ", got '" + tok + "'");
    }
    if (consumed != tok.size()) fail("trailing garbage in " + name + " '" + tok + "'");
    return v;
  }

  // P5 payload starts after exactly one whitespace byte following maxval.
  void consume_single_whitespace() {
    if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      fail("expected single whitespace before binary payload");
    }
    ++pos_;
  }

  const std::string& data() const { return data_; }
  size_t pos_ = 0;

 private:
  const std::string& data_;
};

}  // namespace detail

/// Parses a PGM image (P2 ASCII or P5 binary, maxval <= 255) into an
/// occupancy grid: a cell is occupied iff its gray value <= occupied_threshold
/// (dark pixels are obstacles). Resolution and origin keep their defaults;
/// the caller sets them from the scenario config.
inline OccupancyGrid load_pgm(const std::string& bytes, int occupied_threshold) {
  detail::PgmScanner sc(bytes);
  std::string magic = sc.next_token();
  if (magic != "P2" && magic != "P5") {
    throw ParseError("pgm parse error at byte 0: bad magic '" + magic + "' (want P2 or P5)");
  }
  int width = sc.next_int("width");
  int height = sc.next_int("height");
  if (width < 1 || height < 1) sc.fail("non-positive dimensions");
  int maxval = sc.next_int("maxval");
  if (maxval < 1 || maxval > 255) sc.fail("maxval " + std::to_string(maxval) + " out of range [1,255]");

  OccupancyGrid g;
  g.width = width;
  g.height = height;
  g.cells.assign(g.cell_count(), 0);

  if (magic == "P5") {
    sc.consume_single_whitespace();
    size_t need = g.cell_count();
    if (bytes.size() - sc.offset() < need) {
      throw ParseError("pgm parse error at byte " + std::to_string(bytes.size()) +
                       ": truncated P5 payload (need " + std::to_string(need) + " bytes, have " +
                       std::to_string(bytes.size() - sc.offset()) + ")");
    }
    for (size_t i = 0; i < need; ++i) {
      uint8_t v = static_cast<uint8_t>(bytes[sc.offset() + i]);
      if (v > maxval) {
        throw ParseError("pgm parse error at byte " + std::to_string(sc.offset() + i) +
                         ": sample exceeds maxval");
      }
      g.cells[i] = (v <= occupied_threshold) ? 1 : 0;
    }
  } else {
    for (size_t i = 0; i < g.cell_count(); ++i) {
      int v = sc.next_int("sample");
      if (v < 0 || v > maxval) sc.fail("sample out of range");
      g.cells[i] = (v <= occupied_threshold) ? 1 : 0;
    }
  }
  return g;
}

inline OccupancyGrid load_pgm_file(const std::string& path, int occupied_threshold) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open pgm file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_pgm(ss.str(), occupied_threshold);
}

}  // namespace kinonav
