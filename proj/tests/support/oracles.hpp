#pragma once

// Brute-force reference computations. Nothing here calls into the area
// module, so tests can hold the implementation against them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "padkit/geometry.hpp"

namespace padkit::testing {

inline bool point_in_pad(const Pin& p, double x, double y) {
  const double dx = std::abs(x - p.cx);
  const double dy = std::abs(y - p.cy);
  switch (p.shape) {
    case PadShape::rectangle:
      return dx <= p.w / 2 && dy <= p.h / 2;
    case PadShape::circle:
      return dx * dx + dy * dy <= p.w * p.w / 4;
    case PadShape::stadium: {
      const double r = std::min(p.w, p.h) / 2;
      const double ex = std::max(0.0, dx - (p.w / 2 - r));
      const double ey = std::max(0.0, dy - (p.h / 2 - r));
      return ex * ex + ey * ey <= r * r;
    }
  }
  return false;
}

struct Box {
  double x0, y0, x1, y1;
};

inline Box pads_extent(std::span<const Pin> pins) {
  Box b{1e300, 1e300, -1e300, -1e300};
  for (const auto& p : pins) {
    b.x0 = std::min(b.x0, p.cx - p.w / 2);
    b.y0 = std::min(b.y0, p.cy - p.h / 2);
    b.x1 = std::max(b.x1, p.cx + p.w / 2);
    b.y1 = std::max(b.y1, p.cy + p.h / 2);
  }
  return b;
}

/// Union area by testing the center of every cell of a grid with the given
/// cell size laid over the pads' extent. Cost grows with cells x pads.
inline double grid_union_area(std::span<const Pin> pins, double cell) {
  if (pins.empty()) return 0.0;
  const Box b = pads_extent(pins);
  const auto nx = static_cast<long>(std::ceil((b.x1 - b.x0) / cell));
  const auto ny = static_cast<long>(std::ceil((b.y1 - b.y0) / cell));
  long hits = 0;
  for (long j = 0; j < ny; ++j) {
    const double y = b.y0 + (static_cast<double>(j) + 0.5) * cell;
    for (long i = 0; i < nx; ++i) {
      const double x = b.x0 + (static_cast<double>(i) + 0.5) * cell;
      for (const auto& p : pins) {
        if (point_in_pad(p, x, y)) {
          ++hits;
          break;
        }
      }
    }
  }
  return static_cast<double>(hits) * cell * cell;
}

/// Intersection and union areas of two pad sets on a shared grid.
inline std::pair<double, double> grid_iou_parts(std::span<const Pin> a, std::span<const Pin> b,
                                                double cell) {
  std::vector<Pin> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const Box e = pads_extent(all);
  const auto nx = static_cast<long>(std::ceil((e.x1 - e.x0) / cell));
  const auto ny = static_cast<long>(std::ceil((e.y1 - e.y0) / cell));
  long inter = 0;
  long uni = 0;
  for (long j = 0; j < ny; ++j) {
    const double y = e.y0 + (static_cast<double>(j) + 0.5) * cell;
    for (long i = 0; i < nx; ++i) {
      const double x = e.x0 + (static_cast<double>(i) + 0.5) * cell;
      const bool in_a = std::any_of(a.begin(), a.end(),
                                    [&](const Pin& p) { return point_in_pad(p, x, y); });
      const bool in_b = std::any_of(b.begin(), b.end(),
                                    [&](const Pin& p) { return point_in_pad(p, x, y); });
      inter += (in_a && in_b) ? 1 : 0;
      uni += (in_a || in_b) ? 1 : 0;
    }
  }
  return {static_cast<double>(inter) * cell * cell, static_cast<double>(uni) * cell * cell};
}

/// Rectangle union area on an n x n grid over the layout extent: each
/// rectangle marks the cells whose centers it contains, then covered cells
/// are counted.
inline double grid_rect_union_area(std::span<const Pin> rects, int n) {
  if (rects.empty()) return 0.0;
  const Box b = pads_extent(rects);
  const double cw = (b.x1 - b.x0) / n;
  const double ch = (b.y1 - b.y0) / n;
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  // Cell i is covered when its center x0 + (i + 0.5) * cw lies in [lo, hi].
  auto first_cell = [](double lo, double origin, double size) {
    return static_cast<long>(std::ceil((lo - origin) / size - 0.5));
  };
  auto last_cell = [](double hi, double origin, double size) {
    return static_cast<long>(std::floor((hi - origin) / size - 0.5));
  };
  for (const auto& r : rects) {
    const long i0 = std::max(0L, first_cell(r.cx - r.w / 2, b.x0, cw));
    const long i1 = std::min<long>(n - 1, last_cell(r.cx + r.w / 2, b.x0, cw));
    const long j0 = std::max(0L, first_cell(r.cy - r.h / 2, b.y0, ch));
    const long j1 = std::min<long>(n - 1, last_cell(r.cy + r.h / 2, b.y0, ch));
    for (long j = j0; j <= j1; ++j) {
      std::uint8_t* row = cells.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n);
      std::fill(row + i0, row + i1 + 1, std::uint8_t{1});
    }
  }
  long count = 0;
  for (auto c : cells) count += c;
  return static_cast<double>(count) * cw * ch;
}

/// Area shared by two circles of radius r whose centers are d apart.
inline double circle_lens_area(double r, double d) {
  if (d >= 2 * r) return 0.0;
  return 2 * r * r * std::acos(d / (2 * r)) - d / 2 * std::sqrt(4 * r * r - d * d);
}

}  // namespace padkit::testing
