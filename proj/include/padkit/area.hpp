#pragma once

#include <span>

#include "padkit/geometry.hpp"

namespace padkit {

/// Area-of-union and IoU over pad sets.
///
/// Rectangle-only inputs take the exact path: a sweep over x with a
/// coverage-counting segment tree on the compressed y coordinates.
/// Inputs containing a circle or stadium take the raster path: horizontal
/// scanlines with exact per-row x intervals, rows aligned to the strips
/// between pad y-breakpoints and spaced at most `raster_step` apart.
/// Pads with non-positive or non-finite dimensions contribute no area.

/// Scanline spacing used for a pad set: min(smallest pad dimension / 64, 0.01).
double raster_step(std::span<const Pin> pins);

bool all_rectangles(std::span<const Pin> pins);

/// Exact union area of rectangle pads (shape is ignored, every pad is treated
/// as its bounding rectangle).
double rect_union_area(std::span<const Pin> pins);

/// Scanline union area with the given row spacing.
double raster_union_area(std::span<const Pin> pins, double step);

/// Union area choosing the exact or raster path from the pad shapes.
double layout_union_area(std::span<const Pin> pins);

/// Intersection-over-union of two pads at their stated centers.
double pad_iou(const Pin& a, const Pin& b);

struct IouResult {
  double value = 0.0;
  double intersection = 0.0;
  double union_area = 0.0;
  /// Set when either side has no usable area; `value` is then 0.
  bool degenerate = false;
  bool exact = true;
};

/// Region IoU of two pad sets. Intersection is derived by inclusion-exclusion,
/// union(a) + union(b) - union(a + b), with one path and one raster step shared
/// by all three unions.
IouResult pad_set_iou(std::span<const Pin> pred, std::span<const Pin> truth);

/// Layout IoU of two footprints expressed in the same origin convention.
IouResult layout_iou(const FootprintGeometry& pred, const FootprintGeometry& truth);

}  // namespace padkit
