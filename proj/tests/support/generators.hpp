#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "padkit/geometry.hpp"

namespace padkit::testing {

/// Nearest multiple of q, computed as k / (1/q) so the result is the double
/// nearest to the decimal value (what a decimal parser would produce).
inline double quantize(double v, double q = 1e-4) {
  const double scale = std::round(1.0 / q);
  return std::round(v * scale) / scale;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Possibly-overlapping rectangle pads, for union-area checks.
inline std::vector<Pin> random_rect_layout(std::mt19937_64& rng, int count, double extent = 20.0) {
  std::vector<Pin> pins;
  pins.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Pin p;
    p.designator = std::to_string(i + 1);
    p.ordinal = i + 1;
    p.shape = PadShape::rectangle;
    p.w = uniform(rng, extent / 40, extent / 6);
    p.h = uniform(rng, extent / 40, extent / 6);
    p.cx = uniform(rng, -extent / 2, extent / 2);
    p.cy = uniform(rng, -extent / 2, extent / 2);
    pins.push_back(p);
  }
  return pins;
}

/// A valid footprint: pads sit in distinct cells of a jittered grid, so they
/// never overlap. All values are on a 1e-4 mm grid.
inline FootprintGeometry random_geometry(std::mt19937_64& rng, bool allow_round = true,
                                         int max_pins = 64) {
  FootprintGeometry g;
  const auto& registry = package_registry();
  g.package_class = registry[static_cast<std::size_t>(uniform_int(rng, 0, 9))];
  g.origin = Origin::source;
  g.source_id = "rand-" + std::to_string(rng() % 100000);
  const int n = uniform_int(rng, 1, max_pins);
  const int cols = uniform_int(rng, 1, 12);
  const double cell = quantize(uniform(rng, 0.5, 3.0), 0.01);
  const int shape_mode = allow_round ? uniform_int(rng, 0, 2) : 0;
  for (int i = 0; i < n; ++i) {
    Pin p;
    p.ordinal = i + 1;
    p.designator = std::to_string(i + 1);
    p.shape = static_cast<PadShape>(shape_mode);
    p.w = quantize(uniform(rng, 0.1, 0.45) * cell);
    p.h = p.shape == PadShape::circle ? p.w : quantize(uniform(rng, 0.1, 0.45) * cell);
    const double jx = uniform(rng, -0.04, 0.04) * cell;
    const double jy = uniform(rng, -0.04, 0.04) * cell;
    p.cx = quantize((i % cols) * cell + jx);
    p.cy = quantize(-(i / cols) * cell + jy);
    g.pins.push_back(p);
  }
  return g;
}

}  // namespace padkit::testing
