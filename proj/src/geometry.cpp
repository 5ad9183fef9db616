#include "padkit/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace padkit {

std::string_view to_string(PadShape shape) {
  switch (shape) {
    case PadShape::rectangle: return "rectangle";
    case PadShape::circle: return "circle";
    case PadShape::stadium: return "stadium";
  }
  return "rectangle";
}

std::optional<PadShape> pad_shape_from_string(std::string_view name) {
  if (name == "rectangle" || name == "rect") return PadShape::rectangle;
  if (name == "circle") return PadShape::circle;
  if (name == "stadium" || name == "oval") return PadShape::stadium;
  return std::nullopt;
}

std::string_view to_string(Topology topology) {
  switch (topology) {
    case Topology::dual_row: return "dual-row";
    case Topology::quad_perimeter: return "quad-perimeter";
    case Topology::full_grid: return "full-grid";
    case Topology::single_row: return "single-row";
    case Topology::two_pad: return "two-pad";
  }
  return "dual-row";
}

std::span<const PackageClass> package_registry() {
  static const std::array<PackageClass, 10> registry = {{
      {"SOIC", Topology::dual_row},
      {"QFP", Topology::quad_perimeter},
      {"QFN", Topology::quad_perimeter},
      {"BGA", Topology::full_grid},
      {"DIP", Topology::dual_row},
      {"SOT", Topology::dual_row},
      {"SON", Topology::dual_row},
      {"PLCC", Topology::quad_perimeter},
      {"CHIP2", Topology::two_pad},
      {"SIP", Topology::single_row},
  }};
  return registry;
}

std::optional<PackageClass> find_package_class(std::string_view name) {
  for (const auto& pc : package_registry()) {
    if (pc.name == name) return pc;
  }
  return std::nullopt;
}

const PackageClass& package_class(std::string_view name) {
  for (const auto& pc : package_registry()) {
    if (pc.name == name) return pc;
  }
  throw GeometryError("unknown package class '" + std::string(name) + "'");
}

std::string_view to_string(Origin origin) {
  return origin == Origin::layout_center ? "layout-center" : "source";
}

std::optional<Origin> origin_from_string(std::string_view name) {
  if (name == "layout-center") return Origin::layout_center;
  if (name == "source") return Origin::source;
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::empty_geometry: return "empty-geometry";
    case ViolationKind::too_many_pins: return "too-many-pins";
    case ViolationKind::non_finite_value: return "non-finite-value";
    case ViolationKind::non_positive_dimension: return "non-positive-dimension";
    case ViolationKind::circle_not_round: return "circle-not-round";
    case ViolationKind::duplicate_designator: return "duplicate-designator";
    case ViolationKind::empty_designator: return "empty-designator";
    case ViolationKind::ordinal_sequence: return "ordinal-sequence";
    case ViolationKind::pad_overlap: return "pad-overlap";
    case ViolationKind::not_centered: return "not-centered";
  }
  return "unknown";
}

namespace {

std::string describe_violations(const std::vector<Violation>& violations) {
  std::string out = "invalid geometry:";
  for (const auto& v : violations) {
    out += ' ';
    out += to_string(v.kind);
    if (!v.detail.empty()) out += " (" + v.detail + ")";
    out += ';';
  }
  return out;
}

std::string pad_label(const Pin& pin, std::size_t index) {
  return "pad[" + std::to_string(index + 1) + "] '" + pin.designator + "'";
}

bool finite_pin(const Pin& p) {
  return std::isfinite(p.cx) && std::isfinite(p.cy) && std::isfinite(p.w) && std::isfinite(p.h);
}

// A pad as the Minkowski sum of an axis-aligned core box and a disk.
struct RoundedBox {
  Rect core;
  double radius = 0.0;
};

RoundedBox rounded_box(const Pin& p) {
  switch (p.shape) {
    case PadShape::circle:
      return {{p.cx, p.cy, p.cx, p.cy}, p.w / 2};
    case PadShape::stadium: {
      const double r = std::min(p.w, p.h) / 2;
      return {{p.cx - p.w / 2 + r, p.cy - p.h / 2 + r, p.cx + p.w / 2 - r, p.cy + p.h / 2 - r}, r};
    }
    case PadShape::rectangle:
      break;
  }
  return {pad_bounds(p), 0.0};
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(describe_violations(violations)), violations_(std::move(violations)) {}

Rect pad_bounds(const Pin& pin) {
  return {pin.cx - pin.w / 2, pin.cy - pin.h / 2, pin.cx + pin.w / 2, pin.cy + pin.h / 2};
}

double pad_area(const Pin& pin) {
  switch (pin.shape) {
    case PadShape::circle:
      return M_PI * pin.w * pin.w / 4;
    case PadShape::stadium: {
      const double r = std::min(pin.w, pin.h) / 2;
      return pin.w * pin.h - (4 - M_PI) * r * r;
    }
    case PadShape::rectangle:
      break;
  }
  return pin.w * pin.h;
}

bool pads_overlap(const Pin& a, const Pin& b) {
  const RoundedBox ra = rounded_box(a);
  const RoundedBox rb = rounded_box(b);
  if (ra.radius == 0.0 && rb.radius == 0.0) {
    const double ox = std::min(ra.core.x1, rb.core.x1) - std::max(ra.core.x0, rb.core.x0);
    const double oy = std::min(ra.core.y1, rb.core.y1) - std::max(ra.core.y0, rb.core.y0);
    return ox > kTolerance && oy > kTolerance;
  }
  const double gx = std::max({0.0, ra.core.x0 - rb.core.x1, rb.core.x0 - ra.core.x1});
  const double gy = std::max({0.0, ra.core.y0 - rb.core.y1, rb.core.y0 - ra.core.y1});
  return std::hypot(gx, gy) < ra.radius + rb.radius - kTolerance;
}

std::vector<Violation> validate(const FootprintGeometry& geometry) {
  std::vector<Violation> out;
  const auto& pins = geometry.pins;
  if (pins.empty()) {
    out.push_back({ViolationKind::empty_geometry, "no pins", false});
    return out;
  }
  if (pins.size() > static_cast<std::size_t>(kMaxPins)) {
    out.push_back({ViolationKind::too_many_pins,
                   std::to_string(pins.size()) + " pins exceeds " + std::to_string(kMaxPins), true});
  }

  std::vector<bool> usable(pins.size(), true);
  for (std::size_t i = 0; i < pins.size(); ++i) {
    const Pin& p = pins[i];
    if (!finite_pin(p)) {
      out.push_back({ViolationKind::non_finite_value, pad_label(p, i), false});
      usable[i] = false;
      continue;
    }
    if (p.w <= 0 || p.h <= 0) {
      out.push_back({ViolationKind::non_positive_dimension, pad_label(p, i), false});
      usable[i] = false;
    } else if (p.shape == PadShape::circle && std::abs(p.w - p.h) > kTolerance) {
      out.push_back({ViolationKind::circle_not_round, pad_label(p, i), false});
    }
    if (p.designator.empty()) {
      out.push_back({ViolationKind::empty_designator, pad_label(p, i), false});
    }
  }

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (pins[i].designator.empty()) continue;
    auto [it, inserted] = seen.emplace(pins[i].designator, i);
    if (!inserted) {
      out.push_back({ViolationKind::duplicate_designator,
                     "'" + pins[i].designator + "' at pad[" + std::to_string(it->second + 1) +
                         "] and pad[" + std::to_string(i + 1) + "]",
                     false});
    }
  }

  std::vector<int> ordinals;
  ordinals.reserve(pins.size());
  for (const auto& p : pins) ordinals.push_back(p.ordinal);
  std::sort(ordinals.begin(), ordinals.end());
  for (std::size_t i = 0; i < ordinals.size(); ++i) {
    if (ordinals[i] != static_cast<int>(i) + 1) {
      out.push_back({ViolationKind::ordinal_sequence,
                     "expected ordinal " + std::to_string(i + 1) + ", found " +
                         std::to_string(ordinals[i]),
                     false});
      break;
    }
  }

  // Sweep over x so only pads with overlapping x extents are compared.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (usable[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pad_bounds(pins[a]).x0 < pad_bounds(pins[b]).x0;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Rect bi = pad_bounds(pins[order[i]]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (pad_bounds(pins[order[j]]).x0 >= bi.x1) break;
      if (pads_overlap(pins[order[i]], pins[order[j]])) {
        const auto a = std::min(order[i], order[j]);
        const auto b = std::max(order[i], order[j]);
        out.push_back({ViolationKind::pad_overlap,
                       pad_label(pins[a], a) + " and " + pad_label(pins[b], b), false});
      }
    }
  }

  if (geometry.origin == Origin::layout_center &&
      std::all_of(pins.begin(), pins.end(), finite_pin)) {
    const Vec2 c = bounding_box(geometry).center();
    if (std::abs(c.x) > kTolerance || std::abs(c.y) > kTolerance) {
      out.push_back({ViolationKind::not_centered, "bounding box center is off origin", false});
    }
  }
  return out;
}

bool is_clean(std::span<const Violation> violations) {
  return std::all_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.warning; });
}

void require_valid(const FootprintGeometry& geometry) {
  auto violations = validate(geometry);
  if (!is_clean(violations)) throw ValidationError(std::move(violations));
}

Rect bounding_box(const FootprintGeometry& geometry) {
  if (geometry.pins.empty()) throw GeometryError("empty geometry");
  Rect box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : geometry.pins) {
    const Rect b = pad_bounds(p);
    box.x0 = std::min(box.x0, b.x0);
    box.y0 = std::min(box.y0, b.y0);
    box.x1 = std::max(box.x1, b.x1);
    box.y1 = std::max(box.y1, b.y1);
  }
  return box;
}

FootprintGeometry recenter(FootprintGeometry geometry) {
  const Vec2 c = bounding_box(geometry).center();
  // Residuals from the previous recenter are floating-point noise, not offsets.
  constexpr double kNoise = 1e-9;
  const Vec2 shift{std::abs(c.x) < kNoise ? 0.0 : -c.x, std::abs(c.y) < kNoise ? 0.0 : -c.y};
  geometry = translate(std::move(geometry), shift);
  geometry.origin = Origin::layout_center;
  return geometry;
}

FootprintGeometry translate(FootprintGeometry geometry, Vec2 offset) {
  if (offset.x == 0.0 && offset.y == 0.0) return geometry;
  for (auto& p : geometry.pins) {
    p.cx += offset.x;
    p.cy += offset.y;
  }
  return geometry;
}

FootprintGeometry scale(FootprintGeometry geometry, double factor) {
  for (auto& p : geometry.pins) {
    p.cx *= factor;
    p.cy *= factor;
    p.w *= factor;
    p.h *= factor;
  }
  return geometry;
}

}  // namespace padkit
