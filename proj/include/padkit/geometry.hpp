#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "padkit/errors.hpp"

namespace padkit {

/// Geometric equality tolerance in millimeters.
inline constexpr double kTolerance = 1e-6;

/// Soft upper bound on pin count; exceeding it is a warning only.
inline constexpr int kMaxPins = 800;

enum class PadShape { rectangle, circle, stadium };

std::string_view to_string(PadShape shape);
std::optional<PadShape> pad_shape_from_string(std::string_view name);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned rectangle, mm.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// One pad. `w`/`h` are the x/y extents; a stadium has corner radius min(w,h)/2.
struct Pin {
  std::string designator;
  int ordinal = 0;
  double cx = 0.0;
  double cy = 0.0;
  PadShape shape = PadShape::rectangle;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const Pin&, const Pin&) = default;
};

enum class Topology { dual_row, quad_perimeter, full_grid, single_row, two_pad };

std::string_view to_string(Topology topology);

struct PackageClass {
  std::string name;
  Topology topology = Topology::dual_row;
  friend bool operator==(const PackageClass&, const PackageClass&) = default;
};

/// The ten package classes known to the toolkit.
std::span<const PackageClass> package_registry();
std::optional<PackageClass> find_package_class(std::string_view name);
/// Throws GeometryError naming the class when it is not registered.
const PackageClass& package_class(std::string_view name);

enum class Origin { layout_center, source };

std::string_view to_string(Origin origin);
std::optional<Origin> origin_from_string(std::string_view name);

struct FootprintGeometry {
  PackageClass package_class;
  std::vector<Pin> pins;
  Origin origin = Origin::source;
  std::string source_id;

  friend bool operator==(const FootprintGeometry&, const FootprintGeometry&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  empty_geometry,
  too_many_pins,  // warning
  non_finite_value,
  non_positive_dimension,
  circle_not_round,
  duplicate_designator,
  empty_designator,
  ordinal_sequence,
  pad_overlap,
  not_centered,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
  bool warning = false;
};

/// Every invariant violation of `geometry`; empty means valid.
std::vector<Violation> validate(const FootprintGeometry& geometry);

/// True when `violations` holds no errors (warnings are allowed).
bool is_clean(std::span<const Violation> violations);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Throws ValidationError unless the geometry is clean.
void require_valid(const FootprintGeometry& geometry);

// ---------------------------------------------------------------------------
// Pad geometry

/// Outline extent of a single pad.
Rect pad_bounds(const Pin& pin);

/// Exact outline area (circle and stadium use their closed forms).
double pad_area(const Pin& pin);

/// True when the two outlines share positive area; touching edges do not count.
bool pads_overlap(const Pin& a, const Pin& b);

/// Smallest rectangle containing every pad outline. Throws on empty geometry.
Rect bounding_box(const FootprintGeometry& geometry);

/// Translate so the pad bounding box is centered at the origin.
FootprintGeometry recenter(FootprintGeometry geometry);

FootprintGeometry translate(FootprintGeometry geometry, Vec2 offset);
FootprintGeometry scale(FootprintGeometry geometry, double factor);

}  // namespace padkit
