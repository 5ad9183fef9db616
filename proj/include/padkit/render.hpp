#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "padkit/geometry.hpp"

namespace padkit {

struct RenderSpec {
  double px_per_mm = 40.0;
  double margin_mm = 1.0;
  double pad_stroke_px = 1.0;
  double dimension_stroke_px = 0.75;
  double font_size_pt = 9.0;
  bool arrowheads = true;
  bool extension_lines = true;
  /// Rows with more pins than this are drawn with their middle pins replaced
  /// by an ellipsis. 0 disables elision; otherwise it must be at least 4.
  int omission_threshold = 0;
  bool show_pin_numbers = true;
  bool show_pitch = true;
  bool show_pad_dims = true;
  bool show_pin1_marker = true;
  /// Random offset (mm) applied to pin-number text; 0 keeps the output fixed.
  double text_jitter_mm = 0.0;
  std::uint64_t seed = 0;
};

/// Throws RenderError for a degenerate scale or malformed settings.
void check_render_spec(const RenderSpec& spec);

enum class DimensionKind { pitch, pad_width, pad_height, row_span, grid_pitch };

std::string_view to_string(DimensionKind kind);

enum class Axis { x, y };

/// One drawn dimension line in mm, +y up. `from_a`/`from_b` are the feature
/// points the extension lines start at; `a`/`b` are the arrow tips.
struct Leader {
  Axis axis = Axis::x;
  Vec2 from_a;
  Vec2 from_b;
  Vec2 a;
  Vec2 b;
};

struct LabelBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct Annotation {
  DimensionKind kind = DimensionKind::pitch;
  double value = 0.0;
  std::vector<int> anchors;  // pad ordinals
  std::string label;         // value with at most 2 decimals, trailing zeros trimmed
  std::vector<Leader> leaders;
  Vec2 label_anchor;  // text baseline start, mm
  LabelBox label_box;
  /// Index of the distinct pad size a pad-width/pad-height annotation belongs
  /// to; -1 for spacings.
  int size_group = -1;
};

/// Counts the diagram states implicitly: pin numbers, grid rows/columns.
struct LayoutSummary {
  PackageClass package_class;
  int pins = 0;
  int rows = 0;  // distinct pad rows (y values)
  int cols = 0;  // distinct pad columns (x values)
  PadShape shape = PadShape::rectangle;
};

struct AnnotationPlan {
  LayoutSummary summary;
  std::vector<Annotation> annotations;
};

/// Which dimensions a drawing must carry, and where they go. Dimension lines
/// sit in lanes outside the pad area (horizontal ones below, vertical ones to
/// the right), one lane per annotation, so label boxes never overlap.
AnnotationPlan plan_annotations(const FootprintGeometry& geometry, const RenderSpec& spec = {});

/// Rebuild a footprint from the plan's label texts and summary alone, using
/// the pin-numbering conventions of the synthetic generator. Throws
/// RenderError when the plan does not determine a layout.
FootprintGeometry reconstruct_geometry(const AnnotationPlan& plan);

/// Datasheet-style SVG 1.1 drawing. Byte-identical for identical inputs.
std::string render_svg(const FootprintGeometry& geometry, const RenderSpec& spec = {});

/// Truth pads in red, predicted pads in blue, semi-transparent, in one frame,
/// with a legend carrying the layout IoU to 3 decimals. Unusable predicted
/// pads (non-finite or non-positive sizes) are skipped.
std::string render_overlay(const FootprintGeometry& pred, const FootprintGeometry& truth,
                           const RenderSpec& spec = {});

}  // namespace padkit
