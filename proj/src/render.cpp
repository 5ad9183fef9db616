#include "padkit/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "padkit/area.hpp"
#include "padkit/errors.hpp"
#include "padkit/format.hpp"
#include "padkit/synth.hpp"

namespace padkit {
namespace {

constexpr double kEps = 1e-6;
constexpr double kCharAdvance = 0.6;  // em per character, for label boxes
constexpr const char* kEllipsis = "\xE2\x80\xA6";

bool same(double a, double b) { return std::abs(a - b) <= kEps; }

// ---------------------------------------------------------------- structure

enum class Mode { dual_vertical, dual_horizontal, quad, grid, line_x, line_y, pair, generic };

struct Structure {
  Mode mode = Mode::generic;
  // Rows in ordinal order, for elision and pitch scanning.
  std::vector<std::vector<const Pin*>> rows;
  // quad sides
  std::vector<const Pin*> left, bottom, right, top;
};

template <class Key>
std::vector<std::vector<const Pin*>> cluster(const std::vector<const Pin*>& pins, Key key) {
  std::vector<const Pin*> sorted = pins;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](const Pin* a, const Pin* b) { return key(a) < key(b); });
  std::vector<std::vector<const Pin*>> groups;
  for (const Pin* p : sorted) {
    if (groups.empty() || !same(key(groups.back().front()), key(p))) groups.emplace_back();
    groups.back().push_back(p);
  }
  for (auto& g : groups) {
    std::stable_sort(g.begin(), g.end(),
                     [](const Pin* a, const Pin* b) { return a->ordinal < b->ordinal; });
  }
  return groups;
}

double cx_of(const Pin* p) { return p->cx; }
double cy_of(const Pin* p) { return p->cy; }

Structure analyze(const std::vector<const Pin*>& pins, Topology topology) {
  Structure s;
  const auto by_x = cluster(pins, cx_of);
  const auto by_y = cluster(pins, cy_of);
  const std::size_t n = pins.size();
  switch (topology) {
    case Topology::dual_row:
      if (by_x.size() == 2 && by_x[0].size() == by_x[1].size()) {
        s.mode = Mode::dual_vertical;
        s.rows = by_x;
        return s;
      }
      if (by_y.size() == 2 && by_y[0].size() == by_y[1].size()) {
        s.mode = Mode::dual_horizontal;
        s.rows = by_y;
        return s;
      }
      break;
    case Topology::quad_perimeter: {
      if (n < 4) break;
      double x0 = pins[0]->cx, x1 = x0, y0 = pins[0]->cy, y1 = y0;
      for (const Pin* p : pins) {
        x0 = std::min(x0, p->cx);
        x1 = std::max(x1, p->cx);
        y0 = std::min(y0, p->cy);
        y1 = std::max(y1, p->cy);
      }
      bool ok = true;
      for (const Pin* p : pins) {
        const int hits = same(p->cx, x0) + same(p->cx, x1) + same(p->cy, y0) + same(p->cy, y1);
        if (hits != 1) {
          ok = false;
          break;
        }
        if (same(p->cx, x0)) s.left.push_back(p);
        else if (same(p->cx, x1)) s.right.push_back(p);
        else if (same(p->cy, y0)) s.bottom.push_back(p);
        else s.top.push_back(p);
      }
      if (ok && !s.left.empty() && !s.right.empty() && !s.bottom.empty() && !s.top.empty()) {
        s.mode = Mode::quad;
        s.rows = {s.left, s.bottom, s.right, s.top};
        return s;
      }
      s.left.clear();
      s.right.clear();
      s.bottom.clear();
      s.top.clear();
      break;
    }
    case Topology::full_grid:
      s.mode = Mode::grid;
      return s;
    case Topology::single_row:
      if (by_y.size() == 1) {
        s.mode = Mode::line_x;
        s.rows = by_y;
        return s;
      }
      if (by_x.size() == 1) {
        s.mode = Mode::line_y;
        s.rows = by_x;
        return s;
      }
      break;
    case Topology::two_pad:
      if (n == 2) {
        s.mode = Mode::pair;
        return s;
      }
      break;
  }
  s.mode = Mode::generic;
  return s;
}

// ---------------------------------------------------------------- planning

struct PendingLeader {
  Axis axis;
  Vec2 fa;
  Vec2 fb;
};

struct Pending {
  DimensionKind kind;
  double value;
  std::vector<int> anchors;
  int size_group = -1;
  std::vector<PendingLeader> leaders;
};

// Leader measuring along x between two pads, hanging below them.
PendingLeader below(double xa, double xb, double ya, double yb) {
  return {Axis::x, {xa, ya}, {xb, yb}};
}

// Leader measuring along y, to the right of the pads.
PendingLeader right_of(double ya, double yb, double xa, double xb) {
  return {Axis::y, {xa, ya}, {xb, yb}};
}

PendingLeader spacing_leader(const Pin* a, const Pin* b, Axis axis) {
  const Rect ra = pad_bounds(*a);
  const Rect rb = pad_bounds(*b);
  if (axis == Axis::x) return below(a->cx, b->cx, ra.y0, rb.y0);
  return right_of(a->cy, b->cy, ra.x1, rb.x1);
}

class DistinctValues {
 public:
  bool insert(double v) {
    for (double u : values_) {
      if (same(u, v)) return false;
    }
    values_.push_back(v);
    return true;
  }

 private:
  std::vector<double> values_;
};

// Pitch annotations for every distinct spacing along the given rows. Rows are
// scanned in order, so earlier rows supply the anchors.
void add_row_pitches(std::vector<Pending>& out, DistinctValues& seen,
                     const std::vector<std::vector<const Pin*>>& rows) {
  for (const auto& row : rows) {
    if (row.size() < 2) continue;
    // Along-row axis: the one with the larger extent.
    double dx = 0, dy = 0;
    for (const Pin* p : row) {
      dx = std::max(dx, std::abs(p->cx - row.front()->cx));
      dy = std::max(dy, std::abs(p->cy - row.front()->cy));
    }
    const Axis axis = dx >= dy ? Axis::x : Axis::y;
    std::vector<const Pin*> sorted = row;
    if (axis == Axis::x) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const Pin* a, const Pin* b) { return a->cx < b->cx; });
    } else {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const Pin* a, const Pin* b) { return a->cy > b->cy; });
    }
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const Pin* a = sorted[i];
      const Pin* b = sorted[i + 1];
      const double v = axis == Axis::x ? b->cx - a->cx : a->cy - b->cy;
      if (v <= kEps || !seen.insert(v)) continue;
      out.push_back({DimensionKind::pitch, v, {a->ordinal, b->ordinal}, -1,
                     {spacing_leader(a, b, axis)}});
    }
  }
}

const Pin* lowest(const std::vector<const Pin*>& pins) {
  const Pin* best = nullptr;
  for (const Pin* p : pins) {
    if (!best || p->cy < best->cy - kEps) best = p;
  }
  return best;
}

const Pin* rightmost(const std::vector<const Pin*>& pins) {
  const Pin* best = nullptr;
  for (const Pin* p : pins) {
    if (!best || p->cx > best->cx + kEps) best = p;
  }
  return best;
}

Pending span(const Pin* a, const Pin* b, Axis axis) {
  const double v = axis == Axis::x ? std::abs(b->cx - a->cx) : std::abs(b->cy - a->cy);
  return {DimensionKind::row_span, v, {a->ordinal, b->ordinal}, -1, {spacing_leader(a, b, axis)}};
}

void add_grid_pitches(std::vector<Pending>& out, const std::vector<const Pin*>& pins) {
  const auto cols = cluster(pins, cx_of);  // ascending x
  const auto rows = cluster(pins, cy_of);  // ascending y
  struct Item {
    double value;
    Axis axis;
    const Pin* a;
    const Pin* b;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i + 1 < cols.size(); ++i) {
    const Pin* a = lowest(cols[i]);
    const Pin* b = lowest(cols[i + 1]);
    items.push_back({cols[i + 1].front()->cx - cols[i].front()->cx, Axis::x, a, b});
  }
  for (std::size_t i = rows.size(); i-- > 1;) {
    const Pin* a = rightmost(rows[i]);
    const Pin* b = rightmost(rows[i - 1]);
    items.push_back({rows[i].front()->cy - rows[i - 1].front()->cy, Axis::y, a, b});
  }
  for (const auto& it : items) {
    Pending* target = nullptr;
    for (auto& p : out) {
      if (p.kind == DimensionKind::grid_pitch && same(p.value, it.value)) target = &p;
    }
    if (!target) {
      out.push_back({DimensionKind::grid_pitch, it.value, {}, -1, {}});
      target = &out.back();
    }
    const bool has_axis = std::any_of(target->leaders.begin(), target->leaders.end(),
                                      [&](const PendingLeader& l) { return l.axis == it.axis; });
    if (has_axis) continue;
    target->anchors.push_back(it.a->ordinal);
    target->anchors.push_back(it.b->ordinal);
    target->leaders.push_back(spacing_leader(it.a, it.b, it.axis));
  }
}

void add_sizes(std::vector<Pending>& out, const std::vector<const Pin*>& pins) {
  struct Size {
    PadShape shape;
    double w, h;
    const Pin* low = nullptr;
    const Pin* right = nullptr;
  };
  std::vector<Size> sizes;
  for (const Pin* p : pins) {
    auto it = std::find_if(sizes.begin(), sizes.end(), [&](const Size& s) {
      return s.shape == p->shape && same(s.w, p->w) && same(s.h, p->h);
    });
    if (it == sizes.end()) {
      sizes.push_back({p->shape, p->w, p->h, p, p});
      continue;
    }
    if (p->cy < it->low->cy - kEps) it->low = p;
    if (p->cx > it->right->cx + kEps) it->right = p;
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const Size& s = sizes[i];
    const int group = static_cast<int>(i);
    const Rect lo = pad_bounds(*s.low);
    out.push_back({DimensionKind::pad_width, s.w, {s.low->ordinal}, group,
                   {below(lo.x0, lo.x1, lo.y0, lo.y0)}});
    if (s.shape == PadShape::circle && same(s.w, s.h)) continue;
    const Rect rr = pad_bounds(*s.right);
    out.push_back({DimensionKind::pad_height, s.h, {s.right->ordinal}, group,
                   {right_of(rr.y0, rr.y1, rr.x1, rr.x1)}});
  }
}

std::vector<const Pin*> ordered(const FootprintGeometry& g) {
  std::vector<const Pin*> pins;
  pins.reserve(g.pins.size());
  for (const auto& p : g.pins) pins.push_back(&p);
  std::stable_sort(pins.begin(), pins.end(),
                   [](const Pin* a, const Pin* b) { return a->ordinal < b->ordinal; });
  return pins;
}

std::vector<Pending> pending_annotations(const std::vector<const Pin*>& pins, const Structure& s) {
  std::vector<Pending> out;
  DistinctValues pitches;
  switch (s.mode) {
    case Mode::dual_vertical: {
      // Right row first so the pitch leader sits next to its lane.
      add_row_pitches(out, pitches, {s.rows[1], s.rows[0]});
      out.push_back(span(lowest(s.rows[0]), lowest(s.rows[1]), Axis::x));
      break;
    }
    case Mode::dual_horizontal:
      add_row_pitches(out, pitches, {s.rows[0], s.rows[1]});
      out.push_back(span(rightmost(s.rows[0]), rightmost(s.rows[1]), Axis::y));
      break;
    case Mode::quad:
      add_row_pitches(out, pitches, {s.bottom, s.right, s.left, s.top});
      out.push_back(span(lowest(s.left), lowest(s.right), Axis::x));
      out.push_back(span(rightmost(s.bottom), rightmost(s.top), Axis::y));
      break;
    case Mode::grid:
      add_grid_pitches(out, pins);
      break;
    case Mode::line_x:
    case Mode::line_y:
      add_row_pitches(out, pitches, s.rows);
      break;
    case Mode::pair: {
      const Pin* a = pins[0];
      const Pin* b = pins[1];
      const bool along_x = std::abs(b->cx - a->cx) >= std::abs(b->cy - a->cy);
      if (along_x && b->cx < a->cx) std::swap(a, b);
      out.push_back(span(a, b, along_x ? Axis::x : Axis::y));
      break;
    }
    case Mode::generic: {
      auto lines = cluster(pins, cy_of);
      auto cols = cluster(pins, cx_of);
      lines.insert(lines.end(), cols.begin(), cols.end());
      add_row_pitches(out, pitches, lines);
      break;
    }
  }
  add_sizes(out, pins);
  return out;
}

double font_mm(const RenderSpec& spec) { return spec.font_size_pt * (96.0 / 72.0) / spec.px_per_mm; }

double text_width(const std::string& text, double font) {
  // Multi-byte UTF-8 sequences count as one character.
  std::size_t chars = 0;
  for (unsigned char c : text) chars += (c & 0xC0) != 0x80;
  return static_cast<double>(chars) * kCharAdvance * font;
}

Rect layout_bounds(const std::vector<const Pin*>& pins) {
  Rect r = pad_bounds(*pins.front());
  for (const Pin* p : pins) {
    const Rect b = pad_bounds(*p);
    r.x0 = std::min(r.x0, b.x0);
    r.y0 = std::min(r.y0, b.y0);
    r.x1 = std::max(r.x1, b.x1);
    r.y1 = std::max(r.y1, b.y1);
  }
  return r;
}

}  // namespace

std::string_view to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::pitch: return "pitch";
    case DimensionKind::pad_width: return "pad-width";
    case DimensionKind::pad_height: return "pad-height";
    case DimensionKind::row_span: return "row-span";
    case DimensionKind::grid_pitch: return "grid-pitch";
  }
  return "pitch";
}

void check_render_spec(const RenderSpec& spec) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(spec.px_per_mm)) throw RenderError("px_per_mm must be positive");
  if (!positive(spec.font_size_pt)) throw RenderError("font size must be positive");
  if (!(std::isfinite(spec.margin_mm) && spec.margin_mm >= 0.0)) {
    throw RenderError("margin must be non-negative");
  }
  if (!(std::isfinite(spec.pad_stroke_px) && spec.pad_stroke_px >= 0.0) ||
      !(std::isfinite(spec.dimension_stroke_px) && spec.dimension_stroke_px >= 0.0)) {
    throw RenderError("stroke widths must be non-negative");
  }
  if (spec.omission_threshold != 0 && spec.omission_threshold < 4) {
    throw RenderError("omission threshold must be 0 (disabled) or at least 4");
  }
  if (!(std::isfinite(spec.text_jitter_mm) && spec.text_jitter_mm >= 0.0)) {
    throw RenderError("text jitter must be non-negative");
  }
}

AnnotationPlan plan_annotations(const FootprintGeometry& geometry, const RenderSpec& spec) {
  check_render_spec(spec);
  require_valid(geometry);
  const auto pins = ordered(geometry);

  AnnotationPlan plan;
  plan.summary.package_class = geometry.package_class;
  plan.summary.pins = static_cast<int>(pins.size());
  plan.summary.rows = static_cast<int>(cluster(pins, cy_of).size());
  plan.summary.cols = static_cast<int>(cluster(pins, cx_of).size());
  plan.summary.shape = pins.front()->shape;

  const Structure s = analyze(pins, geometry.package_class.topology);
  const std::vector<Pending> pending = pending_annotations(pins, s);

  const double font = font_mm(spec);
  const double gap = 0.5 * font;
  const Rect box = layout_bounds(pins);

  for (const auto& p : pending) {
    Annotation a;
    a.kind = p.kind;
    a.value = p.value;
    a.anchors = p.anchors;
    a.label = format_trimmed(p.value, 2);
    a.size_group = p.size_group;
    plan.annotations.push_back(std::move(a));
  }

  // Vertical lanes to the right of the pads.
  double max_label = 0.0;
  for (const auto& a : plan.annotations) max_label = std::max(max_label, text_width(a.label, font));
  const double lane_w = max_label + 2.0 * gap;
  double lane_x = box.x1 + 2.0 * gap;
  double right_floor = box.y0;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto& a = plan.annotations[i];
    for (std::size_t k = 0; k < pending[i].leaders.size(); ++k) {
      const auto& l = pending[i].leaders[k];
      if (l.axis != Axis::y) continue;
      Leader out{Axis::y, l.fa, l.fb, {lane_x, l.fa.y}, {lane_x, l.fb.y}};
      if (k == 0 || a.leaders.empty()) {
        const double w = text_width(a.label, font);
        double cy = (l.fa.y + l.fb.y) / 2.0;
        if (box.y1 - box.y0 >= font) cy = std::clamp(cy, box.y0 + font / 2.0, box.y1 - font / 2.0);
        a.label_box = {lane_x + gap / 2.0, cy - font / 2.0, lane_x + gap / 2.0 + w, cy + font / 2.0};
        right_floor = std::min(right_floor, a.label_box.y0);
      }
      a.leaders.push_back(out);
      lane_x += lane_w;
    }
  }

  // Horizontal lanes below everything drawn so far.
  double lane_y = std::min(box.y0, right_floor) - 2.0 * gap;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto& a = plan.annotations[i];
    const bool labelled = !a.leaders.empty();
    for (const auto& l : pending[i].leaders) {
      if (l.axis != Axis::x) continue;
      Leader out{Axis::x, l.fa, l.fb, {l.fa.x, lane_y}, {l.fb.x, lane_y}};
      if (!labelled && a.leaders.empty()) {
        const double w = text_width(a.label, font);
        const double cx = (l.fa.x + l.fb.x) / 2.0;
        a.label_box = {cx - w / 2.0, lane_y - gap / 2.0 - font, cx + w / 2.0, lane_y - gap / 2.0};
      }
      a.leaders.push_back(out);
      lane_y -= font + 2.0 * gap;
    }
  }

  for (auto& a : plan.annotations) {
    a.label_anchor = {(a.label_box.x0 + a.label_box.x1) / 2.0, (a.label_box.y0 + a.label_box.y1) / 2.0};
  }
  return plan;
}

FootprintGeometry reconstruct_geometry(const AnnotationPlan& plan) {
  const LayoutSummary& sum = plan.summary;
  auto value = [](const Annotation& a) {
    double v = 0.0;
    if (!parse_number(a.label, v)) throw RenderError("label '" + a.label + "' is not a number");
    return v;
  };
  auto all = [&](DimensionKind kind) {
    std::vector<const Annotation*> out;
    for (const auto& a : plan.annotations) {
      if (a.kind == kind) out.push_back(&a);
    }
    return out;
  };
  auto single = [&](DimensionKind kind, bool required) -> const Annotation* {
    const auto found = all(kind);
    if (found.size() > 1) {
      throw RenderError("plan has " + std::to_string(found.size()) + " " +
                        std::string(to_string(kind)) + " values; the layout is not regular");
    }
    if (found.empty()) {
      if (required) throw RenderError("plan has no " + std::string(to_string(kind)) + " annotation");
      return nullptr;
    }
    return found.front();
  };
  auto require_axis = [](const Annotation* a, Axis axis) {
    if (a && (a->leaders.empty() || a->leaders.front().axis != axis)) {
      throw RenderError("unsupported orientation for " + std::string(to_string(a->kind)));
    }
  };

  struct SizePair {
    double w = 0, h = 0;
    int anchor = 0;
  };
  std::map<int, SizePair> sizes;
  for (const auto& a : plan.annotations) {
    if (a.size_group < 0) continue;
    auto& s = sizes[a.size_group];
    if (a.kind == DimensionKind::pad_width) {
      s.w = value(a);
      s.anchor = a.anchors.empty() ? 0 : a.anchors.front();
      if (sum.shape == PadShape::circle) s.h = s.w;
    } else {
      s.h = value(a);
    }
  }
  if (sizes.empty()) throw RenderError("plan has no pad size");

  FootprintParams p;
  p.shape = sum.shape;
  p.pins = sum.pins;
  const Topology topo = sum.package_class.topology;
  auto one_size = [&]() {
    if (sizes.size() != 1) throw RenderError("plan has several pad sizes");
    return sizes.begin()->second;
  };

  switch (topo) {
    case Topology::dual_row: {
      const auto* sp = single(DimensionKind::row_span, true);
      require_axis(sp, Axis::x);
      const auto* pitch = single(DimensionKind::pitch, sum.pins > 2);
      require_axis(pitch, Axis::y);
      const SizePair s = one_size();
      p.row_span = value(*sp);
      p.pitch = pitch ? value(*pitch) : 1.0;
      p.pad_length = s.w;
      p.pad_width = s.h;
      break;
    }
    case Topology::quad_perimeter: {
      const auto spans = all(DimensionKind::row_span);
      if (spans.size() != 2 || value(*spans[0]) != value(*spans[1])) {
        throw RenderError("quad reconstruction needs two equal row spans");
      }
      const auto* pitch = single(DimensionKind::pitch, sum.pins > 4);
      const int n = sum.pins / 4;
      const SizePair* side = nullptr;
      const SizePair* rotated = nullptr;
      for (const auto& [group, s] : sizes) {
        const int which = n > 0 ? (s.anchor - 1) / n : 0;
        (which == 0 || which == 2 ? side : rotated) = &s;
      }
      p.row_span = value(*spans[0]);
      p.pitch = pitch ? value(*pitch) : 1.0;
      if (side) {
        p.pad_length = side->w;
        p.pad_width = side->h;
      } else {
        p.pad_width = rotated->w;
        p.pad_length = rotated->h;
      }
      break;
    }
    case Topology::full_grid: {
      const auto pitches = all(DimensionKind::grid_pitch);
      if (pitches.size() > 1) throw RenderError("grid reconstruction needs one grid pitch");
      if (pitches.empty() && (sum.rows > 1 || sum.cols > 1)) {
        throw RenderError("plan has no grid-pitch annotation");
      }
      const SizePair s = one_size();
      p.rows = sum.rows;
      p.cols = sum.cols;
      p.pins = sum.rows * sum.cols;
      p.pitch = pitches.empty() ? 1.0 : value(*pitches.front());
      p.pad_width = s.w;
      p.pad_length = s.h;
      break;
    }
    case Topology::single_row: {
      const auto* pitch = single(DimensionKind::pitch, sum.pins > 1);
      require_axis(pitch, Axis::x);
      const SizePair s = one_size();
      p.pitch = pitch ? value(*pitch) : 1.0;
      p.pad_width = s.w;
      p.pad_length = s.h;
      break;
    }
    case Topology::two_pad: {
      const auto* sp = single(DimensionKind::row_span, true);
      require_axis(sp, Axis::x);
      const SizePair s = one_size();
      p.row_span = value(*sp);
      p.pad_length = s.w;
      p.pad_width = s.h;
      break;
    }
  }
  try {
    return make_footprint(sum.package_class, p);
  } catch (const GenerationError& e) {
    throw RenderError(std::string("plan does not describe a layout: ") + e.what());
  }
}

// ---------------------------------------------------------------- SVG output

namespace {

std::string num(double v) { return format_fixed(v, 3); }

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Maps mm (+y up) to SVG pixels (+y down).
struct Frame {
  double x0 = 0, y1 = 0, scale = 1;
  double width = 0, height = 0;
  double X(double x) const { return (x - x0) * scale; }
  double Y(double y) const { return (y1 - y) * scale; }
};

struct Extent {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();
  void add(double x, double y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  void add(const Rect& r) {
    add(r.x0, r.y0);
    add(r.x1, r.y1);
  }
  bool empty() const { return !(x1 >= x0 && y1 >= y0); }
};

Frame make_frame(const Extent& e, const RenderSpec& spec) {
  if (e.empty()) throw RenderError("nothing to draw");
  Frame f;
  f.scale = spec.px_per_mm;
  f.x0 = e.x0 - spec.margin_mm;
  f.y1 = e.y1 + spec.margin_mm;
  f.width = (e.x1 - e.x0 + 2.0 * spec.margin_mm) * f.scale;
  f.height = (e.y1 - e.y0 + 2.0 * spec.margin_mm) * f.scale;
  if (!(std::isfinite(f.width) && std::isfinite(f.height) && f.width > 0.0 && f.height > 0.0)) {
    throw RenderError("zero-area viewport");
  }
  return f;
}

std::string svg_open(const Frame& f) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(f.width) +
         "\" height=\"" + num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) +
         "\">\n";
}

bool usable(const Pin& p) {
  return std::isfinite(p.cx) && std::isfinite(p.cy) && std::isfinite(p.w) && std::isfinite(p.h) &&
         p.w > 0.0 && p.h > 0.0;
}

std::string pad_element(const Pin& p, const Frame& f) {
  const Rect r = pad_bounds(p);
  const std::string data = " data-pin=\"" + escape_text(p.designator) + "\"";
  if (p.shape == PadShape::circle) {
    if (p.w == p.h) {
      return "<circle class=\"pad\"" + data + " cx=\"" + num(f.X(p.cx)) + "\" cy=\"" +
             num(f.Y(p.cy)) + "\" r=\"" + num(p.w / 2.0 * f.scale) + "\"/>\n";
    }
    return "<ellipse class=\"pad\"" + data + " cx=\"" + num(f.X(p.cx)) + "\" cy=\"" +
           num(f.Y(p.cy)) + "\" rx=\"" + num(p.w / 2.0 * f.scale) + "\" ry=\"" +
           num(p.h / 2.0 * f.scale) + "\"/>\n";
  }
  std::string out = "<rect class=\"pad\"" + data + " x=\"" + num(f.X(r.x0)) + "\" y=\"" +
                    num(f.Y(r.y1)) + "\" width=\"" + num(p.w * f.scale) + "\" height=\"" +
                    num(p.h * f.scale) + "\"";
  if (p.shape == PadShape::stadium) {
    const std::string rad = num(std::min(p.w, p.h) / 2.0 * f.scale);
    out += " rx=\"" + rad + "\" ry=\"" + rad + "\"";
  }
  return out + "/>\n";
}

std::string line(const char* cls, const Frame& f, Vec2 a, Vec2 b, const std::string& extra = {}) {
  return std::string("<line class=\"") + cls + "\" x1=\"" + num(f.X(a.x)) + "\" y1=\"" +
         num(f.Y(a.y)) + "\" x2=\"" + num(f.X(b.x)) + "\" y2=\"" + num(f.Y(b.y)) + "\"" + extra +
         "/>\n";
}

std::string text(const char* cls, const Frame& f, Vec2 at, const std::string& s) {
  return std::string("<text class=\"") + cls + "\" x=\"" + num(f.X(at.x)) + "\" y=\"" +
         num(f.Y(at.y)) + "\">" + escape_text(s) + "</text>\n";
}

struct Elision {
  std::set<int> hidden;  // ordinals
  struct Mark {
    std::vector<Vec2> dots;
    Vec2 callout;
    std::string text;
  };
  std::vector<Mark> marks;
};

Elision plan_elision(const std::vector<const Pin*>& pins, const Structure& s,
                     const AnnotationPlan& plan, const RenderSpec& spec, double font) {
  Elision e;
  if (spec.omission_threshold <= 0) return e;
  std::set<int> anchored;
  for (const auto& a : plan.annotations) anchored.insert(a.anchors.begin(), a.anchors.end());
  double cx = 0, cy = 0;
  for (const Pin* p : pins) {
    cx += p->cx;
    cy += p->cy;
  }
  cx /= static_cast<double>(pins.size());
  cy /= static_cast<double>(pins.size());

  for (const auto& row : s.rows) {
    const std::size_t m = row.size();
    if (m <= static_cast<std::size_t>(spec.omission_threshold) || m < 7) continue;
    for (std::size_t i = 3; i + 3 < m; ++i) {
      if (!anchored.count(row[i]->ordinal)) e.hidden.insert(row[i]->ordinal);
    }
    const Pin* a = row[2];
    const Pin* b = row[m - 3];
    Elision::Mark mark;
    const Vec2 mid{(a->cx + b->cx) / 2.0, (a->cy + b->cy) / 2.0};
    Vec2 dir{b->cx - a->cx, b->cy - a->cy};
    const double len = std::hypot(dir.x, dir.y);
    dir = {dir.x / len, dir.y / len};
    const double step = std::min(len / 4.0, std::max(a->w, a->h));
    for (int k = -1; k <= 1; ++k) mark.dots.push_back({mid.x + k * step * dir.x, mid.y + k * step * dir.y});
    // Callout outside the row, away from the layout center.
    Vec2 out{-dir.y, dir.x};
    if (out.x * (mid.x - cx) + out.y * (mid.y - cy) < 0) out = {-out.x, -out.y};
    const double reach = std::max(a->w, a->h) / 2.0 + 1.5 * font;
    mark.callout = {mid.x + out.x * reach, mid.y + out.y * reach};
    mark.text = row.front()->designator + " " + kEllipsis + " " + row.back()->designator;
    e.marks.push_back(std::move(mark));
  }
  return e;
}

const char* kStyle =
    "<style type=\"text/css\">\n"
    ".pad { fill: #b87333; stroke: #000000; }\n"
    ".pin-number { fill: #000000; text-anchor: middle; dominant-baseline: central; }\n"
    ".dimension line { stroke: #000000; fill: none; }\n"
    ".label, .callout { fill: #000000; text-anchor: middle; dominant-baseline: central; }\n"
    ".ellipsis circle { fill: #000000; }\n"
    ".pin1-marker { fill: #000000; }\n"
    "</style>\n";

std::string marker_defs() {
  return "<defs>\n"
         "<marker id=\"arrow-end\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
         "markerHeight=\"8\" markerUnits=\"userSpaceOnUse\" orient=\"auto\">"
         "<path d=\"M0,0 L10,5 L0,10 z\"/></marker>\n"
         "<marker id=\"arrow-start\" viewBox=\"0 0 10 10\" refX=\"0\" refY=\"5\" markerWidth=\"8\" "
         "markerHeight=\"8\" markerUnits=\"userSpaceOnUse\" orient=\"auto\">"
         "<path d=\"M10,0 L0,5 L10,10 z\"/></marker>\n"
         "</defs>\n";
}

bool shown(const Annotation& a, const RenderSpec& spec) {
  switch (a.kind) {
    case DimensionKind::pitch:
    case DimensionKind::grid_pitch: return spec.show_pitch;
    case DimensionKind::pad_width:
    case DimensionKind::pad_height: return spec.show_pad_dims;
    case DimensionKind::row_span: return true;
  }
  return true;
}

}  // namespace

std::string render_svg(const FootprintGeometry& geometry, const RenderSpec& spec) {
  const AnnotationPlan plan = plan_annotations(geometry, spec);
  const auto pins = ordered(geometry);
  const Structure s = analyze(pins, geometry.package_class.topology);
  const double font = font_mm(spec);
  const double gap = 0.5 * font;
  const Elision elision = plan_elision(pins, s, plan, spec, font);

  Extent ext;
  for (const Pin* p : pins) ext.add(pad_bounds(*p));
  for (const auto& a : plan.annotations) {
    if (!shown(a, spec)) continue;
    for (const auto& l : a.leaders) {
      ext.add(l.a.x, l.a.y);
      ext.add(l.b.x, l.b.y);
      const double over = gap / 2.0;
      if (l.axis == Axis::x) ext.add(l.a.x, l.a.y - over);
      else ext.add(l.a.x + over, l.a.y);
    }
    ext.add({a.label_box.x0, a.label_box.y0, a.label_box.x1, a.label_box.y1});
  }
  for (const auto& m : elision.marks) {
    const double w = text_width(m.text, font);
    ext.add({m.callout.x - w / 2.0, m.callout.y - font / 2.0, m.callout.x + w / 2.0,
             m.callout.y + font / 2.0});
  }
  const Pin* first = pins.front();
  const double marker_r = 0.3 * font;
  const Rect fb = pad_bounds(*first);
  const Vec2 marker{fb.x0 - 2.0 * marker_r, fb.y1 + 2.0 * marker_r};
  if (spec.show_pin1_marker) {
    ext.add(marker.x - marker_r, marker.y - marker_r);
    ext.add(marker.x + marker_r, marker.y + marker_r);
  }
  const Frame f = make_frame(ext, spec);
  const double font_px = font * spec.px_per_mm;

  std::string out = svg_open(f);
  out += marker_defs();
  out += kStyle;
  out += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + num(f.width) + "\" height=\"" +
         num(f.height) + "\" fill=\"#ffffff\"/>\n";

  out += "<g class=\"pads\" stroke-width=\"" + num(spec.pad_stroke_px) + "\">\n";
  for (const Pin* p : pins) {
    if (!elision.hidden.count(p->ordinal)) out += pad_element(*p, f);
  }
  out += "</g>\n";

  if (spec.show_pin_numbers) {
    Rng rng(spec.seed);
    out += "<g class=\"pin-numbers\" font-family=\"sans-serif\" font-size=\"" +
           num(0.75 * font_px) + "\">\n";
    for (const Pin* p : pins) {
      if (elision.hidden.count(p->ordinal)) continue;
      Vec2 at{p->cx, p->cy};
      if (spec.text_jitter_mm > 0.0) {
        at.x += (2.0 * rng.uniform01() - 1.0) * spec.text_jitter_mm;
        at.y += (2.0 * rng.uniform01() - 1.0) * spec.text_jitter_mm;
      }
      out += text("pin-number", f, at, p->designator);
    }
    out += "</g>\n";
  }

  for (const auto& m : elision.marks) {
    out += "<g class=\"ellipsis\">\n";
    for (const auto& d : m.dots) {
      out += "<circle cx=\"" + num(f.X(d.x)) + "\" cy=\"" + num(f.Y(d.y)) + "\" r=\"" +
             num(0.15 * font_px) + "\"/>\n";
    }
    out += "<text class=\"callout\" x=\"" + num(f.X(m.callout.x)) + "\" y=\"" +
           num(f.Y(m.callout.y)) + "\" font-family=\"sans-serif\" font-size=\"" + num(font_px) +
           "\">" + escape_text(m.text) + "</text>\n";
    out += "</g>\n";
  }

  if (spec.show_pin1_marker) {
    out += "<circle class=\"pin1-marker\" cx=\"" + num(f.X(marker.x)) + "\" cy=\"" +
           num(f.Y(marker.y)) + "\" r=\"" + num(marker_r * spec.px_per_mm) + "\"/>\n";
  }

  out += "<g class=\"dimensions\" stroke-width=\"" + num(spec.dimension_stroke_px) +
         "\" font-family=\"sans-serif\" font-size=\"" + num(font_px) + "\">\n";
  const std::string arrows =
      spec.arrowheads ? " marker-start=\"url(#arrow-start)\" marker-end=\"url(#arrow-end)\"" : "";
  for (const auto& a : plan.annotations) {
    if (!shown(a, spec)) continue;
    out += "<g class=\"dimension\" data-kind=\"" + std::string(to_string(a.kind)) + "\">\n";
    for (const auto& l : a.leaders) {
      const double over = gap / 2.0;
      if (spec.extension_lines) {
        if (l.axis == Axis::x) {
          out += line("extension", f, l.from_a, {l.a.x, l.a.y - over});
          out += line("extension", f, l.from_b, {l.b.x, l.b.y - over});
        } else {
          out += line("extension", f, l.from_a, {l.a.x + over, l.a.y});
          out += line("extension", f, l.from_b, {l.b.x + over, l.b.y});
        }
      }
      out += line("dimension-line", f, l.a, l.b, arrows);
    }
    out += text("label", f, a.label_anchor, a.label);
    out += "</g>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string render_overlay(const FootprintGeometry& pred, const FootprintGeometry& truth,
                           const RenderSpec& spec) {
  check_render_spec(spec);
  require_valid(truth);
  const double font = font_mm(spec);
  const double font_px = font * spec.px_per_mm;

  Extent ext;
  for (const auto& p : truth.pins) ext.add(pad_bounds(p));
  for (const auto& p : pred.pins) {
    if (usable(p)) ext.add(pad_bounds(p));
  }
  const IouResult iou = layout_iou(pred, truth);
  const std::string legend = "IoU=" + format_fixed(iou.value, 3);
  // Legend rows under the pads: IoU, truth swatch, prediction swatch.
  const double legend_top = ext.y0 - font;
  const double row_h = 1.4 * font;
  ext.add(ext.x0, legend_top - 3.0 * row_h);
  ext.add(ext.x0 + text_width("prediction", font) + 2.0 * font, legend_top);
  const Frame f = make_frame(ext, spec);

  std::string out = svg_open(f);
  out += "<style type=\"text/css\">\n"
         ".truth .pad { fill: #d62728; fill-opacity: 0.45; stroke: #d62728; }\n"
         ".pred .pad { fill: #1f77b4; fill-opacity: 0.45; stroke: #1f77b4; }\n"
         ".legend { fill: #000000; dominant-baseline: central; }\n"
         "</style>\n";
  out += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + num(f.width) + "\" height=\"" +
         num(f.height) + "\" fill=\"#ffffff\"/>\n";
  out += "<g class=\"truth\" stroke-width=\"" + num(spec.pad_stroke_px) + "\">\n";
  for (const auto& p : truth.pins) out += pad_element(p, f);
  out += "</g>\n<g class=\"pred\" stroke-width=\"" + num(spec.pad_stroke_px) + "\">\n";
  for (const auto& p : pred.pins) {
    if (usable(p)) out += pad_element(p, f);
  }
  out += "</g>\n";

  out += "<g class=\"legend-box\" font-family=\"sans-serif\" font-size=\"" + num(font_px) + "\">\n";
  const double x = ext.x0;
  double y = legend_top - row_h / 2.0;
  out += text("legend", f, {x, y}, legend);
  y -= row_h;
  const double sw = 0.8 * font;
  out += "<rect x=\"" + num(f.X(x)) + "\" y=\"" + num(f.Y(y + sw / 2.0)) + "\" width=\"" +
         num(sw * f.scale) + "\" height=\"" + num(sw * f.scale) +
         "\" fill=\"#d62728\" fill-opacity=\"0.45\"/>\n";
  out += text("legend", f, {x + 1.5 * font, y}, "truth");
  y -= row_h;
  out += "<rect x=\"" + num(f.X(x)) + "\" y=\"" + num(f.Y(y + sw / 2.0)) + "\" width=\"" +
         num(sw * f.scale) + "\" height=\"" + num(sw * f.scale) +
         "\" fill=\"#1f77b4\" fill-opacity=\"0.45\"/>\n";
  out += text("legend", f, {x + 1.5 * font, y}, "prediction");
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace padkit
