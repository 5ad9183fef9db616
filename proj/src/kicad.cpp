#include <algorithm>

#include "padkit/format.hpp"
#include "padkit/interchange.hpp"
#include "padkit/sexpr.hpp"

namespace padkit {
namespace {

// Shortest exact decimal, always with a fractional part: 1 -> "1.0".
std::string kicad_number(double v) {
  std::string s = format_shortest(v);
  if (s.find('.') == std::string::npos) s += ".0";
  return s;
}

std::string_view kicad_shape(PadShape shape) {
  switch (shape) {
    case PadShape::rectangle: return "rect";
    case PadShape::circle: return "circle";
    case PadShape::stadium: return "oval";
  }
  return "rect";
}

double atom_number(const SExpr& e, std::string_view what) {
  double v = 0.0;
  if (e.kind != SExpr::Kind::atom || !parse_number(e.text, v)) {
    throw ParseError("expected a number for " + std::string(what), e.offset);
  }
  return v;
}

}  // namespace

std::string export_kicad(const FootprintGeometry& geometry, std::string_view name) {
  require_valid(geometry);
  std::vector<Pin> pins = geometry.pins;
  std::stable_sort(pins.begin(), pins.end(),
                   [](const Pin& a, const Pin& b) { return a.ordinal < b.ordinal; });
  std::string out = "(footprint " + quote_sexpr(name) + "\n  (layer \"F.Cu\")\n  (attr smd)\n";
  for (const auto& p : pins) {
    out += "  (pad " + quote_sexpr(p.designator) + " smd " + std::string(kicad_shape(p.shape)) +
           " (at " + kicad_number(p.cx) + " " + kicad_number(-p.cy) + ") (size " +
           kicad_number(p.w) + " " + kicad_number(p.h) +
           ") (layers \"F.Cu\" \"F.Paste\" \"F.Mask\"))\n";
  }
  out += ")\n";
  return out;
}

KicadFootprint read_kicad_footprint(std::string_view text) {
  const SExpr root = parse_sexpr(text);
  if (root.head() != "footprint" && root.head() != "module") {
    throw SchemaError("expected a (footprint ...) expression");
  }
  KicadFootprint fp;
  if (root.items.size() > 1 && !root.items[1].is_list()) fp.name = root.items[1].text;
  for (const auto& item : root.items) {
    if (item.head() != "pad") continue;
    if (item.items.size() < 4) throw ParseError("pad needs a name, type and shape", item.offset);
    KicadPad pad;
    pad.designator = item.items[1].text;
    pad.type = item.items[2].text;
    pad.shape = item.items[3].text;
    const SExpr* at = item.find("at");
    const SExpr* size = item.find("size");
    if (!at || at->items.size() < 3) throw ParseError("pad without (at x y)", item.offset);
    if (!size || size->items.size() < 3) throw ParseError("pad without (size w h)", item.offset);
    pad.x = atom_number(at->items[1], "pad x");
    pad.y = atom_number(at->items[2], "pad y");
    pad.w = atom_number(size->items[1], "pad width");
    pad.h = atom_number(size->items[2], "pad height");
    fp.pads.push_back(std::move(pad));
  }
  return fp;
}

FootprintGeometry geometry_from_kicad(const KicadFootprint& footprint,
                                      const PackageClass& package_class) {
  FootprintGeometry g;
  g.package_class = package_class;
  g.source_id = footprint.name;
  int ordinal = 1;
  for (const auto& pad : footprint.pads) {
    Pin p;
    p.designator = pad.designator;
    p.ordinal = ordinal++;
    p.cx = pad.x;
    p.cy = pad.y == 0.0 ? 0.0 : -pad.y;
    p.w = pad.w;
    p.h = pad.h;
    if (pad.shape == "circle") {
      p.shape = PadShape::circle;
    } else if (pad.shape == "oval") {
      p.shape = PadShape::stadium;
    } else {
      p.shape = PadShape::rectangle;
    }
    g.pins.push_back(std::move(p));
  }
  return g;
}

}  // namespace padkit
