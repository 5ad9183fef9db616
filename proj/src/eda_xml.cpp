#include <algorithm>

#include "padkit/format.hpp"
#include "padkit/interchange.hpp"
#include "xml.hpp"

namespace padkit {
namespace {

double pad_number(const xml::Element& el, std::size_t index, const char* key) {
  const auto raw = el.attribute(key);
  const std::string where = "pad[" + std::to_string(index) + "]";
  if (!raw) throw SchemaError(where + " missing '" + key + "'");
  double v = 0.0;
  if (!parse_number(*raw, v)) {
    throw SchemaError(where + " attribute '" + key + "' is not a finite number: '" + *raw + "'");
  }
  return v;
}

void collect_pads(const xml::Element& parent, std::vector<const xml::Element*>& pads,
                  std::vector<std::string>& warnings) {
  for (const auto& child : parent.children) {
    if (child.name == "pad") {
      pads.push_back(&child);
    } else if (child.name == "pads") {
      collect_pads(child, pads, warnings);
    } else {
      warnings.push_back("skipped unknown element <" + child.name + "> at byte " +
                         std::to_string(child.offset));
    }
  }
}

}  // namespace

EdaImport parse_eda_xml(std::string_view bytes, std::string_view source_id) {
  const xml::Element root = xml::parse(bytes);
  if (root.name != "footprint") {
    throw SchemaError("root element must be <footprint>, found <" + root.name + ">");
  }
  if (const auto units = root.attribute("units"); units && *units != "mm") {
    throw SchemaError("footprint units must be 'mm', found '" + *units + "'");
  }
  const auto pkg = root.attribute("package");
  if (!pkg) throw SchemaError("footprint missing 'package'");
  const auto pc = find_package_class(*pkg);
  if (!pc) throw SchemaError("footprint has unknown package '" + *pkg + "'");

  EdaImport result;
  auto& g = result.geometry;
  g.package_class = *pc;
  g.source_id = source_id.empty() ? root.attribute("name").value_or("") : std::string(source_id);

  std::vector<const xml::Element*> pads;
  collect_pads(root, pads, result.warnings);
  if (pads.empty()) throw SchemaError("footprint contains no <pad> elements");

  for (std::size_t i = 0; i < pads.size(); ++i) {
    const xml::Element& el = *pads[i];
    const std::size_t index = i + 1;
    Pin p;
    const auto num = el.attribute("num");
    if (!num) throw SchemaError("pad[" + std::to_string(index) + "] missing 'num'");
    p.designator = *num;
    p.ordinal = static_cast<int>(index);
    p.cx = pad_number(el, index, "x");
    p.cy = pad_number(el, index, "y");
    p.w = pad_number(el, index, "w");
    p.h = pad_number(el, index, "h");
    const std::string shape = el.attribute("shape").value_or("rect");
    const auto s = pad_shape_from_string(shape);
    if (!s) {
      throw SchemaError("pad[" + std::to_string(index) + "] has unknown shape '" + shape + "'");
    }
    p.shape = *s;
    g.pins.push_back(std::move(p));
  }

  // Duplicate designators and bad dimensions are reported before the
  // geometry is moved, so messages refer to source coordinates.
  require_valid(g);
  g = recenter(std::move(g));
  return result;
}

std::string write_eda_xml(const FootprintGeometry& geometry) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<footprint name=\"" + xml::escape_attribute(geometry.source_id) + "\" package=\"" +
         xml::escape_attribute(geometry.package_class.name) + "\" units=\"mm\">\n  <pads>\n";
  std::vector<Pin> pins = geometry.pins;
  std::stable_sort(pins.begin(), pins.end(),
                   [](const Pin& a, const Pin& b) { return a.ordinal < b.ordinal; });
  for (const auto& p : pins) {
    const char* shape = p.shape == PadShape::rectangle ? "rect"
                        : p.shape == PadShape::circle  ? "circle"
                                                       : "oval";
    out += "    <pad num=\"" + xml::escape_attribute(p.designator) + "\" x=\"" +
           format_shortest(p.cx) + "\" y=\"" + format_shortest(p.cy) + "\" w=\"" +
           format_shortest(p.w) + "\" h=\"" + format_shortest(p.h) + "\" shape=\"" + shape +
           "\"/>\n";
  }
  out += "  </pads>\n</footprint>\n";
  return out;
}

}  // namespace padkit
