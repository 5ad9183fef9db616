#include <cmath>

#include <json.hpp>

#include "padkit/format.hpp"
#include "padkit/interchange.hpp"

namespace padkit {
namespace {

using nlohmann::json;

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

std::string number(double v) { return format_fixed(v, 6); }

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + " missing '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + " field '" + key + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw SchemaError(where + " field '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(where + " field '" + key + "' is not finite");
  return d;
}

}  // namespace

std::string write_geometry_json(const GeometryDocument& doc, JsonStyle style) {
  require_valid(doc.geometry);
  const auto& g = doc.geometry;
  const bool pretty = style == JsonStyle::pretty;
  const std::string nl = pretty ? "\n" : "";
  const std::string in1 = pretty ? "  " : "";
  const std::string in2 = pretty ? "    " : "";
  const std::string sp = pretty ? " " : "";

  std::string out = "{" + nl;
  auto kv = [&](const std::string& key, const std::string& value, bool last = false) {
    out += in1 + json_string(key) + ":" + sp + value + (last ? "" : ",") + nl;
  };
  kv("schema_version", json_string(doc.schema_version));
  kv("source_id", json_string(g.source_id));
  kv("package_class", json_string(g.package_class.name));
  kv("origin", json_string(to_string(g.origin)));
  kv("provenance", "{" + json_string("source_format") + ":" + sp + json_string(doc.provenance.source_format) +
                       "," + sp + json_string("source_file") + ":" + sp +
                       json_string(doc.provenance.source_file) + "}");
  out += in1 + json_string("pins") + ":" + sp + "[" + nl;
  for (std::size_t i = 0; i < g.pins.size(); ++i) {
    const Pin& p = g.pins[i];
    out += in2 + "{\"designator\":" + sp + json_string(p.designator) + "," + sp +
           "\"ordinal\":" + sp + std::to_string(p.ordinal) + "," + sp + "\"cx\":" + sp +
           number(p.cx) + "," + sp + "\"cy\":" + sp + number(p.cy) + "," + sp +
           "\"shape\":" + sp + json_string(to_string(p.shape)) + "," + sp + "\"w\":" + sp +
           number(p.w) + "," + sp + "\"h\":" + sp + number(p.h) + "}";
    out += (i + 1 < g.pins.size() ? "," : "") + nl;
  }
  out += in1 + "]" + nl + "}";
  if (pretty) out += "\n";
  return out;
}

std::string write_geometry_json(const FootprintGeometry& geometry, JsonStyle style) {
  GeometryDocument doc;
  doc.geometry = geometry;
  return write_geometry_json(doc, style);
}

GeometryDocument parse_geometry_document(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed geometry JSON", e.byte > 0 ? e.byte - 1 : 0);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("unreadable geometry JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("geometry document must be a JSON object");

  GeometryDocument doc;
  doc.schema_version = string_field(root, "schema_version", "document");
  if (doc.schema_version != kSchemaVersion) {
    throw VersionError("unsupported schema_version '" + doc.schema_version + "' (supported: " +
                       std::string(kSchemaVersion) + ")");
  }
  auto& g = doc.geometry;
  if (root.contains("source_id")) g.source_id = string_field(root, "source_id", "document");
  const std::string cls = string_field(root, "package_class", "document");
  const auto pc = find_package_class(cls);
  if (!pc) throw SchemaError("unknown package_class '" + cls + "'");
  g.package_class = *pc;
  const std::string origin = string_field(root, "origin", "document");
  const auto o = origin_from_string(origin);
  if (!o) throw SchemaError("unknown origin '" + origin + "'");
  g.origin = *o;
  if (auto it = root.find("provenance"); it != root.end()) {
    if (!it->is_object()) throw SchemaError("provenance must be an object");
    if (it->contains("source_format"))
      doc.provenance.source_format = string_field(*it, "source_format", "provenance");
    if (it->contains("source_file"))
      doc.provenance.source_file = string_field(*it, "source_file", "provenance");
  }

  const json& pins = field(root, "pins", "document");
  if (!pins.is_array()) throw SchemaError("'pins' must be an array");
  g.pins.reserve(pins.size());
  for (std::size_t i = 0; i < pins.size(); ++i) {
    const json& jp = pins[i];
    const std::string where = "pins[" + std::to_string(i) + "]";
    if (!jp.is_object()) throw SchemaError(where + " must be an object");
    Pin p;
    p.designator = string_field(jp, "designator", where);
    const json& ord = field(jp, "ordinal", where);
    if (!ord.is_number_integer()) throw SchemaError(where + " field 'ordinal' must be an integer");
    p.ordinal = ord.get<int>();
    p.cx = number_field(jp, "cx", where);
    p.cy = number_field(jp, "cy", where);
    const std::string shape = string_field(jp, "shape", where);
    const auto s = pad_shape_from_string(shape);
    if (!s) throw SchemaError(where + " has unknown shape '" + shape + "'");
    p.shape = *s;
    p.w = number_field(jp, "w", where);
    p.h = number_field(jp, "h", where);
    g.pins.push_back(std::move(p));
  }
  require_valid(g);
  return doc;
}

FootprintGeometry parse_geometry_json(std::string_view text) {
  return parse_geometry_document(text).geometry;
}

}  // namespace padkit
