#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "padkit/geometry.hpp"

namespace padkit {

inline constexpr std::string_view kSchemaVersion = "1.0";

struct Provenance {
  std::string source_format;  // "synthetic", "eda-xml", "kicad", ...
  std::string source_file;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Canonical geometry JSON document.
struct GeometryDocument {
  std::string schema_version{kSchemaVersion};
  FootprintGeometry geometry;
  Provenance provenance;
  friend bool operator==(const GeometryDocument&, const GeometryDocument&) = default;
};

enum class JsonStyle { pretty, compact };

/// Serialize with every number written to 6 decimal places. Throws
/// ValidationError when the geometry is invalid.
std::string write_geometry_json(const GeometryDocument& doc, JsonStyle style = JsonStyle::pretty);
std::string write_geometry_json(const FootprintGeometry& geometry,
                                JsonStyle style = JsonStyle::pretty);

/// Throws ParseError (malformed text), VersionError (unsupported
/// schema_version), SchemaError (missing/mistyped fields, non-finite
/// numbers) or ValidationError (invariant violations).
GeometryDocument parse_geometry_document(std::string_view text);
FootprintGeometry parse_geometry_json(std::string_view text);

// ---------------------------------------------------------------------------
// EDA XML pad-list dialect (see docs/eda-xml-dialect.md)

struct EdaImport {
  FootprintGeometry geometry;
  /// One entry per skipped unknown element.
  std::vector<std::string> warnings;
};

/// Ordinals follow document order; the result is recentered and validated.
/// `source_id` overrides the footprint's `name` attribute when non-empty.
EdaImport parse_eda_xml(std::string_view bytes, std::string_view source_id = {});

/// Emit a document in the same dialect; numbers use the shortest exact form.
std::string write_eda_xml(const FootprintGeometry& geometry);

// ---------------------------------------------------------------------------
// KiCad footprint text

/// s-expression footprint with one SMD pad per pin. KiCad's y axis points
/// down, so pad y positions are negated.
std::string export_kicad(const FootprintGeometry& geometry, std::string_view name);

struct KicadPad {
  std::string designator;
  std::string type;
  std::string shape;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct KicadFootprint {
  std::string name;
  std::vector<KicadPad> pads;
};

/// Read the pads of a footprint written by export_kicad (or KiCad itself).
KicadFootprint read_kicad_footprint(std::string_view text);

/// Convert pads read back from KiCad text to toolkit coordinates (+y up).
FootprintGeometry geometry_from_kicad(const KicadFootprint& footprint,
                                      const PackageClass& package_class);

}  // namespace padkit
