#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "../support/generators.hpp"
#include "padkit/interchange.hpp"
#include "padkit/sexpr.hpp"

using namespace padkit;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) {
  return read_file(std::string(PADKIT_SOURCE_DIR) + "/docs/golden/" + name);
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const char* kTwoPad = R"(<footprint name="X" package="CHIP2">
  <pad num="1" x="-1" y="0" w="0.6" h="1.0"/>
  <pad num="2" x="1" y="0" w="0.6" h="1.0"/>
</footprint>)";

}  // namespace

TEST_CASE("parse_eda_xml: minimal document") {
  const auto imp = parse_eda_xml(kTwoPad);
  const auto& g = imp.geometry;
  REQUIRE(g.pins.size() == 2);
  CHECK(g.origin == Origin::layout_center);
  CHECK(g.pins[0].ordinal == 1);
  CHECK(g.pins[1].ordinal == 2);
  CHECK(g.pins[0].cx == -1.0);
  CHECK(g.pins[1].cx == 1.0);
  CHECK(g.pins[0].w == 0.6);
  CHECK(g.pins[0].h == 1.0);
  CHECK(g.source_id == "X");
  CHECK(imp.warnings.empty());
}

TEST_CASE("parse_eda_xml: errors") {
  const std::string missing_w = R"(<footprint package="SOIC">
  <pad num="1" x="0" y="0" w="1" h="1"/>
  <pad num="2" x="2" y="0" h="1"/>
</footprint>)";
  CHECK_THROWS_WITH_AS(parse_eda_xml(missing_w), "pad[2] missing 'w'", SchemaError);

  const std::string broken = R"(<footprint package="SOIC"><pad num="1" x="0" y="0" w="1" h="1"></footprint>)";
  try {
    parse_eda_xml(broken);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == std::string(broken).find("</footprint>") + 2);
  }

  const std::string dup = R"(<footprint package="SOIC">
  <pad num="1" x="0" y="0" w="1" h="1"/>
  <pad num="1" x="2" y="0" w="1" h="1"/>
</footprint>)";
  try {
    parse_eda_xml(dup);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].kind == ViolationKind::duplicate_designator);
  }

  CHECK_THROWS_AS(parse_eda_xml(R"(<footprint package="SOIC"><pad num="1" x="a" y="0" w="1" h="1"/></footprint>)"),
                  SchemaError);
  CHECK_THROWS_AS(parse_eda_xml(R"(<footprint package="NOPE"><pad num="1" x="0" y="0" w="1" h="1"/></footprint>)"),
                  SchemaError);
  CHECK_THROWS_AS(parse_eda_xml(R"(<footprint package="SOIC" units="mil"/>)"), SchemaError);
  CHECK_THROWS_AS(parse_eda_xml(R"(<board/>)"), SchemaError);
  CHECK_THROWS_AS(parse_eda_xml(""), ParseError);
}

TEST_CASE("parse_eda_xml: unknown elements are skipped with a warning") {
  const auto imp = parse_eda_xml(golden("soic8.xml"));
  CHECK(imp.geometry.pins.size() == 8);
  REQUIRE(imp.warnings.size() == 1);
  CHECK(imp.warnings[0].find("<outline>") != std::string::npos);
}

TEST_CASE("golden chip2 is recentered") {
  const auto g = parse_eda_xml(golden("chip2.xml")).geometry;
  REQUIRE(g.pins.size() == 2);
  CHECK(g.pins[0].cx == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(g.pins[1].cx == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(g.pins[0].cy == 0.0);
  CHECK(g.package_class.name == "CHIP2");
}

TEST_CASE("SOIC-8 XML round trip is field-identical") {
  const auto g = parse_eda_xml(golden("soic8.xml")).geometry;
  const auto again = parse_eda_xml(write_eda_xml(g)).geometry;
  CHECK(again == g);
  CHECK(g.pins[0].cx == -2.7);
  CHECK(g.pins[0].cy == 1.905);
  CHECK(g.pins[7].designator == "8");
}

TEST_CASE("parse_eda_xml never crashes on mutated input") {
  const std::string base = golden("soic8.xml");
  std::mt19937_64 rng(17);
  const std::string alphabet = "<>/=\"'&;# \nabcpadxyw0123456789.-";
  int parsed = 0;
  int rejected = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string text = base;
    const int edits = testing::uniform_int(rng, 1, 6);
    for (int e = 0; e < edits; ++e) {
      const auto pos = static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(text.size()) - 1));
      switch (testing::uniform_int(rng, 0, 2)) {
        case 0: text.erase(pos, 1); break;
        case 1: text.insert(text.begin() + static_cast<long>(pos), alphabet[rng() % alphabet.size()]); break;
        default: text[pos] = alphabet[rng() % alphabet.size()];
      }
    }
    try {
      parse_eda_xml(text);
      ++parsed;
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 2000);
  CHECK(rejected > 0);
}

TEST_CASE("geometry JSON: six decimals and round trip") {
  const auto g = parse_eda_xml(golden("soic8.xml")).geometry;
  const std::string text = write_geometry_json(g);
  CHECK(text.find("\"cx\": -2.700000") != std::string::npos);
  CHECK(text.find("\"origin\": \"layout-center\"") != std::string::npos);
  CHECK(parse_geometry_json(text) == g);
  CHECK(parse_geometry_json(write_geometry_json(g, JsonStyle::compact)) == g);
  CHECK(write_geometry_json(g, JsonStyle::compact).find('\n') == std::string::npos);

  GeometryDocument doc;
  doc.geometry = g;
  doc.provenance = {"eda-xml", "soic8.xml"};
  CHECK(parse_geometry_document(write_geometry_json(doc)) == doc);
}

TEST_CASE("geometry JSON round trip is the identity on random geometries") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 300; ++i) {
    const auto g = recenter(testing::random_geometry(rng));
    // Recentering may leave values off the 1e-6 grid; snap them as a writer
    // of canonical files would.
    auto snapped = g;
    for (auto& p : snapped.pins) {
      p.cx = testing::quantize(p.cx, 1e-6);
      p.cy = testing::quantize(p.cy, 1e-6);
    }
    auto src = testing::random_geometry(rng);
    CHECK(parse_geometry_json(write_geometry_json(src)) == src);
    if (is_clean(validate(snapped))) {
      CHECK(parse_geometry_json(write_geometry_json(snapped)) == snapped);
    }
  }
}

TEST_CASE("geometry JSON rejects bad documents") {
  const std::string good = write_geometry_json(parse_eda_xml(kTwoPad).geometry);

  std::string neg = good;
  neg.replace(neg.find("\"w\": 0.600000"), 13, "\"w\": -1");
  try {
    parse_geometry_json(neg);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    bool found = false;
    for (const auto& v : e.violations()) found |= v.kind == ViolationKind::non_positive_dimension;
    CHECK(found);
  }

  std::string version = good;
  version.replace(version.find("\"1.0\""), 5, "\"9.9\"");
  CHECK_THROWS_AS(parse_geometry_json(version), VersionError);

  std::string nan = good;
  nan.replace(nan.find("\"cx\": -1.000000"), 15, "\"cx\": NaN");
  CHECK_THROWS_AS(parse_geometry_json(nan), ParseError);

  std::string inf = good;
  inf.replace(inf.find("\"cx\": -1.000000"), 15, "\"cx\": 1e999");
  CHECK_THROWS_AS(parse_geometry_json(inf), Error);

  std::string missing = good;
  missing.replace(missing.find("\"shape\""), 7, "\"shapx\"");
  CHECK_THROWS_AS(parse_geometry_json(missing), SchemaError);

  CHECK_THROWS_AS(parse_geometry_json("{\"schema_version\": "), ParseError);
}

TEST_CASE("800-pin BGA JSON round trip is fast") {
  FootprintGeometry g;
  g.package_class = package_class("BGA");
  g.origin = Origin::layout_center;
  int ordinal = 1;
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 40; ++c) {
      g.pins.push_back({std::to_string(ordinal), ordinal, -19.5 + c, 9.5 - r, PadShape::circle, 0.5, 0.5});
      ++ordinal;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const auto back = parse_geometry_json(write_geometry_json(g));
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  CHECK(back == g);
  CHECK(ms < 50.0);
}

TEST_CASE("export_kicad") {
  const auto chip = parse_eda_xml(kTwoPad).geometry;
  const std::string text = export_kicad(chip, "R_TEST");
  CHECK(count_of(text, "(pad ") == 2);
  CHECK(text.rfind("(footprint \"R_TEST\"", 0) == 0);
  CHECK(text.find("(pad \"1\" smd rect (at -1.0 0.0) (size 0.6 1.0) (layers \"F.Cu\" \"F.Paste\" \"F.Mask\"))") !=
        std::string::npos);
  CHECK(export_kicad(chip, "R_TEST") == text);

  FootprintGeometry one;
  one.package_class = package_class("SIP");
  one.pins.push_back({"1", 1, 1.0, 2.0, PadShape::circle, 1.0, 1.0});
  const std::string t1 = export_kicad(one, "P");
  CHECK(t1.find("(at 1.0 -2.0)") != std::string::npos);
  CHECK(t1.find("smd circle") != std::string::npos);

  one.pins[0].shape = PadShape::stadium;
  one.pins[0].w = 2.0;
  CHECK(export_kicad(one, "P").find("smd oval") != std::string::npos);
}

TEST_CASE("export_kicad round trip on random geometries") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const auto g = testing::random_geometry(rng);
    const auto fp = read_kicad_footprint(export_kicad(g, "G" + std::to_string(i)));
    CHECK(fp.name == "G" + std::to_string(i));
    REQUIRE(fp.pads.size() == g.pins.size());
    const auto back = geometry_from_kicad(fp, g.package_class);
    for (std::size_t k = 0; k < g.pins.size(); ++k) {
      CHECK(std::abs(back.pins[k].cx - g.pins[k].cx) <= 1e-6);
      CHECK(std::abs(back.pins[k].cy - g.pins[k].cy) <= 1e-6);
      CHECK(std::abs(fp.pads[k].y + g.pins[k].cy) <= 1e-6);
      CHECK(std::abs(back.pins[k].w - g.pins[k].w) <= 1e-6);
      CHECK(std::abs(back.pins[k].h - g.pins[k].h) <= 1e-6);
      CHECK(back.pins[k].shape == g.pins[k].shape);
      CHECK(back.pins[k].designator == g.pins[k].designator);
    }
  }
}

TEST_CASE("s-expression reader") {
  const auto e = parse_sexpr("(a \"b c\" (d 1.5) x\\y)");
  CHECK(e.head() == "a");
  REQUIRE(e.items.size() == 4);
  CHECK(e.items[1].kind == SExpr::Kind::string);
  CHECK(e.items[1].text == "b c");
  REQUIRE(e.find("d") != nullptr);
  CHECK(e.find("d")->items[1].text == "1.5");
  CHECK(parse_sexpr(quote_sexpr("q\"uo\\te")).text == "q\"uo\\te");

  CHECK_THROWS_AS(parse_sexpr("(a (b)"), ParseError);
  CHECK_THROWS_AS(parse_sexpr("(a))"), ParseError);
  CHECK_THROWS_AS(parse_sexpr(""), ParseError);
  CHECK_THROWS_AS(parse_sexpr(std::string(5000, '(')), ParseError);
  CHECK_THROWS_AS(read_kicad_footprint("(footprint \"x\" (pad \"1\" smd rect (at a b) (size 1 1)))"), ParseError);
}
