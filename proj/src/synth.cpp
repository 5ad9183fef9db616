#include "padkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "padkit/errors.hpp"
#include "padkit/format.hpp"
#include "padkit/parallel.hpp"

namespace padkit {
namespace {

constexpr double kCoordScale = 1e4;  // output grid: 1e-4 mm
constexpr double kParamScale = 100;  // sampled parameters: 0.01 mm

double snap(double v, double scale = kCoordScale) {
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

std::string mm(double v) { return format_trimmed(v, 4); }

// Uniform pick from the 0.01 mm grid points inside [lo, hi].
double draw_grid(Rng& rng, double lo, double hi, const std::string& what) {
  const auto a = static_cast<std::int64_t>(std::ceil(lo * kParamScale - 1e-9));
  const auto b = static_cast<std::int64_t>(std::floor(hi * kParamScale + 1e-9));
  if (a > b) {
    throw GenerationError("no admissible " + what + " in [" + mm(lo) + ", " + mm(hi) + "] mm");
  }
  return static_cast<double>(rng.uniform_int(a, b)) / kParamScale;
}

int draw_count(Rng& rng, int lo, int hi, int step, const std::string& what) {
  const int a = (std::max(lo, step) + step - 1) / step;
  const int b = hi / step;
  if (a > b) {
    throw GenerationError("no admissible " + what + " in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }
  return static_cast<int>(rng.uniform_int(a, b)) * step;
}

Pin make_pin(int ordinal, std::string designator, double cx, double cy, PadShape shape, double w,
             double h) {
  Pin p;
  p.ordinal = ordinal;
  p.designator = std::move(designator);
  p.cx = snap(cx);
  p.cy = snap(cy);
  p.shape = shape;
  p.w = snap(w);
  p.h = snap(h);
  return p;
}

// Offset of slot i in a row of n centered slots.
double slot(int i, int n, double pitch) { return (i - (n - 1) / 2.0) * pitch; }

void require_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0.0)) {
    throw GenerationError(std::string(what) + " must be positive (got " + mm(v) + ")");
  }
}

void require_row_fits(int per_row, const FootprintParams& p) {
  if (per_row > 1 && p.pad_width >= p.pitch - kTolerance) {
    throw GenerationError("pads overlap along the row: pad width " + mm(p.pad_width) +
                          " mm must be less than pitch " + mm(p.pitch) + " mm");
  }
}

void require_span_fits(const FootprintParams& p) {
  if (p.row_span <= p.pad_length + kTolerance) {
    throw GenerationError("opposing rows overlap: row span " + mm(p.row_span) +
                          " mm must exceed pad length " + mm(p.pad_length) + " mm");
  }
}

const char* kRowLetters = "ABCDEFGHJKLMNPRTUVWY";
constexpr int kRowLetterCount = 20;

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(next());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return lo + static_cast<std::int64_t>(x % range);
}

std::string grid_row_label(int row) {
  if (row < 0) throw GenerationError("negative grid row");
  if (row < kRowLetterCount) return std::string(1, kRowLetters[row]);
  const int first = row / kRowLetterCount - 1;
  if (first >= kRowLetterCount) throw GenerationError("grid row " + std::to_string(row) + " has no label");
  return std::string(1, kRowLetters[first]) + kRowLetters[row % kRowLetterCount];
}

ClassRanges default_ranges(const PackageClass& pc) {
  ClassRanges r;
  const std::string& n = pc.name;
  if (n == "SOIC") {
    r = {{4, 32}, {0.5, 1.27}, {0.25, 0.65}, {0.8, 2.2}, {3.0, 12.0}, 0.1, 0.5, PadShape::rectangle};
  } else if (n == "QFP") {
    r = {{32, 256}, {0.4, 0.8}, {0.2, 0.5}, {0.8, 2.0}, {8.0, 60.0}, 0.1, 1.0, PadShape::rectangle};
  } else if (n == "QFN") {
    r = {{8, 88}, {0.4, 0.65}, {0.18, 0.4}, {0.4, 1.0}, {2.5, 20.0}, 0.1, 0.5, PadShape::stadium};
  } else if (n == "BGA") {
    r = {{4, 800}, {0.4, 1.27}, {0.2, 0.65}, {0.2, 0.65}, {1.0, 1.0}, 0.1, 0.0, PadShape::circle};
  } else if (n == "DIP") {
    r = {{4, 64}, {2.54, 2.54}, {1.2, 1.8}, {1.6, 2.6}, {7.62, 15.24}, 0.2, 3.0, PadShape::stadium};
  } else if (n == "SOT") {
    r = {{4, 8}, {0.65, 0.95}, {0.3, 0.6}, {0.8, 1.4}, {2.2, 3.4}, 0.1, 0.3, PadShape::rectangle};
  } else if (n == "SON") {
    r = {{4, 16}, {0.4, 0.8}, {0.2, 0.4}, {0.5, 1.0}, {1.8, 5.0}, 0.1, 0.4, PadShape::rectangle};
  } else if (n == "PLCC") {
    r = {{20, 84}, {1.27, 1.27}, {0.5, 0.65}, {1.5, 2.5}, {8.0, 32.0}, 0.1, 2.0, PadShape::rectangle};
  } else if (n == "CHIP2") {
    r = {{2, 2}, {1.0, 1.0}, {0.3, 3.0}, {0.3, 1.5}, {0.8, 6.0}, 0.1, 0.2, PadShape::rectangle};
  } else if (n == "SIP") {
    r = {{1, 40}, {2.0, 2.54}, {1.0, 1.8}, {1.0, 1.8}, {1.0, 1.0}, 0.2, 0.0, PadShape::circle};
  } else {
    throw GenerationError("no default ranges for package class '" + n + "'");
  }
  return r;
}

void check_ranges(const PackageClass& pc, const ClassRanges& r) {
  const std::string where = pc.name + " ranges: ";
  auto check = [&](const Range& range, const char* what) {
    if (!(std::isfinite(range.lo) && std::isfinite(range.hi) && range.lo > 0.0 &&
          range.hi >= range.lo)) {
      throw GenerationError(where + what + " must satisfy 0 < lo <= hi");
    }
  };
  if (r.pins.lo < 1 || r.pins.hi < r.pins.lo || r.pins.hi > kMaxPins) {
    throw GenerationError(where + "pins must satisfy 1 <= lo <= hi <= " + std::to_string(kMaxPins));
  }
  check(r.pitch, "pitch");
  check(r.pad_width, "pad_width");
  check(r.pad_length, "pad_length");
  check(r.row_span, "row_span");
  if (!(std::isfinite(r.min_gap) && r.min_gap >= 0.0)) {
    throw GenerationError(where + "min_gap must be non-negative");
  }
  if (!(std::isfinite(r.body_clearance) && r.body_clearance >= 0.0)) {
    throw GenerationError(where + "body_clearance must be non-negative");
  }
}

FootprintGeometry make_footprint(const PackageClass& pc, const FootprintParams& params,
                                 std::string source_id) {
  FootprintParams p = params;
  require_positive(p.pad_width, "pad width");
  if (p.shape == PadShape::circle) p.pad_length = p.pad_width;
  require_positive(p.pad_length, "pad length");

  FootprintGeometry g;
  g.package_class = pc;
  g.origin = Origin::layout_center;
  g.source_id = std::move(source_id);
  const double wa = p.pad_width;   // extent along the row
  const double wc = p.pad_length;  // extent across the row
  const double half = p.row_span / 2.0;

  switch (pc.topology) {
    case Topology::dual_row: {
      if (p.pins < 2 || p.pins % 2 != 0) {
        throw GenerationError("dual-row pin count must be even and at least 2 (got " +
                              std::to_string(p.pins) + ")");
      }
      const int n = p.pins / 2;
      if (n > 1) require_positive(p.pitch, "pitch");
      require_positive(p.row_span, "row span");
      require_row_fits(n, p);
      require_span_fits(p);
      for (int i = 0; i < n; ++i) {
        g.pins.push_back(make_pin(i + 1, std::to_string(i + 1), -half, -slot(i, n, p.pitch), p.shape,
                                  wc, wa));
      }
      for (int i = 0; i < n; ++i) {
        g.pins.push_back(make_pin(n + i + 1, std::to_string(n + i + 1), half, slot(i, n, p.pitch),
                                  p.shape, wc, wa));
      }
      break;
    }
    case Topology::quad_perimeter: {
      if (p.pins < 4 || p.pins % 4 != 0) {
        throw GenerationError("quad pin count must be a positive multiple of 4 (got " +
                              std::to_string(p.pins) + ")");
      }
      const int n = p.pins / 4;
      if (n > 1) require_positive(p.pitch, "pitch");
      require_positive(p.row_span, "row span");
      require_row_fits(n, p);
      require_span_fits(p);
      // The outermost pad of one side must clear the inner end of the
      // perpendicular side.
      const double reach = (n - 1) * p.pitch / 2.0 + wa / 2.0;
      if (reach >= half - wc / 2.0 - kTolerance) {
        throw GenerationError("corner pads collide: row reach " + mm(reach) +
                              " mm must be less than half span minus half pad length " +
                              mm(half - wc / 2.0) + " mm");
      }
      int ordinal = 1;
      auto add = [&](double x, double y, double w, double h) {
        g.pins.push_back(make_pin(ordinal, std::to_string(ordinal), x, y, p.shape, w, h));
        ++ordinal;
      };
      for (int i = 0; i < n; ++i) add(-half, -slot(i, n, p.pitch), wc, wa);  // left, downwards
      for (int i = 0; i < n; ++i) add(slot(i, n, p.pitch), -half, wa, wc);   // bottom, rightwards
      for (int i = 0; i < n; ++i) add(half, slot(i, n, p.pitch), wc, wa);    // right, upwards
      for (int i = 0; i < n; ++i) add(-slot(i, n, p.pitch), half, wa, wc);   // top, leftwards
      break;
    }
    case Topology::full_grid: {
      int rows = p.rows;
      int cols = p.cols;
      if (rows <= 0 || cols <= 0) {
        throw GenerationError("grid needs positive rows and cols");
      }
      if (static_cast<long long>(rows) * cols > kMaxPins) {
        throw GenerationError("grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                              " exceeds " + std::to_string(kMaxPins) + " pins");
      }
      if (rows > 1 || cols > 1) require_positive(p.pitch, "pitch");
      require_row_fits(std::max(rows, cols), p);
      const double d_across = p.shape == PadShape::circle ? wa : wc;
      if (rows > 1 && d_across >= p.pitch - kTolerance) {
        throw GenerationError("pads overlap across rows: pad length " + mm(d_across) +
                              " mm must be less than pitch " + mm(p.pitch) + " mm");
      }
      int ordinal = 1;
      for (int r = 0; r < rows; ++r) {
        const std::string label = grid_row_label(r);
        for (int c = 0; c < cols; ++c) {
          g.pins.push_back(make_pin(ordinal++, label + std::to_string(c + 1),
                                    slot(c, cols, p.pitch), -slot(r, rows, p.pitch), p.shape, wa,
                                    d_across));
        }
      }
      break;
    }
    case Topology::single_row: {
      if (p.pins < 1) throw GenerationError("single-row pin count must be at least 1");
      if (p.pins > 1) require_positive(p.pitch, "pitch");
      require_row_fits(p.pins, p);
      for (int i = 0; i < p.pins; ++i) {
        g.pins.push_back(make_pin(i + 1, std::to_string(i + 1), slot(i, p.pins, p.pitch), 0.0,
                                  p.shape, wa, wc));
      }
      break;
    }
    case Topology::two_pad: {
      if (p.pins != 2) {
        throw GenerationError("two-terminal package needs exactly 2 pins (got " +
                              std::to_string(p.pins) + ")");
      }
      require_positive(p.row_span, "row span");
      require_span_fits(p);
      g.pins.push_back(make_pin(1, "1", -half, 0.0, p.shape, wc, wa));
      g.pins.push_back(make_pin(2, "2", half, 0.0, p.shape, wc, wa));
      break;
    }
  }

  if (g.pins.size() > static_cast<std::size_t>(kMaxPins)) {
    throw GenerationError("pin count " + std::to_string(g.pins.size()) + " exceeds " +
                          std::to_string(kMaxPins));
  }
  const auto violations = validate(g);
  for (const auto& v : violations) {
    if (!v.warning) {
      throw GenerationError("generated geometry is invalid: " + std::string(to_string(v.kind)) +
                            ": " + v.detail);
    }
  }
  return g;
}

FootprintParams draw_params(const PackageClass& pc, const ClassRanges& r, Rng& rng) {
  FootprintParams p;
  p.shape = r.shape;
  p.pitch = draw_grid(rng, r.pitch.lo, r.pitch.hi, "pitch");

  int per_row = 1;
  switch (pc.topology) {
    case Topology::dual_row:
      p.pins = draw_count(rng, r.pins.lo, r.pins.hi, 2, "dual-row pin count");
      per_row = p.pins / 2;
      break;
    case Topology::quad_perimeter:
      p.pins = draw_count(rng, r.pins.lo, r.pins.hi, 4, "quad pin count");
      per_row = p.pins / 4;
      break;
    case Topology::full_grid: {
      const int max_rows = std::min(28, std::max(1, r.pins.hi));
      const int min_rows = r.pins.hi >= 4 ? 2 : 1;
      p.rows = static_cast<int>(rng.uniform_int(min_rows, std::max(min_rows, max_rows)));
      const int cmin = std::max(1, (r.pins.lo + p.rows - 1) / p.rows);
      const int cmax = std::min(40, r.pins.hi / p.rows);
      if (cmin > cmax) {
        // Retry with the smallest row count that can reach the minimum.
        p.rows = std::max(1, (r.pins.lo + 39) / 40);
        const int c2 = std::min(40, r.pins.hi / p.rows);
        const int c1 = std::max(1, (r.pins.lo + p.rows - 1) / p.rows);
        if (c1 > c2) throw GenerationError("no grid shape reaches the BGA pin range");
        p.cols = static_cast<int>(rng.uniform_int(c1, c2));
      } else {
        p.cols = static_cast<int>(rng.uniform_int(cmin, cmax));
      }
      p.pins = p.rows * p.cols;
      per_row = std::max(p.rows, p.cols);
      break;
    }
    case Topology::single_row:
      p.pins = draw_count(rng, r.pins.lo, r.pins.hi, 1, "pin count");
      per_row = p.pins;
      break;
    case Topology::two_pad:
      if (r.pins.lo > 2 || r.pins.hi < 2) {
        throw GenerationError("two-terminal pin range must include 2");
      }
      p.pins = 2;
      break;
  }

  const bool pitch_bound = per_row > 1 || pc.topology == Topology::full_grid;
  const double w_hi = pitch_bound ? std::min(r.pad_width.hi, p.pitch - r.min_gap) : r.pad_width.hi;
  p.pad_width = draw_grid(rng, r.pad_width.lo, w_hi, "pad width");
  if (p.shape == PadShape::circle) {
    p.pad_length = p.pad_width;
  } else {
    p.pad_length = draw_grid(rng, r.pad_length.lo, r.pad_length.hi, "pad length");
  }

  if (pc.topology == Topology::dual_row || pc.topology == Topology::quad_perimeter ||
      pc.topology == Topology::two_pad) {
    double span_lo = std::max(r.row_span.lo, p.pad_length + r.body_clearance);
    if (pc.topology == Topology::quad_perimeter) {
      span_lo = std::max(span_lo, (per_row - 1) * p.pitch + p.pad_width + p.pad_length + 2 * r.min_gap);
    }
    p.row_span = draw_grid(rng, span_lo, r.row_span.hi, "row span");
  }
  return p;
}

FootprintGeometry sample_footprint(const PackageClass& pc, std::uint64_t seed,
                                   const ClassRanges& ranges, std::string source_id) {
  check_ranges(pc, ranges);
  Rng rng(seed);
  const FootprintParams params = draw_params(pc, ranges, rng);
  return make_footprint(pc, params, std::move(source_id));
}

CorpusSpec default_corpus_spec(std::size_t count, std::uint64_t seed) {
  CorpusSpec spec;
  spec.count = count;
  spec.seed = seed;
  for (const auto& pc : package_registry()) {
    spec.class_weights[pc.name] = 1.0;
    spec.ranges[pc.name] = default_ranges(pc);
  }
  return spec;
}

void check_corpus_spec(const CorpusSpec& spec) {
  double total = 0.0;
  for (const auto& [name, w] : spec.class_weights) {
    if (!find_package_class(name)) throw GenerationError("unknown package class '" + name + "'");
    if (!(std::isfinite(w) && w >= 0.0)) {
      throw GenerationError("weight for '" + name + "' must be a non-negative number");
    }
    total += w;
  }
  if (spec.count > 0 && !(total > 0.0)) throw GenerationError("class weights must sum to more than 0");
  for (const auto& [name, r] : spec.ranges) {
    const auto pc = find_package_class(name);
    if (!pc) throw GenerationError("unknown package class '" + name + "'");
    check_ranges(*pc, r);
  }
}

namespace {

using nlohmann::json;

Range read_range(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw GenerationError(where + " must be a [lo, hi] pair of numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

double read_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw GenerationError(where + " must be a number");
  return v.get<double>();
}

void apply_overrides(ClassRanges& r, const json& obj, const std::string& cls) {
  if (!obj.is_object()) throw GenerationError("ranges for '" + cls + "' must be an object");
  for (const auto& [key, v] : obj.items()) {
    const std::string where = "ranges." + cls + "." + key;
    if (key == "pins") {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw GenerationError(where + " must be a [lo, hi] pair of integers");
      }
      r.pins = {v[0].get<int>(), v[1].get<int>()};
    } else if (key == "pitch") {
      r.pitch = read_range(v, where);
    } else if (key == "pad_width") {
      r.pad_width = read_range(v, where);
    } else if (key == "pad_length") {
      r.pad_length = read_range(v, where);
    } else if (key == "row_span") {
      r.row_span = read_range(v, where);
    } else if (key == "min_gap") {
      r.min_gap = read_number(v, where);
    } else if (key == "body_clearance") {
      r.body_clearance = read_number(v, where);
    } else if (key == "shape") {
      if (!v.is_string()) throw GenerationError(where + " must be a string");
      const auto s = pad_shape_from_string(v.get<std::string>());
      if (!s) throw GenerationError(where + ": unknown shape '" + v.get<std::string>() + "'");
      r.shape = *s;
    } else {
      throw GenerationError("unknown field '" + where + "'");
    }
  }
}

}  // namespace

CorpusSpec parse_corpus_spec(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed corpus spec JSON", e.byte > 0 ? e.byte - 1 : 0);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("unreadable corpus spec: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("corpus spec must be a JSON object");

  CorpusSpec spec = default_corpus_spec(0, 0);
  for (const auto& [key, v] : root.items()) {
    if (key == "count") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw SchemaError("count must be a non-negative integer");
      }
      spec.count = v.get<std::size_t>();
    } else if (key == "seed") {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw SchemaError("seed must be a non-negative integer");
      }
      spec.seed = v.get<std::uint64_t>();
    } else if (key == "class_weights") {
      if (!v.is_object()) throw SchemaError("class_weights must be an object");
      spec.class_weights.clear();
      for (const auto& [cls, w] : v.items()) {
        if (!find_package_class(cls)) throw GenerationError("unknown package class '" + cls + "'");
        spec.class_weights[cls] = read_number(w, "class_weights." + cls);
      }
    } else if (key == "ranges") {
      if (!v.is_object()) throw SchemaError("ranges must be an object");
      for (const auto& [cls, obj] : v.items()) {
        if (!find_package_class(cls)) throw GenerationError("unknown package class '" + cls + "'");
        apply_overrides(spec.ranges[cls], obj, cls);
      }
    } else {
      throw SchemaError("unknown corpus spec field '" + key + "'");
    }
  }
  check_corpus_spec(spec);
  return spec;
}

std::string sample_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-%06zu", index);
  return buf;
}

std::vector<FootprintGeometry> sample_corpus(const CorpusSpec& spec, unsigned threads) {
  check_corpus_spec(spec);
  std::vector<FootprintGeometry> out(spec.count);
  if (spec.count == 0) return out;

  // Cumulative weights in registry order, independent of map ordering.
  std::vector<const PackageClass*> classes;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& pc : package_registry()) {
    auto it = spec.class_weights.find(pc.name);
    if (it == spec.class_weights.end() || it->second <= 0.0) continue;
    total += it->second;
    classes.push_back(&pc);
    cumulative.push_back(total);
  }
  std::vector<ClassRanges> ranges;
  for (const auto* pc : classes) {
    auto it = spec.ranges.find(pc->name);
    ranges.push_back(it != spec.ranges.end() ? it->second : default_ranges(*pc));
  }

  auto make = [&](std::size_t i) {
    Rng rng(derive_seed(spec.seed, i));
    const double u = rng.uniform01() * total;
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    k = std::min(k, classes.size() - 1);
    try {
      const FootprintParams params = draw_params(*classes[k], ranges[k], rng);
      out[i] = make_footprint(*classes[k], params, sample_id(i));
    } catch (const GenerationError& e) {
      throw GenerationError("sample " + std::to_string(i) + " (" + classes[k]->name + "): " + e.what());
    }
  };

  parallel_for(spec.count, threads, make);
  return out;
}

}  // namespace padkit
