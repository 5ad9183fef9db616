#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "padkit/geometry.hpp"

namespace padkit {

/// The (index+1)-th output of a splitmix64 stream started at `seed`. Used to
/// give every corpus sample its own independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Portable random source: std::mt19937_64 (whose output sequence is fixed by
/// the standard) plus explicit integer/real mappings, since the standard
/// distributions differ between library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
};

/// Shape parameters of one footprint. Pad width is measured along the row
/// (the pitch direction), pad length across it; for grids and circle pads the
/// width is the diameter.
struct FootprintParams {
  int pins = 0;
  int rows = 0;  // full-grid only
  int cols = 0;  // full-grid only
  double pitch = 0.0;
  double pad_width = 0.0;
  double pad_length = 0.0;
  double row_span = 0.0;  // center-to-center distance of opposing rows
  PadShape shape = PadShape::rectangle;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

/// Sampling ranges for one package class (mm).
struct ClassRanges {
  IntRange pins;
  Range pitch;
  Range pad_width;
  Range pad_length;
  Range row_span;
  /// Minimum copper gap between neighbouring pads of one row.
  double min_gap = 0.1;
  /// Minimum gap between the inner pad ends of opposing rows.
  double body_clearance = 0.5;
  PadShape shape = PadShape::rectangle;
};

ClassRanges default_ranges(const PackageClass& package_class);

/// Throws GenerationError naming the first bad range.
void check_ranges(const PackageClass& package_class, const ClassRanges& ranges);

/// Deterministic construction. Pin 1 is top-left and ordinals run
/// counter-clockwise for dual-row and quad packages; grids are row-major with
/// row letters skipping I, O, Q, S, X, Z. All values are snapped to 1e-4 mm and
/// the result is centered. Throws GenerationError when pads would overlap or
/// the pin count is not achievable.
FootprintGeometry make_footprint(const PackageClass& package_class, const FootprintParams& params,
                                 std::string source_id = {});

FootprintParams draw_params(const PackageClass& package_class, const ClassRanges& ranges, Rng& rng);

FootprintGeometry sample_footprint(const PackageClass& package_class, std::uint64_t seed,
                                   const ClassRanges& ranges, std::string source_id = {});

/// JEDEC-style grid row label: 0 -> "A", 19 -> "Y", 20 -> "AA".
std::string grid_row_label(int row);

struct CorpusSpec {
  /// Weight per registered class name; classes not listed have weight 0.
  std::map<std::string, double> class_weights;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::map<std::string, ClassRanges> ranges;
};

/// Uniform weights over the registry and default ranges.
CorpusSpec default_corpus_spec(std::size_t count, std::uint64_t seed);

/// Read a corpus spec file; omitted fields keep their defaults. Unknown class
/// names and malformed ranges are errors naming the offending entry.
CorpusSpec parse_corpus_spec(std::string_view json_text);

void check_corpus_spec(const CorpusSpec& spec);

/// "synth-000042"
std::string sample_id(std::size_t index);

/// Exactly `spec.count` footprints. Sample i depends only on (spec, i), so the
/// result does not depend on `threads`. Errors carry the sample index.
std::vector<FootprintGeometry> sample_corpus(const CorpusSpec& spec, unsigned threads = 1);

}  // namespace padkit
