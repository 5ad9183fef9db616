#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "padkit/geometry.hpp"
#include "padkit/qa.hpp"

namespace padkit {

struct CountErrors {
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

/// MAE and RMSE over (predicted, true) pin counts. Throws EvaluationError on
/// an empty list.
CountErrors count_errors(std::span<const std::pair<int, int>> pairs);

/// How predicted pins are paired with truth pins. `index` pairs the k-th pins
/// by ordinal and is the reported metric; `nearest` greedily pairs each truth
/// pin with the closest unused prediction and exists for analysis only.
enum class Matching { index, nearest };

std::string_view to_string(Matching matching);
std::optional<Matching> matching_from_string(std::string_view text);

/// (truth index, pred index) pairs; both geometries are taken in ordinal order.
std::vector<std::pair<std::size_t, std::size_t>> match_pins(const FootprintGeometry& pred,
                                                            const FootprintGeometry& truth,
                                                            Matching matching = Matching::index);

struct PinDistance {
  std::optional<double> value;  // empty when no pair was matched
  std::size_t matched = 0;
  bool count_mismatch = false;
};

/// Mean centre distance over matched pairs. Both inputs must already be
/// expressed relative to the layout centre.
PinDistance pin_distance(const FootprintGeometry& pred, const FootprintGeometry& truth,
                         Matching matching = Matching::index);

/// Mean over truth pins of the pad IoU with the matched prediction at their
/// own positions; unmatched truth pins score 0.
double pin_dim_iou(const FootprintGeometry& pred, const FootprintGeometry& truth,
                   Matching matching = Matching::index);

struct SampleReport {
  std::string sample_id;
  std::string package_class;
  int run = 0;
  double iou_ic = 0.0;
  int count_pred = 0;
  int count_truth = 0;
  std::optional<double> d_pin;
  double iou_pin = 0.0;
  bool count_mismatch = false;  // predicted pad list length differs from truth
  bool pred_valid = true;       // predicted layout passes validate()
  bool missing = false;         // no model output was supplied for the sample
  // Parse outcome for tasks 1, 2, 3; empty when scoring a geometry directly.
  std::array<std::optional<ParseOutcome>, 3> parse{};
};

/// All four metrics for one sample. `count_pred` is the predicted pad count.
SampleReport score_sample(const FootprintGeometry& pred, const FootprintGeometry& truth,
                          Matching matching = Matching::index);

/// Layout assembled from parsed answers: one pad per predicted centre, sized by
/// the dims entry at the same index (zero size when absent). Shapes follow the
/// truth pin at the same index, or truth pin 1 beyond the truth count; a
/// circle with unequal sides becomes a stadium. No recentring is applied.
FootprintGeometry prediction_geometry(const ParsedAnswer& centers, const ParsedAnswer& dims,
                                      const FootprintGeometry& truth, std::string id = {});

/// Scores parsed answers for tasks 1, 2, 3 against a truth layout that is
/// recentred first. A failed count parse predicts 0 pins.
SampleReport score_answers(const std::string& sample_id, const ParsedAnswer& count,
                           const ParsedAnswer& centers, const ParsedAnswer& dims,
                           const FootprintGeometry& truth, Matching matching = Matching::index);

struct MetricSummary {
  double mean = 0.0;
  std::optional<double> std;  // absent when undefined (RMSE spread across samples)
  std::size_t n = 0;
};

struct MetricSet {
  MetricSummary iou_ic, mae, rmse, d_pin, iou_pin;
  std::size_t samples = 0;
};

/// Where the +/- spread comes from: standard deviation of per-run values when
/// two or more runs are present, else sample standard deviation (n - 1).
enum class StdSource { runs, samples };

std::string_view to_string(StdSource source);

struct BenchmarkReport {
  MetricSet overall;
  std::map<std::string, MetricSet> per_class;
  StdSource std_source = StdSource::samples;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string version;
  Matching matching = Matching::index;
  std::size_t missing = 0;
  std::size_t d_pin_undefined = 0;
  std::size_t count_mismatch = 0;
  std::size_t invalid_predictions = 0;
  // [task][outcome] counts; outcome order strict, lenient, failed.
  std::array<std::array<std::size_t, 3>, 3> parse{};
};

/// Means over samples (d_pin: per-sample value, then averaged over samples
/// where it is defined). Runs are grouped by SampleReport::run. Throws
/// EvaluationError on an empty list.
BenchmarkReport aggregate(std::span<const SampleReport> reports, std::uint64_t seed = 0);

/// "71.6 ± 0.5" for ratios shown as percent, "0.35 ± 0.02" for the rest.
std::string format_percent(const MetricSummary& m);
std::string format_distance(const MetricSummary& m);

std::string report_json(const BenchmarkReport& report);
std::string report_csv(const BenchmarkReport& report);
std::string report_table(const BenchmarkReport& report);
std::string sample_reports_jsonl(std::span<const SampleReport> reports);

/// One line of model output: {"sample_id", "task", "output_text", "run"?}.
struct PredictionRecord {
  std::string sample_id;
  int task = 1;
  std::string output_text;
  int run = 0;
};

/// Throws ParseError or SchemaError naming the 1-based line.
std::vector<PredictionRecord> parse_prediction_jsonl(std::string_view text);
std::string to_jsonl(const PredictionRecord& record);

/// Canonical answers of `geometry` written as perfect predictions (S1 order).
std::vector<PredictionRecord> canonical_predictions(const FootprintGeometry& geometry,
                                                    std::string sample_id = {}, int run = 0);

struct EvalOptions {
  Matching matching = Matching::index;
  unsigned threads = 1;
  std::uint64_t seed = 0;
};

struct Evaluation {
  std::vector<SampleReport> samples;  // truth order within each run, runs ascending
  BenchmarkReport report;
  std::size_t unknown_predictions = 0;  // records whose id matches no truth
  std::vector<std::string> unknown_ids;
  std::size_t duplicate_predictions = 0;  // later copies of (id, task, run)
};

/// Scores every truth sample once per run found in `predictions`. A record
/// id may be the geometry id or a conversation sample id "<geometry>:<k>".
/// Samples without output are scored as empty and flagged `missing`.
Evaluation evaluate(std::span<const FootprintGeometry> truths,
                    std::span<const PredictionRecord> predictions, const EvalOptions& options = {});

}  // namespace padkit
