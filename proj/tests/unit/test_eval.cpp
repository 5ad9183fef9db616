#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "padkit/area.hpp"
#include "padkit/errors.hpp"
#include "padkit/eval.hpp"
#include "padkit/synth.hpp"

using namespace padkit;
using nlohmann::json;

namespace {

// n square pads of side `side` on a row with the given pitch, centred on 0.
FootprintGeometry row_of_squares(int n, double pitch, double side) {
  FootprintGeometry g;
  g.package_class = package_class("SIP");
  g.origin = Origin::layout_center;
  g.source_id = "row";
  for (int i = 0; i < n; ++i) {
    const double x = (i - (n - 1) / 2.0) * pitch;
    g.pins.push_back({std::to_string(i + 1), i + 1, x, 0.0, PadShape::rectangle, side, side});
  }
  return g;
}

FootprintGeometry shifted(FootprintGeometry g, double dx, double dy) {
  for (auto& p : g.pins) {
    p.cx += dx;
    p.cy += dy;
  }
  return g;
}

FootprintGeometry synth(const std::string& cls, std::uint64_t seed) {
  return recenter(sample_footprint(package_class(cls), seed, default_ranges(package_class(cls)),
                                   "s" + std::to_string(seed)));
}

SampleReport report(const std::string& cls, int run, double iou_ic, int pred, int truth,
                    std::optional<double> d_pin, double iou_pin) {
  SampleReport r;
  r.sample_id = cls + std::to_string(run) + std::to_string(pred);
  r.package_class = cls;
  r.run = run;
  r.iou_ic = iou_ic;
  r.count_pred = pred;
  r.count_truth = truth;
  r.d_pin = d_pin;
  r.iou_pin = iou_pin;
  return r;
}

}  // namespace

TEST_CASE("count errors") {
  const std::vector<std::pair<int, int>> a = {{8, 8}, {16, 14}};
  const CountErrors e = count_errors(a);
  CHECK(e.mae == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.rmse == doctest::Approx(1.414214).epsilon(1e-6));
  const std::vector<std::pair<int, int>> exact = {{3, 3}, {100, 100}};
  CHECK(count_errors(exact).mae == 0.0);
  CHECK(count_errors(exact).rmse == 0.0);
  const std::vector<std::pair<int, int>> failed = {{0, 8}};
  CHECK(count_errors(failed).mae == 8.0);
  CHECK(count_errors(failed).rmse == 8.0);
  CHECK_THROWS_AS(count_errors(std::vector<std::pair<int, int>>{}), EvaluationError);
}

TEST_CASE("pin distance") {
  const FootprintGeometry truth = row_of_squares(8, 2.0, 1.0);
  CHECK(pin_distance(truth, truth).value == 0.0);
  const PinDistance shift = pin_distance(shifted(truth, 0.3, 0.4), truth);
  REQUIRE(shift.value);
  CHECK(*shift.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shift.matched == 8);
  CHECK_FALSE(shift.count_mismatch);

  FootprintGeometry six = truth;
  six.pins.resize(6);
  const PinDistance partial = pin_distance(six, truth);
  CHECK(partial.value == 0.0);
  CHECK(partial.matched == 6);
  CHECK(partial.count_mismatch);

  FootprintGeometry empty = truth;
  empty.pins.clear();
  CHECK_FALSE(pin_distance(empty, truth).value);
}

TEST_CASE("pin dimension IoU") {
  const FootprintGeometry truth = row_of_squares(8, 3.0, 1.0);
  CHECK(pin_dim_iou(truth, truth) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pin_dim_iou(shifted(truth, 1.0, 0.0), truth) == 0.0);
  FootprintGeometry four = truth;
  four.pins.resize(4);
  CHECK(pin_dim_iou(four, truth) == doctest::Approx(0.5).epsilon(1e-12));
  FootprintGeometry empty = truth;
  empty.pins.clear();
  CHECK(pin_dim_iou(empty, truth) == 0.0);
}

TEST_CASE("score_sample closed forms") {
  const FootprintGeometry truth = row_of_squares(6, 5.0, 1.2);

  const SampleReport perfect = score_sample(truth, truth);
  CHECK(perfect.iou_ic == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.d_pin == 0.0);
  CHECK(perfect.iou_pin == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.pred_valid);

  FootprintGeometry empty = truth;
  empty.pins.clear();
  const SampleReport none = score_sample(empty, truth);
  CHECK(none.iou_ic == 0.0);
  CHECK(none.iou_pin == 0.0);
  CHECK_FALSE(none.d_pin);
  CHECK(none.count_truth - none.count_pred == 6);
  CHECK_FALSE(none.pred_valid);

  // Shifting every pad by half its width leaves half of each pad overlapping:
  // intersection s^2/2, union 3s^2/2, so IoU = 1/3 per pad and overall.
  const FootprintGeometry half = shifted(truth, 0.6, 0.0);
  const SampleReport r = score_sample(half, truth);
  CHECK(r.iou_ic == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.iou_pin == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  REQUIRE(r.d_pin);
  CHECK(*r.d_pin == doctest::Approx(0.6).epsilon(1e-12));
  const auto [inter, uni] = testing::grid_iou_parts(half.pins, truth.pins, 0.01);
  CHECK(inter / uni == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("scoring a footprint against itself is perfect for every class") {
  for (const auto& pc : package_registry()) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const FootprintGeometry g = synth(pc.name, seed);
      const SampleReport r = score_sample(g, g);
      INFO(pc.name << " seed " << seed);
      CHECK(r.iou_ic == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.iou_pin == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.d_pin == 0.0);
      CHECK(r.count_pred == r.count_truth);
      CHECK_FALSE(r.count_mismatch);
    }
  }
}

TEST_CASE("scale consistency") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const bool round = trial % 3 == 0;
    const FootprintGeometry truth = testing::random_geometry(rng, round, 24);
    FootprintGeometry pred = truth;
    for (auto& p : pred.pins) {
      p.cx += testing::quantize(testing::uniform(rng, -0.2, 0.2) * p.w);
      p.cy += testing::quantize(testing::uniform(rng, -0.2, 0.2) * p.h);
    }
    const SampleReport base = score_sample(pred, truth);
    for (double s : {0.5, 2.5}) {
      const SampleReport r = score_sample(scale(pred, s), scale(truth, s));
      const double tol = all_rectangles(truth.pins) ? 1e-9 : 2e-3;
      INFO("trial " << trial << " scale " << s);
      CHECK(r.iou_ic == doctest::Approx(base.iou_ic).epsilon(tol));
      CHECK(r.iou_pin == doctest::Approx(base.iou_pin).epsilon(tol));
      CHECK(*r.d_pin == doctest::Approx(*base.d_pin * s).epsilon(1e-9));
    }
  }
}

TEST_CASE("a spurious disjoint pad strictly lowers IoU_IC") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const FootprintGeometry truth = testing::random_geometry(rng, trial % 2 == 0, 30);
    FootprintGeometry pred = truth;
    for (auto& p : pred.pins) p.cx += testing::quantize(testing::uniform(rng, 0.0, 0.3) * p.w);
    const double before = score_sample(pred, truth).iou_ic;
    const Rect box = bounding_box(truth);
    Pin extra = truth.pins.front();
    extra.ordinal = static_cast<int>(pred.pins.size()) + 1;
    extra.designator = std::to_string(extra.ordinal);
    extra.cx = box.x1 + 5.0;
    pred.pins.push_back(extra);
    const SampleReport after = score_sample(pred, truth);
    CHECK(after.iou_ic < before);
    CHECK(after.count_mismatch);
  }
}

TEST_CASE("nearest matching is order-insensitive, index matching is not") {
  const FootprintGeometry truth = row_of_squares(5, 2.0, 1.0);
  FootprintGeometry pred = truth;
  std::reverse(pred.pins.begin(), pred.pins.end());
  for (int i = 0; i < 5; ++i) pred.pins[static_cast<std::size_t>(i)].ordinal = i + 1;
  CHECK(*pin_distance(pred, truth).value > 1.0);
  CHECK(*pin_distance(pred, truth, Matching::nearest).value == 0.0);
  CHECK(pin_dim_iou(pred, truth, Matching::nearest) == doctest::Approx(1.0));
  CHECK(matching_from_string("nearest") == Matching::nearest);
  CHECK_FALSE(matching_from_string("hungarian"));
}

TEST_CASE("prediction geometry from parsed answers") {
  FootprintGeometry truth = row_of_squares(3, 2.0, 1.0);
  truth.pins[0].shape = PadShape::circle;
  ParsedAnswer centers{2, ParseOutcome::strict, 0, {{-2, 0}, {0, 0}, {2, 0}, {4, 0}}};
  ParsedAnswer dims{3, ParseOutcome::lenient, 0, {{1, 1}, {1, 0.5}}};
  const FootprintGeometry g = prediction_geometry(centers, dims, truth);
  REQUIRE(g.pins.size() == 4);
  CHECK(g.pins[0].shape == PadShape::circle);
  CHECK(g.pins[1].shape == PadShape::rectangle);
  CHECK(g.pins[1].h == 0.5);
  CHECK(g.pins[2].w == 0.0);
  CHECK(g.pins[3].shape == PadShape::circle);

  dims.pairs = {{1, 0.5}};
  CHECK(prediction_geometry(centers, dims, truth).pins[0].shape == PadShape::stadium);

  const ParsedAnswer failed{2, ParseOutcome::failed, 0, {}};
  CHECK(prediction_geometry(failed, dims, truth).pins.empty());
  const SampleReport r = score_answers("x", ParsedAnswer{1, ParseOutcome::failed, 7, {}}, failed,
                                       failed, truth);
  CHECK(r.count_pred == 0);
  CHECK(r.iou_ic == 0.0);
  CHECK(r.parse[0] == ParseOutcome::failed);
}

TEST_CASE("aggregate formatting and spread source") {
  std::vector<SampleReport> one_run;
  for (int i = 0; i < 10; ++i) one_run.push_back(report("SOIC", 0, 0.716, 8, 8, 0.1, 0.5));
  const BenchmarkReport a = aggregate(one_run);
  CHECK(a.std_source == StdSource::samples);
  CHECK(format_percent(a.overall.iou_ic) == "71.6 ± 0.0");
  CHECK(a.overall.iou_ic.n == 10);
  CHECK_FALSE(a.overall.rmse.std);
  CHECK(format_distance(a.overall.rmse) == "0.00");

  std::vector<SampleReport> runs;
  const double means[] = {0.711, 0.716, 0.721};
  for (int run = 0; run < 3; ++run) {
    for (int i = 0; i < 4; ++i) runs.push_back(report("QFP", run, means[run], 8, 8, 0.2, 1.0));
  }
  const BenchmarkReport b = aggregate(runs);
  CHECK(b.std_source == StdSource::runs);
  CHECK(b.runs == 3);
  CHECK(*b.overall.iou_ic.std == doctest::Approx(0.005).epsilon(1e-9));
  CHECK(format_percent(b.overall.iou_ic) == "71.6 ± 0.5");
  CHECK(b.overall.rmse.std == 0.0);

  std::vector<SampleReport> partial = one_run;
  partial[2].d_pin.reset();
  partial[7].d_pin.reset();
  partial[0].d_pin = 0.5;
  const BenchmarkReport c = aggregate(partial);
  CHECK(c.overall.d_pin.n == 8);
  CHECK(c.d_pin_undefined == 2);
  CHECK(c.overall.d_pin.mean == doctest::Approx((0.5 + 7 * 0.1) / 8));
  CHECK(c.overall.iou_ic.n == 10);

  CHECK_THROWS_AS(aggregate(std::vector<SampleReport>{}), EvaluationError);
  std::vector<SampleReport> bad = {report("SOIC", 0, 1.5, 1, 1, 0.0, 1.0)};
  CHECK_THROWS_AS(aggregate(bad), EvaluationError);
}

TEST_CASE("aggregation is permutation invariant") {
  std::mt19937_64 rng(3);
  std::vector<SampleReport> reports;
  const char* classes[] = {"SOIC", "BGA", "QFN"};
  for (int i = 0; i < 300; ++i) {
    std::optional<double> d;
    if (i % 7) d = testing::uniform(rng, 0.0, 2.0);
    reports.push_back(report(classes[i % 3], i % 2, testing::uniform(rng, 0.0, 1.0),
                             testing::uniform_int(rng, 0, 50), testing::uniform_int(rng, 1, 50), d,
                             testing::uniform(rng, 0.0, 1.0)));
  }
  const std::string expected = report_json(aggregate(reports));
  for (int k = 0; k < 10; ++k) {
    std::shuffle(reports.begin(), reports.end(), rng);
    CHECK(report_json(aggregate(reports)) == expected);
  }
}

TEST_CASE("report writers") {
  std::vector<SampleReport> reports = {report("SOIC", 0, 1.0, 8, 8, 0.0, 1.0),
                                       report("BGA", 0, 0.5, 10, 16, std::nullopt, 0.25)};
  const BenchmarkReport r = aggregate(reports, 42);
  const json j = json::parse(report_json(r));
  CHECK(j["metadata"]["seed"] == 42);
  CHECK(j["metadata"]["std_source"] == "samples");
  CHECK(j["overall"]["rmse"]["std"].is_null());
  CHECK(j["overall"]["d_pin"]["n"] == 1);
  CHECK(j["per_class"].contains("BGA"));
  CHECK(j["table"]["iou_ic_percent"] == "75.0 ± 35.4");

  const std::string csv = report_csv(r);
  CHECK(csv.rfind("scope,metric,mean,std,n\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 5);
  CHECK(csv.find("overall,iou_ic,0.75,") != std::string::npos);
  CHECK(csv.find("BGA,d_pin,,,0\n") != std::string::npos);

  const std::string table = report_table(r);
  CHECK(table.find("IoU_IC (%)") != std::string::npos);
  CHECK(table.find("Overall") != std::string::npos);
  CHECK(table.find("75.0 ± 35.4") != std::string::npos);
  CHECK(table.find("n/a") != std::string::npos);

  const std::string lines = sample_reports_jsonl(reports);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);
  CHECK(json::parse(lines.substr(0, lines.find('\n')))["iou_ic"] == 1.0);
}

TEST_CASE("prediction JSONL") {
  const auto recs = parse_prediction_jsonl(
      "{\"sample_id\":\"a\",\"task\":1,\"output_text\":\"8\"}\n\n"
      "{\"sample_id\":\"a\",\"task\":2,\"output_text\":\"[]\",\"run\":2,\"model\":\"m\"}\n");
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].run == 2);
  CHECK(parse_prediction_jsonl(to_jsonl(recs[1]))[0].output_text == "[]");
  try {
    parse_prediction_jsonl("{\"sample_id\":\"a\",\"task\":1,\"output_text\":\"8\"}\n{bad");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_prediction_jsonl("{\"sample_id\":\"a\",\"task\":4,\"output_text\":\"\"}"),
                  SchemaError);
  CHECK_THROWS_AS(parse_prediction_jsonl("[1]"), SchemaError);
  CHECK_THROWS_AS(parse_prediction_jsonl("{\"sample_id\":1,\"task\":1,\"output_text\":\"\"}"),
                  SchemaError);
}

TEST_CASE("evaluate: canonical answers, missing and unknown predictions") {
  const std::vector<FootprintGeometry> truths = sample_corpus(default_corpus_spec(50, 9));
  std::vector<PredictionRecord> preds;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (i == 4 || i == 17 || i == 33) continue;
    // Alternate plain geometry ids and conversation sample ids.
    const std::string id = truths[i].source_id + (i % 2 ? ":0" : "");
    for (auto& r : canonical_predictions(truths[i], id)) preds.push_back(std::move(r));
  }
  preds.push_back({"nobody", 1, "3", 0});
  preds.push_back({truths[0].source_id, 1, "99", 0});

  for (unsigned threads : {1u, 4u}) {
    const Evaluation ev = evaluate(truths, preds, {Matching::index, threads, 9});
    CHECK(ev.samples.size() == 50);
    CHECK(ev.report.overall.samples == 50);
    CHECK(ev.report.missing == 3);
    CHECK(ev.unknown_predictions == 1);
    CHECK(ev.unknown_ids == std::vector<std::string>{"nobody"});
    CHECK(ev.duplicate_predictions == 1);
    CHECK(ev.samples[4].missing);
    CHECK(ev.samples[4].iou_ic == 0.0);
    CHECK(ev.samples[4].count_pred == 0);
    CHECK(ev.samples[4].parse[0] == ParseOutcome::failed);
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (ev.samples[i].missing) continue;
      CHECK(ev.samples[i].iou_ic == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(ev.samples[i].d_pin == 0.0);
      CHECK(ev.samples[i].count_pred == ev.samples[i].count_truth);
    }
    CHECK(ev.report.overall.d_pin.n == 47);
    CHECK(ev.report.seed == 9);
  }

  std::vector<PredictionRecord> full;
  for (const auto& g : truths) {
    for (auto& r : canonical_predictions(g)) full.push_back(std::move(r));
  }
  const Evaluation ev = evaluate(truths, full);
  CHECK(format_percent(ev.report.overall.iou_ic).rfind("100.0", 0) == 0);
  CHECK(format_percent(ev.report.overall.iou_pin).rfind("100.0", 0) == 0);
  CHECK(format_distance(ev.report.overall.d_pin).rfind("0.00", 0) == 0);
  CHECK(ev.report.overall.mae.mean == 0.0);
  CHECK(ev.report.parse[1][0] == 50);

  const Evaluation nothing = evaluate(truths, {});
  CHECK(nothing.report.missing == 50);
  CHECK(nothing.report.overall.iou_ic.mean == 0.0);
  CHECK(nothing.report.d_pin_undefined == 50);
}

TEST_CASE("evaluate groups runs") {
  const std::vector<FootprintGeometry> truths = sample_corpus(default_corpus_spec(6, 2));
  std::vector<PredictionRecord> preds;
  for (int run = 0; run < 2; ++run) {
    for (const auto& g : truths) {
      for (auto& r : canonical_predictions(g, {}, run)) preds.push_back(std::move(r));
    }
  }
  preds.front().output_text = "{\"count\": 0}";
  const Evaluation ev = evaluate(truths, preds);
  CHECK(ev.samples.size() == 12);
  CHECK(ev.report.std_source == StdSource::runs);
  CHECK(ev.report.runs == 2);
  CHECK(*ev.report.overall.mae.std > 0.0);
}
