#include "padkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "padkit/area.hpp"
#include "padkit/errors.hpp"
#include "padkit/format.hpp"
#include "padkit/parallel.hpp"

namespace padkit {
namespace {

using ojson = nlohmann::ordered_json;

std::vector<const Pin*> by_ordinal(const FootprintGeometry& g) {
  std::vector<const Pin*> pins;
  pins.reserve(g.pins.size());
  for (const auto& p : g.pins) pins.push_back(&p);
  std::stable_sort(pins.begin(), pins.end(),
                   [](const Pin* a, const Pin* b) { return a->ordinal < b->ordinal; });
  return pins;
}

// Sorting first makes the sums independent of input order.
double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double mean_of(const std::vector<double>& values) {
  return values.empty() ? 0.0 : sorted_sum(values) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - m) * (v - m));
  return std::sqrt(sorted_sum(std::move(sq)) / static_cast<double>(values.size() - 1));
}

FootprintGeometry centred(const FootprintGeometry& g) {
  return g.origin == Origin::layout_center ? g : recenter(g);
}

struct Pooled {
  std::vector<double> iou_ic, abs_err, sq_err, d_pin, iou_pin;
};

Pooled pool(std::span<const SampleReport* const> reports) {
  Pooled p;
  for (const SampleReport* r : reports) {
    const double delta = static_cast<double>(r->count_pred) - r->count_truth;
    p.iou_ic.push_back(r->iou_ic);
    p.abs_err.push_back(std::abs(delta));
    p.sq_err.push_back(delta * delta);
    if (r->d_pin) p.d_pin.push_back(*r->d_pin);
    p.iou_pin.push_back(r->iou_pin);
  }
  return p;
}

MetricSet summarize(std::span<const SampleReport* const> reports, StdSource source) {
  MetricSet m;
  m.samples = reports.size();
  const Pooled all = pool(reports);
  const std::size_t n = reports.size();
  m.iou_ic = {mean_of(all.iou_ic), std::nullopt, n};
  m.mae = {mean_of(all.abs_err), std::nullopt, n};
  m.rmse = {std::sqrt(mean_of(all.sq_err)), std::nullopt, n};
  m.d_pin = {mean_of(all.d_pin), std::nullopt, all.d_pin.size()};
  m.iou_pin = {mean_of(all.iou_pin), std::nullopt, n};

  if (source == StdSource::samples) {
    m.iou_ic.std = sample_std(all.iou_ic);
    m.mae.std = sample_std(all.abs_err);
    m.d_pin.std = sample_std(all.d_pin);
    m.iou_pin.std = sample_std(all.iou_pin);
    if (m.d_pin.n == 0) m.d_pin.std.reset();
    return m;
  }

  std::map<int, std::vector<const SampleReport*>> runs;
  for (const SampleReport* r : reports) runs[r->run].push_back(r);
  std::vector<double> iou_ic, mae, rmse, d_pin, iou_pin;
  for (const auto& [run, members] : runs) {
    const Pooled p = pool(members);
    iou_ic.push_back(mean_of(p.iou_ic));
    mae.push_back(mean_of(p.abs_err));
    rmse.push_back(std::sqrt(mean_of(p.sq_err)));
    if (!p.d_pin.empty()) d_pin.push_back(mean_of(p.d_pin));
    iou_pin.push_back(mean_of(p.iou_pin));
  }
  m.iou_ic.std = sample_std(iou_ic);
  m.mae.std = sample_std(mae);
  m.rmse.std = sample_std(rmse);
  m.d_pin.std = sample_std(d_pin);
  m.iou_pin.std = sample_std(iou_pin);
  if (m.d_pin.n == 0) m.d_pin.std.reset();
  return m;
}

std::string format_metric(const MetricSummary& m, double factor, int decimals) {
  if (m.n == 0) return "n/a";
  std::string out = format_fixed(m.mean * factor, decimals);
  if (m.std) out += " ± " + format_fixed(*m.std * factor, decimals);
  return out;
}

ojson metric_json(const MetricSummary& m) {
  ojson j;
  j["mean"] = m.mean;
  j["std"] = m.std ? ojson(*m.std) : ojson(nullptr);
  j["n"] = m.n;
  return j;
}

ojson metric_set_json(const MetricSet& s) {
  ojson j;
  j["samples"] = s.samples;
  j["iou_ic"] = metric_json(s.iou_ic);
  j["mae"] = metric_json(s.mae);
  j["rmse"] = metric_json(s.rmse);
  j["d_pin"] = metric_json(s.d_pin);
  j["iou_pin"] = metric_json(s.iou_pin);
  return j;
}

std::string pad_right(std::string s, std::size_t width) {
  // Column widths count code points so the "±" sign does not skew alignment.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  if (cps < width) s.append(width - cps, ' ');
  return s;
}

std::string csv_number(const std::optional<double>& v) { return v ? format_shortest(*v) : ""; }

}  // namespace

CountErrors count_errors(std::span<const std::pair<int, int>> pairs) {
  if (pairs.empty()) throw EvaluationError("count_errors needs at least one (pred, truth) pair");
  std::vector<double> abs_err, sq_err;
  for (const auto& [pred, truth] : pairs) {
    const double d = static_cast<double>(pred) - truth;
    abs_err.push_back(std::abs(d));
    sq_err.push_back(d * d);
  }
  return {mean_of(abs_err), std::sqrt(mean_of(sq_err)), pairs.size()};
}

std::string_view to_string(Matching matching) {
  return matching == Matching::index ? "index" : "nearest";
}

std::optional<Matching> matching_from_string(std::string_view text) {
  if (text == "index") return Matching::index;
  if (text == "nearest") return Matching::nearest;
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> match_pins(const FootprintGeometry& pred,
                                                            const FootprintGeometry& truth,
                                                            Matching matching) {
  const auto p = by_ordinal(pred);
  const auto t = by_ordinal(truth);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (matching == Matching::index) {
    for (std::size_t i = 0; i < std::min(p.size(), t.size()); ++i) pairs.emplace_back(i, i);
    return pairs;
  }
  std::vector<bool> used(p.size(), false);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::size_t best = p.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (used[j]) continue;
      const double d = std::hypot(p[j]->cx - t[i]->cx, p[j]->cy - t[i]->cy);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == p.size()) break;
    used[best] = true;
    pairs.emplace_back(i, best);
  }
  return pairs;
}

PinDistance pin_distance(const FootprintGeometry& pred, const FootprintGeometry& truth,
                         Matching matching) {
  const auto p = by_ordinal(pred);
  const auto t = by_ordinal(truth);
  PinDistance out;
  out.count_mismatch = p.size() != t.size();
  std::vector<double> d;
  for (const auto& [ti, pi] : match_pins(pred, truth, matching)) {
    d.push_back(std::hypot(p[pi]->cx - t[ti]->cx, p[pi]->cy - t[ti]->cy));
  }
  out.matched = d.size();
  if (!d.empty()) out.value = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  return out;
}

double pin_dim_iou(const FootprintGeometry& pred, const FootprintGeometry& truth, Matching matching) {
  if (truth.pins.empty()) return 0.0;
  const auto p = by_ordinal(pred);
  const auto t = by_ordinal(truth);
  double total = 0.0;
  for (const auto& [ti, pi] : match_pins(pred, truth, matching)) total += pad_iou(*p[pi], *t[ti]);
  return total / static_cast<double>(t.size());
}

SampleReport score_sample(const FootprintGeometry& pred, const FootprintGeometry& truth,
                          Matching matching) {
  SampleReport r;
  r.sample_id = truth.source_id;
  r.package_class = truth.package_class.name;
  r.iou_ic = std::clamp(layout_iou(pred, truth).value, 0.0, 1.0);
  r.count_pred = static_cast<int>(pred.pins.size());
  r.count_truth = static_cast<int>(truth.pins.size());
  const PinDistance d = pin_distance(pred, truth, matching);
  r.d_pin = d.value;
  r.count_mismatch = d.count_mismatch;
  r.iou_pin = std::clamp(pin_dim_iou(pred, truth, matching), 0.0, 1.0);
  r.pred_valid = !pred.pins.empty() && is_clean(validate(pred));
  return r;
}

FootprintGeometry prediction_geometry(const ParsedAnswer& centers, const ParsedAnswer& dims,
                                      const FootprintGeometry& truth, std::string id) {
  const auto t = by_ordinal(truth);
  FootprintGeometry g;
  g.package_class = truth.package_class;
  g.origin = Origin::layout_center;
  g.source_id = id.empty() ? truth.source_id : std::move(id);
  if (centers.outcome == ParseOutcome::failed) return g;
  const bool have_dims = dims.outcome != ParseOutcome::failed;
  for (std::size_t i = 0; i < centers.pairs.size(); ++i) {
    Pin pin;
    pin.ordinal = static_cast<int>(i + 1);
    pin.designator = std::to_string(i + 1);
    pin.cx = centers.pairs[i][0];
    pin.cy = centers.pairs[i][1];
    if (have_dims && i < dims.pairs.size()) {
      pin.w = dims.pairs[i][0];
      pin.h = dims.pairs[i][1];
    }
    if (!t.empty()) pin.shape = i < t.size() ? t[i]->shape : t.front()->shape;
    if (pin.shape == PadShape::circle && pin.w != pin.h) pin.shape = PadShape::stadium;
    g.pins.push_back(std::move(pin));
  }
  return g;
}

SampleReport score_answers(const std::string& sample_id, const ParsedAnswer& count,
                           const ParsedAnswer& centers, const ParsedAnswer& dims,
                           const FootprintGeometry& truth, Matching matching) {
  const FootprintGeometry t = centred(truth);
  const FootprintGeometry pred = prediction_geometry(centers, dims, t, sample_id);
  SampleReport r = score_sample(pred, t, matching);
  r.sample_id = sample_id;
  r.count_pred = count.outcome == ParseOutcome::failed ? 0 : count.count;
  r.parse = {count.outcome, centers.outcome, dims.outcome};
  return r;
}

std::string_view to_string(StdSource source) {
  return source == StdSource::runs ? "runs" : "samples";
}

BenchmarkReport aggregate(std::span<const SampleReport> reports, std::uint64_t seed) {
  if (reports.empty()) throw EvaluationError("cannot aggregate an empty set of sample reports");
  BenchmarkReport out;
  out.seed = seed;
  out.version = PADKIT_VERSION;
  std::set<int> runs;
  std::vector<const SampleReport*> all;
  std::map<std::string, std::vector<const SampleReport*>> classes;
  for (const auto& r : reports) {
    if (!(r.iou_ic >= 0.0 && r.iou_ic <= 1.0) || !(r.iou_pin >= 0.0 && r.iou_pin <= 1.0)) {
      throw EvaluationError("sample " + r.sample_id + ": IoU outside [0, 1]");
    }
    runs.insert(r.run);
    all.push_back(&r);
    classes[r.package_class].push_back(&r);
    out.missing += r.missing;
    out.d_pin_undefined += !r.d_pin;
    out.count_mismatch += r.count_mismatch;
    out.invalid_predictions += !r.pred_valid;
    for (std::size_t task = 0; task < 3; ++task) {
      if (r.parse[task]) ++out.parse[task][static_cast<std::size_t>(*r.parse[task])];
    }
  }
  out.runs = runs.size();
  out.std_source = runs.size() >= 2 ? StdSource::runs : StdSource::samples;
  out.overall = summarize(all, out.std_source);
  for (const auto& [name, members] : classes) out.per_class[name] = summarize(members, out.std_source);
  return out;
}

std::string format_percent(const MetricSummary& m) { return format_metric(m, 100.0, 1); }
std::string format_distance(const MetricSummary& m) { return format_metric(m, 1.0, 2); }

std::string report_json(const BenchmarkReport& report) {
  ojson meta;
  meta["version"] = report.version;
  meta["seed"] = report.seed;
  meta["runs"] = report.runs;
  meta["std_source"] = to_string(report.std_source);
  meta["std_note"] = report.std_source == StdSource::runs
                         ? "standard deviation of per-run values (n - 1)"
                         : "sample standard deviation over samples (n - 1); undefined for rmse";
  meta["matching"] = to_string(report.matching);
  meta["d_pin_averaging"] = "per-sample mean, then mean over samples with a defined value";
  meta["missing_predictions"] = report.missing;
  meta["d_pin_undefined"] = report.d_pin_undefined;
  meta["count_mismatch"] = report.count_mismatch;
  meta["invalid_predictions"] = report.invalid_predictions;
  ojson parse;
  for (std::size_t task = 0; task < 3; ++task) {
    ojson t;
    for (std::size_t k = 0; k < 3; ++k) {
      t[std::string(to_string(static_cast<ParseOutcome>(k)))] = report.parse[task][k];
    }
    parse["task" + std::to_string(task + 1)] = t;
  }
  meta["parse"] = parse;

  ojson j;
  j["metadata"] = meta;
  j["overall"] = metric_set_json(report.overall);
  ojson classes = ojson::object();
  for (const auto& [name, set] : report.per_class) classes[name] = metric_set_json(set);
  j["per_class"] = classes;
  j["table"] = {{"iou_ic_percent", format_percent(report.overall.iou_ic)},
                {"mae", format_distance(report.overall.mae)},
                {"rmse", format_distance(report.overall.rmse)},
                {"d_pin_mm", format_distance(report.overall.d_pin)},
                {"iou_pin_percent", format_percent(report.overall.iou_pin)}};
  return j.dump(2) + "\n";
}

std::string report_csv(const BenchmarkReport& report) {
  std::string out = "scope,metric,mean,std,n\n";
  auto rows = [&](const std::string& scope, const MetricSet& s) {
    const std::pair<const char*, const MetricSummary*> metrics[] = {
        {"iou_ic", &s.iou_ic}, {"mae", &s.mae}, {"rmse", &s.rmse},
        {"d_pin", &s.d_pin},   {"iou_pin", &s.iou_pin}};
    for (const auto& [name, m] : metrics) {
      out += scope + "," + name + "," + csv_number(m->n ? std::optional(m->mean) : std::nullopt) +
             "," + csv_number(m->std) + "," + std::to_string(m->n) + "\n";
    }
  };
  rows("overall", report.overall);
  for (const auto& [name, set] : report.per_class) rows(name, set);
  return out;
}

std::string report_table(const BenchmarkReport& report) {
  constexpr std::size_t kScope = 10;
  constexpr std::size_t kCell = 16;
  std::string out = pad_right("", kScope);
  for (const char* h : {"IoU_IC (%)", "MAE", "RMSE", "d_pin (mm)", "IoU_pin (%)"}) {
    out += pad_right(h, kCell);
  }
  out += "n\n";
  auto row = [&](const std::string& scope, const MetricSet& s) {
    out += pad_right(scope, kScope) + pad_right(format_percent(s.iou_ic), kCell) +
           pad_right(format_distance(s.mae), kCell) + pad_right(format_distance(s.rmse), kCell) +
           pad_right(format_distance(s.d_pin), kCell) + pad_right(format_percent(s.iou_pin), kCell) +
           std::to_string(s.samples) + "\n";
  };
  row("Overall", report.overall);
  for (const auto& [name, set] : report.per_class) row(name, set);
  out += "\n±: ";
  out += report.std_source == StdSource::runs
             ? "standard deviation over " + std::to_string(report.runs) + " runs"
             : std::string("sample standard deviation over samples (none for RMSE)");
  out += "; d_pin averaged per sample, " + std::to_string(report.d_pin_undefined) +
         " sample(s) without a matched pin excluded\n";
  if (report.missing) out += std::to_string(report.missing) + " sample(s) had no prediction\n";
  return out;
}

std::string sample_reports_jsonl(std::span<const SampleReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    ojson j;
    j["sample_id"] = r.sample_id;
    j["package_class"] = r.package_class;
    j["run"] = r.run;
    j["iou_ic"] = r.iou_ic;
    j["count_pred"] = r.count_pred;
    j["count_truth"] = r.count_truth;
    j["d_pin"] = r.d_pin ? ojson(*r.d_pin) : ojson(nullptr);
    j["iou_pin"] = r.iou_pin;
    j["count_mismatch"] = r.count_mismatch;
    j["pred_valid"] = r.pred_valid;
    j["missing"] = r.missing;
    ojson parse = ojson::array();
    for (const auto& p : r.parse) parse.push_back(p ? ojson(std::string(to_string(*p))) : ojson(nullptr));
    j["parse"] = parse;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<PredictionRecord> parse_prediction_jsonl(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    const std::string where = "predictions line " + std::to_string(line_no);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(where + ": " + e.what(), start + (e.byte > 0 ? e.byte - 1 : 0));
      }
      if (!j.is_object()) throw SchemaError(where + ": expected an object");
      PredictionRecord r;
      auto id = j.find("sample_id");
      auto task = j.find("task");
      auto output = j.find("output_text");
      if (id == j.end() || !id->is_string()) throw SchemaError(where + ": sample_id must be a string");
      if (task == j.end() || !task->is_number_integer() || task->get<long long>() < 1 ||
          task->get<long long>() > 3) {
        throw SchemaError(where + ": task must be 1, 2 or 3");
      }
      if (output == j.end() || !output->is_string()) {
        throw SchemaError(where + ": output_text must be a string");
      }
      r.sample_id = id->get<std::string>();
      r.task = task->get<int>();
      r.output_text = output->get<std::string>();
      if (auto run = j.find("run"); run != j.end()) {
        if (!run->is_number_integer() || run->get<long long>() < 0 || run->get<long long>() > 1000000) {
          throw SchemaError(where + ": run must be a non-negative integer");
        }
        r.run = run->get<int>();
      }
      out.push_back(std::move(r));
    }
    start = end + 1;
  }
  return out;
}

std::string to_jsonl(const PredictionRecord& record) {
  ojson j;
  j["sample_id"] = record.sample_id;
  j["task"] = record.task;
  j["output_text"] = record.output_text;
  if (record.run != 0) j["run"] = record.run;
  return j.dump();
}

std::vector<PredictionRecord> canonical_predictions(const FootprintGeometry& geometry,
                                                    std::string sample_id, int run) {
  const CanonicalAnswers answers = canonical_answers(geometry);
  if (sample_id.empty()) sample_id = geometry.source_id;
  std::vector<PredictionRecord> out;
  for (int task = 1; task <= 3; ++task) out.push_back({sample_id, task, answer_text(answers, task), run});
  return out;
}

Evaluation evaluate(std::span<const FootprintGeometry> truths,
                    std::span<const PredictionRecord> predictions, const EvalOptions& options) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!index.emplace(truths[i].source_id, i).second) {
      throw SchemaError("duplicate truth sample id: " + truths[i].source_id);
    }
  }

  std::set<int> run_set;
  for (const auto& p : predictions) run_set.insert(p.run);
  if (run_set.empty()) run_set.insert(0);
  const std::vector<int> runs(run_set.begin(), run_set.end());
  auto run_slot = [&](int run) {
    return static_cast<std::size_t>(std::lower_bound(runs.begin(), runs.end(), run) - runs.begin());
  };

  Evaluation ev;
  using Slots = std::array<const PredictionRecord*, 3>;
  std::vector<Slots> slots(runs.size() * truths.size(), Slots{});
  for (const auto& p : predictions) {
    if (p.task < 1 || p.task > 3) {
      throw EvaluationError("prediction for " + p.sample_id + " has task " + std::to_string(p.task));
    }
    auto it = index.find(p.sample_id);
    if (it == index.end()) {
      if (auto colon = p.sample_id.rfind(':'); colon != std::string::npos) {
        it = index.find(p.sample_id.substr(0, colon));
      }
    }
    if (it == index.end()) {
      ++ev.unknown_predictions;
      if (ev.unknown_ids.size() < 20 &&
          std::find(ev.unknown_ids.begin(), ev.unknown_ids.end(), p.sample_id) == ev.unknown_ids.end()) {
        ev.unknown_ids.push_back(p.sample_id);
      }
      continue;
    }
    const PredictionRecord*& slot =
        slots[run_slot(p.run) * truths.size() + it->second][static_cast<std::size_t>(p.task - 1)];
    if (slot) {
      ++ev.duplicate_predictions;
    } else {
      slot = &p;
    }
  }

  ev.samples.resize(slots.size());
  parallel_for(slots.size(), options.threads, [&](std::size_t k) {
    const std::size_t run = k / std::max<std::size_t>(1, truths.size());
    const FootprintGeometry& truth = truths[k % truths.size()];
    std::array<ParsedAnswer, 3> answers;
    bool any = false;
    for (int task = 1; task <= 3; ++task) {
      const PredictionRecord* rec = slots[k][static_cast<std::size_t>(task - 1)];
      if (rec) {
        answers[static_cast<std::size_t>(task - 1)] = parse_prediction(rec->output_text, task);
        any = true;
      } else {
        answers[static_cast<std::size_t>(task - 1)].task = task;
      }
    }
    SampleReport r = score_answers(truth.source_id, answers[0], answers[1], answers[2], truth,
                                   options.matching);
    r.run = runs[run];
    r.missing = !any;
    ev.samples[k] = std::move(r);
  });
  if (ev.samples.empty()) throw EvaluationError("no truth samples to evaluate");
  ev.report = aggregate(ev.samples, options.seed);
  ev.report.matching = options.matching;
  return ev;
}

}  // namespace padkit
