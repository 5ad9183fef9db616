#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "padkit/area.hpp"
#include "padkit/errors.hpp"
#include "padkit/eval.hpp"
#include "padkit/interchange.hpp"
#include "padkit/qa.hpp"
#include "padkit/render.hpp"
#include "padkit/synth.hpp"

namespace py = pybind11;
using namespace padkit;

namespace {

// Geometry crosses the boundary as canonical JSON text.
FootprintGeometry geometry(const std::string& text) { return parse_geometry_json(text); }

py::list pairs_list(const std::vector<Pair>& pairs) {
  py::list out;
  for (const auto& p : pairs) out.append(py::make_tuple(p[0], p[1]));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Footprint corpus generation, rendering, QA export and evaluation.";
  m.attr("__version__") = PADKIT_VERSION;

  static py::exception<Error> error(m, "PadkitError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "sample_corpus",
      [](std::size_t count, std::uint64_t seed, const std::optional<std::string>& spec,
         unsigned threads) {
        CorpusSpec s = spec ? parse_corpus_spec(*spec) : default_corpus_spec(count, seed);
        if (spec) {
          s.count = count;
          s.seed = seed;
        }
        std::vector<std::string> out;
        std::vector<FootprintGeometry> geoms;
        {
          py::gil_scoped_release release;
          geoms = sample_corpus(s, threads);
        }
        for (const auto& g : geoms) out.push_back(write_geometry_json(g, JsonStyle::compact));
        return out;
      },
      py::arg("count"), py::arg("seed") = 0, py::arg("spec") = py::none(), py::arg("threads") = 1,
      "Sample `count` footprints; returns compact geometry JSON strings.");

  m.def(
      "render_svg",
      [](const std::string& g, double px_per_mm, int omission_threshold, bool pin_numbers,
         bool dimensions, double text_jitter_mm, std::uint64_t seed) {
        RenderSpec spec;
        spec.px_per_mm = px_per_mm;
        spec.omission_threshold = omission_threshold;
        spec.show_pin_numbers = pin_numbers;
        spec.show_pitch = dimensions;
        spec.show_pad_dims = dimensions;
        spec.text_jitter_mm = text_jitter_mm;
        spec.seed = seed;
        return render_svg(geometry(g), spec);
      },
      py::arg("geometry"), py::arg("px_per_mm") = 40.0, py::arg("omission_threshold") = 0,
      py::arg("pin_numbers") = true, py::arg("dimensions") = true, py::arg("text_jitter_mm") = 0.0,
      py::arg("seed") = 0);

  m.def(
      "render_overlay",
      [](const std::string& pred, const std::string& truth) {
        return render_overlay(geometry(pred), geometry(truth));
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "layout_iou",
      [](const std::string& pred, const std::string& truth) {
        return layout_iou(geometry(pred), geometry(truth)).value;
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "canonical_answers",
      [](const std::string& g) {
        const CanonicalAnswers a = canonical_answers(geometry(g));
        py::dict d;
        d["count"] = a.count;
        d["centers"] = pairs_list(a.centers);
        d["dims"] = pairs_list(a.dims);
        return d;
      },
      py::arg("geometry"));

  m.def(
      "answer_text",
      [](const std::string& g, int task) { return answer_text(canonical_answers(geometry(g)), task); },
      py::arg("geometry"), py::arg("task"));

  m.def("question", [](int task) { return std::string(question(task)); }, py::arg("task"));

  m.def(
      "build_conversation",
      [](const std::string& g, const std::string& image, const std::string& strategy,
         const std::string& source) {
        const auto src = source_from_string(source);
        if (!src) throw SchemaError("unknown source '" + source + "'");
        std::vector<std::string> lines;
        for (const auto& s : build_conversation(geometry(g), image, parse_strategy(strategy), *src)) {
          lines.push_back(to_jsonl(s));
        }
        return lines;
      },
      py::arg("geometry"), py::arg("image"), py::arg("strategy") = "S1",
      py::arg("source") = "synthetic", "Conversation samples as JSONL lines.");

  m.def(
      "parse_prediction",
      [](const std::string& text, int task) {
        const ParsedAnswer a = parse_prediction(text, task);
        py::dict d;
        d["task"] = a.task;
        d["outcome"] = std::string(to_string(a.outcome));
        d["count"] = a.count;
        d["pairs"] = pairs_list(a.pairs);
        return d;
      },
      py::arg("text"), py::arg("task"));

  m.def(
      "build_manifest",
      [](const std::vector<std::string>& synthetic, const std::vector<std::string>& real_world,
         const std::string& strategy, std::uint64_t seed) {
        return manifest_json(build_manifest(synthetic, real_world, parse_data_strategy(strategy), seed));
      },
      py::arg("synthetic"), py::arg("real_world"), py::arg("strategy"), py::arg("seed") = 0);

  m.def(
      "count_errors",
      [](const std::vector<std::pair<int, int>>& pairs) {
        const CountErrors e = count_errors(pairs);
        return py::make_tuple(e.mae, e.rmse);
      },
      py::arg("pairs"));

  m.def(
      "evaluate",
      [](const std::vector<std::string>& truths, const std::string& predictions,
         const std::string& matching, unsigned threads, std::uint64_t seed) {
        std::vector<FootprintGeometry> t;
        for (const auto& g : truths) t.push_back(geometry(g));
        const auto m = matching_from_string(matching);
        if (!m) throw SchemaError("matching must be 'index' or 'nearest'");
        const auto preds = parse_prediction_jsonl(predictions);
        Evaluation ev;
        {
          py::gil_scoped_release release;
          ev = evaluate(t, preds, {*m, threads, seed});
        }
        return py::make_tuple(report_json(ev.report), sample_reports_jsonl(ev.samples),
                              report_table(ev.report));
      },
      py::arg("truths"), py::arg("predictions"), py::arg("matching") = "index",
      py::arg("threads") = 1, py::arg("seed") = 0,
      "Returns (report JSON, per-sample JSONL, text table).");

  m.def(
      "canonical_predictions",
      [](const std::string& g) {
        std::vector<std::string> lines;
        for (const auto& r : canonical_predictions(geometry(g))) lines.push_back(to_jsonl(r));
        return lines;
      },
      py::arg("geometry"));

  m.def(
      "export_kicad",
      [](const std::string& g, const std::string& name) { return export_kicad(geometry(g), name); },
      py::arg("geometry"), py::arg("name"));

  m.def(
      "import_eda_xml",
      [](const std::string& text, const std::string& source_id) {
        const EdaImport imp = parse_eda_xml(text, source_id);
        return py::make_tuple(write_geometry_json(imp.geometry, JsonStyle::compact), imp.warnings);
      },
      py::arg("text"), py::arg("source_id") = "");
}
