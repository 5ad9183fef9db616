// padkit: batch front end for corpus generation, rendering, QA export and
// evaluation. Data goes to files or stdout; logs go to stderr as key=value
// lines.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <unordered_map>
#include <vector>

#include "padkit/errors.hpp"
#include "padkit/eval.hpp"
#include "padkit/geometry.hpp"
#include "padkit/interchange.hpp"
#include "padkit/parallel.hpp"
#include "padkit/qa.hpp"
#include "padkit/render.hpp"
#include "padkit/synth.hpp"

namespace fs = std::filesystem;
using namespace padkit;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kOutEnv = "PADKIT_OUT";
constexpr const char* kDefaultOut = "padkit-out";

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned jobs = 0;
  std::string out;
  bool quiet = false;
};

Globals g_opts;
std::mutex g_log_mutex;

std::string logfmt_value(std::string_view v) {
  const bool quote = v.empty() || v.find_first_of(" =\"\t\n") != std::string_view::npos;
  if (!quote) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

using Fields = std::vector<std::pair<std::string, std::string>>;

void log(std::string_view level, std::string_view event, const Fields& fields = {}) {
  if (g_opts.quiet && level == "info") return;
  std::string line = "level=" + std::string(level) + " event=" + std::string(event);
  for (const auto& [k, v] : fields) line += " " + k + "=" + logfmt_value(v);
  std::lock_guard lock(g_log_mutex);
  std::cerr << line << "\n";
}

std::string str(std::size_t v) { return std::to_string(v); }

fs::path out_root() { return g_opts.out; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The file appears complete or not at all: data goes to a sibling temp file
// that is renamed over the target.
void write_atomic(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void require_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw CLI::ValidationError(what, "no input given");
  if (!fs::exists(path)) throw CLI::ValidationError(what, "does not exist: " + path);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

// A .jsonl file (one geometry per line), a single .json document, or a
// directory of .json documents read in name order.
std::vector<FootprintGeometry> read_geometries(const fs::path& path) {
  std::vector<FootprintGeometry> out;
  auto parse_one = [&](std::string_view text, const std::string& where) {
    try {
      out.push_back(parse_geometry_json(text));
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  };
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json" &&
          entry.path().filename() != "index.json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) parse_one(read_file(f), f.string());
    return out;
  }
  const std::string text = read_file(path);
  if (path.extension() == ".jsonl") {
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!blank(lines[i])) parse_one(lines[i], path.string() + " line " + std::to_string(i + 1));
    }
  } else {
    parse_one(text, path.string());
  }
  return out;
}

std::string default_geometries() { return (out_root() / "geometries.jsonl").string(); }

// Runs fn over every geometry, collecting per-sample failures instead of
// stopping at the first one. Returns the number of failures.
template <class Fn>
std::size_t for_each_sample(const std::vector<FootprintGeometry>& geoms, std::string_view event,
                            Fn&& fn) {
  std::vector<std::string> errors(geoms.size());
  parallel_for(geoms.size(), resolve_threads(g_opts.jobs), [&](std::size_t i) {
    try {
      fn(i, geoms[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < geoms.size(); ++i) {
    if (errors[i].empty()) continue;
    ++failed;
    log("error", event, {{"sample", geoms[i].source_id}, {"error", errors[i]}});
  }
  return failed;
}

std::string safe_name(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out.empty() ? "unnamed" : out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string spec;
  std::optional<std::size_t> count;
  std::vector<std::string> classes;
};

int cmd_gen(const GenArgs& a) {
  CorpusSpec spec = a.spec.empty() ? default_corpus_spec(a.count.value_or(100), g_opts.seed)
                                   : parse_corpus_spec(read_file(a.spec));
  if (a.count) spec.count = *a.count;
  if (g_opts.seed_set) spec.seed = g_opts.seed;
  if (!a.classes.empty()) {
    spec.class_weights.clear();
    for (const auto& name : a.classes) {
      if (!find_package_class(name)) throw GenerationError("unknown package class '" + name + "'");
      spec.class_weights[name] = 1.0;
    }
  }
  log("info", "gen.start", {{"count", str(spec.count)}, {"seed", std::to_string(spec.seed)}});
  const std::vector<FootprintGeometry> geoms = sample_corpus(spec, resolve_threads(g_opts.jobs));

  const fs::path root = out_root();
  const std::size_t failed = for_each_sample(geoms, "gen.write", [&](std::size_t, const auto& g) {
    GeometryDocument doc;
    doc.geometry = g;
    doc.provenance.source_format = "synthetic";
    write_atomic(root / "geometry" / (safe_name(g.source_id) + ".json"), write_geometry_json(doc));
  });
  std::string jsonl;
  ojson index;
  index["seed"] = spec.seed;
  index["count"] = geoms.size();
  ojson samples = ojson::array();
  for (const auto& g : geoms) {
    jsonl += write_geometry_json(g, JsonStyle::compact) + "\n";
    samples.push_back({{"id", g.source_id},
                       {"package_class", g.package_class.name},
                       {"pins", g.pins.size()},
                       {"file", "geometry/" + safe_name(g.source_id) + ".json"}});
  }
  index["samples"] = samples;
  write_atomic(root / "geometries.jsonl", jsonl);
  write_atomic(root / "index.json", index.dump(2) + "\n");
  log("info", "gen.done", {{"samples", str(geoms.size())}, {"out", root.string()}});
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string input;
  std::string output;
  RenderSpec spec;
  bool no_pin_numbers = false, no_pitch = false, no_pad_dims = false, no_pin1 = false;
  bool no_arrowheads = false, no_extension_lines = false;
};

void add_render_options(CLI::App* cmd, RenderArgs& a) {
  cmd->add_option("--px-per-mm", a.spec.px_per_mm, "Drawing scale")->capture_default_str();
  cmd->add_option("--margin", a.spec.margin_mm, "Margin around the drawing in mm")->capture_default_str();
  cmd->add_option("--font-size", a.spec.font_size_pt, "Label font size in pt")->capture_default_str();
  cmd->add_option("--pad-stroke", a.spec.pad_stroke_px, "Pad outline width in px")->capture_default_str();
  cmd->add_option("--dimension-stroke", a.spec.dimension_stroke_px, "Dimension line width in px")
      ->capture_default_str();
  cmd->add_option("--omission-threshold", a.spec.omission_threshold,
                  "Elide the middle of rows longer than this (0 = never, else >= 4)")
      ->capture_default_str();
  cmd->add_option("--text-jitter", a.spec.text_jitter_mm, "Random pin-number offset in mm")
      ->capture_default_str();
  cmd->add_flag("--no-pin-numbers", a.no_pin_numbers, "Omit pin numbers");
  cmd->add_flag("--no-pitch", a.no_pitch, "Omit pitch dimensions");
  cmd->add_flag("--no-pad-dims", a.no_pad_dims, "Omit pad size dimensions");
  cmd->add_flag("--no-pin1-marker", a.no_pin1, "Omit the pin 1 marker");
  cmd->add_flag("--no-arrowheads", a.no_arrowheads, "Draw dimension lines without arrowheads");
  cmd->add_flag("--no-extension-lines", a.no_extension_lines, "Omit extension lines");
}

RenderSpec finish_spec(const RenderArgs& a) {
  RenderSpec s = a.spec;
  s.show_pin_numbers = !a.no_pin_numbers;
  s.show_pitch = !a.no_pitch;
  s.show_pad_dims = !a.no_pad_dims;
  s.show_pin1_marker = !a.no_pin1;
  s.arrowheads = !a.no_arrowheads;
  s.extension_lines = !a.no_extension_lines;
  check_render_spec(s);
  return s;
}

int cmd_render(const RenderArgs& a) {
  const std::string input = a.input.empty() ? default_geometries() : a.input;
  require_input(input, "--input");
  const RenderSpec base = finish_spec(a);
  const auto geoms = read_geometries(input);
  const fs::path dir = a.output.empty() ? out_root() / "images" : fs::path(a.output);
  const std::size_t failed = for_each_sample(geoms, "render", [&](std::size_t i, const auto& g) {
    RenderSpec spec = base;
    spec.seed = derive_seed(g_opts.seed, i);
    write_atomic(dir / (safe_name(g.source_id) + ".svg"), render_svg(g, spec));
  });
  log("info", "render.done",
      {{"samples", str(geoms.size())}, {"failed", str(failed)}, {"out", dir.string()}});
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct QaArgs {
  std::string input;
  std::string strategy = "S1";
  std::string source = "synthetic";
  std::string image_dir = "images";
  std::string output;
  std::string predictions;
};

int cmd_build_qa(const QaArgs& a) {
  const std::string input = a.input.empty() ? default_geometries() : a.input;
  require_input(input, "--input");
  const Strategy strategy = parse_strategy(a.strategy);
  const auto source = source_from_string(a.source);
  if (!source) throw CLI::ValidationError("--source", "must be synthetic or real-world");
  const auto geoms = read_geometries(input);

  std::vector<std::string> lines(geoms.size());
  std::vector<std::string> preds(geoms.size());
  const std::size_t failed = for_each_sample(geoms, "build-qa", [&](std::size_t i, const auto& g) {
    const std::string image = a.image_dir + "/" + safe_name(g.source_id) + ".svg";
    for (const auto& s : build_conversation(g, image, strategy, *source)) lines[i] += to_jsonl(s) + "\n";
    if (!a.predictions.empty()) {
      for (const auto& r : canonical_predictions(g)) preds[i] += to_jsonl(r) + "\n";
    }
  });
  if (failed) return 1;
  std::string all;
  for (const auto& l : lines) all += l;
  const fs::path out = a.output.empty() ? out_root() / ("qa_" + a.strategy + ".jsonl") : fs::path(a.output);
  write_atomic(out, all);
  if (!a.predictions.empty()) {
    std::string p;
    for (const auto& l : preds) p += l;
    write_atomic(a.predictions, p);
  }
  log("info", "build-qa.done",
      {{"samples", str(geoms.size())}, {"strategy", a.strategy}, {"out", out.string()}});
  return 0;
}

// ---------------------------------------------------------------------------

struct ManifestArgs {
  std::string synthetic;
  std::string real_world;
  std::string strategy = "T4";
  std::string output;
};

// Sample ids from a conversation JSONL file.
std::vector<std::string> read_sample_ids(const std::string& path) {
  std::vector<std::string> ids;
  if (path.empty()) return ids;
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where = path + " line " + std::to_string(i + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what(), e.byte);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw SchemaError(where + ": expected an object with a string id");
    }
    ids.push_back(j["id"].get<std::string>());
  }
  return ids;
}

int cmd_manifest(const ManifestArgs& a) {
  if (!a.synthetic.empty()) require_input(a.synthetic, "--synthetic");
  if (!a.real_world.empty()) require_input(a.real_world, "--real-world");
  const DataStrategy strategy = parse_data_strategy(a.strategy);
  const StageManifest m = build_manifest(read_sample_ids(a.synthetic), read_sample_ids(a.real_world),
                                         strategy, g_opts.seed);
  const fs::path out =
      a.output.empty() ? out_root() / ("manifest_" + a.strategy + ".json") : fs::path(a.output);
  write_atomic(out, manifest_json(m));
  Fields f = {{"strategy", a.strategy}, {"out", out.string()}};
  for (const auto& s : m.stages) f.emplace_back("stage." + s.name, str(s.samples.size()));
  log("info", "manifest.done", f);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string truth;
  std::string predictions;
  std::string format = "table";
  std::string output;
  std::string samples;
  std::string matching = "index";
};

int cmd_eval(const EvalArgs& a) {
  const std::string truth_path = a.truth.empty() ? default_geometries() : a.truth;
  require_input(truth_path, "--truth");
  require_input(a.predictions, "--predictions");
  const auto truths = read_geometries(truth_path);
  const auto preds = parse_prediction_jsonl(read_file(a.predictions));
  EvalOptions options;
  options.matching = *matching_from_string(a.matching);
  options.threads = resolve_threads(g_opts.jobs);
  options.seed = g_opts.seed;
  const Evaluation ev = evaluate(truths, preds, options);

  if (ev.report.missing) {
    std::string ids;
    for (const auto& s : ev.samples) {
      if (s.missing && ids.size() < 400) ids += (ids.empty() ? "" : ",") + s.sample_id;
    }
    log("warn", "eval.missing", {{"count", str(ev.report.missing)}, {"ids", ids}});
  }
  if (ev.unknown_predictions) {
    std::string ids;
    for (const auto& id : ev.unknown_ids) ids += (ids.empty() ? "" : ",") + id;
    log("warn", "eval.unknown", {{"count", str(ev.unknown_predictions)}, {"ids", ids}});
  }
  if (ev.duplicate_predictions) {
    log("warn", "eval.duplicate", {{"count", str(ev.duplicate_predictions)}});
  }

  std::string text;
  if (a.format == "json") {
    text = report_json(ev.report);
  } else if (a.format == "csv") {
    text = report_csv(ev.report);
  } else {
    text = report_table(ev.report);
  }
  if (a.output.empty()) {
    std::cout << text << std::flush;
  } else {
    write_atomic(a.output, text);
  }
  if (!a.samples.empty()) write_atomic(a.samples, sample_reports_jsonl(ev.samples));
  log("info", "eval.done",
      {{"samples", str(ev.samples.size())}, {"runs", str(ev.report.runs)},
       {"iou_ic", format_percent(ev.report.overall.iou_ic)}});
  return 0;
}

// ---------------------------------------------------------------------------

struct ExportArgs {
  std::string input;
  std::string output;
};

int cmd_export(const ExportArgs& a) {
  const std::string input = a.input.empty() ? default_geometries() : a.input;
  require_input(input, "--input");
  const auto geoms = read_geometries(input);
  const fs::path dir = a.output.empty() ? out_root() / "kicad" : fs::path(a.output);
  const std::size_t failed = for_each_sample(geoms, "export-kicad", [&](std::size_t, const auto& g) {
    const std::string name = safe_name(g.source_id);
    write_atomic(dir / (name + ".kicad_mod"), export_kicad(g, name));
  });
  log("info", "export-kicad.done",
      {{"samples", str(geoms.size())}, {"failed", str(failed)}, {"out", dir.string()}});
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct OverlayArgs {
  std::string truth;
  std::string predictions;
  std::string output;
  std::optional<int> run;
  RenderArgs render;
};

int cmd_overlay(const OverlayArgs& a) {
  const std::string truth_path = a.truth.empty() ? default_geometries() : a.truth;
  require_input(truth_path, "--truth");
  require_input(a.predictions, "--predictions");
  const auto truths = read_geometries(truth_path);
  const auto preds = parse_prediction_jsonl(read_file(a.predictions));
  int run = a.run.value_or(0);
  if (!a.run && !preds.empty()) {
    run = std::min_element(preds.begin(), preds.end(), [](const auto& x, const auto& y) {
            return x.run < y.run;
          })->run;
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < truths.size(); ++i) index.emplace(truths[i].source_id, i);
  std::vector<std::array<const PredictionRecord*, 3>> slots(truths.size(), {nullptr, nullptr, nullptr});
  for (const auto& p : preds) {
    if (p.run != run) continue;
    auto it = index.find(p.sample_id);
    if (it == index.end()) {
      if (auto colon = p.sample_id.rfind(':'); colon != std::string::npos) {
        it = index.find(p.sample_id.substr(0, colon));
      }
    }
    if (it == index.end()) continue;
    auto& slot = slots[it->second][static_cast<std::size_t>(p.task - 1)];
    if (!slot) slot = &p;
  }

  const RenderSpec spec = finish_spec(a.render);
  const fs::path dir = a.output.empty() ? out_root() / "overlays" : fs::path(a.output);
  const std::size_t failed = for_each_sample(truths, "overlay", [&](std::size_t i, const auto& g) {
    const FootprintGeometry truth = g.origin == Origin::layout_center ? g : recenter(g);
    ParsedAnswer centers{2, ParseOutcome::failed, 0, {}};
    ParsedAnswer dims{3, ParseOutcome::failed, 0, {}};
    if (slots[i][1]) centers = parse_prediction(slots[i][1]->output_text, 2);
    if (slots[i][2]) dims = parse_prediction(slots[i][2]->output_text, 3);
    const FootprintGeometry pred = prediction_geometry(centers, dims, truth);
    write_atomic(dir / (safe_name(g.source_id) + ".svg"), render_overlay(pred, truth, spec));
  });
  log("info", "overlay.done",
      {{"samples", str(truths.size())}, {"failed", str(failed)}, {"out", dir.string()}});
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"padkit: synthetic IC footprint corpora, QA export and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", PADKIT_VERSION);

  const char* env_out = std::getenv(kOutEnv);
  g_opts.out = env_out && *env_out ? env_out : kDefaultOut;
  auto* seed_opt = app.add_option("--seed", g_opts.seed, "Root seed for all randomness")
                       ->capture_default_str();
  app.add_option("--jobs,-j", g_opts.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out,-o", g_opts.out,
                 std::string("Output root (default: $") + kOutEnv + " or ./" + kDefaultOut + ")");
  app.add_flag("--quiet,-q", g_opts.quiet, "Only log warnings and errors");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic geometry corpus");
  gen_cmd->add_option("--spec", gen.spec, "Corpus spec JSON file")->check(CLI::ExistingFile);
  gen_cmd->add_option("--count,-n", gen.count, "Number of samples (overrides the spec)");
  gen_cmd->add_option("--class", gen.classes, "Restrict to these package classes (repeatable)");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render dimensioned SVG drawings");
  render_cmd->add_option("--input,-i", render.input, "Geometry .jsonl, .json or directory");
  render_cmd->add_option("--output-dir", render.output, "Output directory (default <out>/images)");
  add_render_options(render_cmd, render);

  QaArgs qa;
  auto* qa_cmd = app.add_subcommand("build-qa", "Write conversation samples as JSONL");
  qa_cmd->add_option("--input,-i", qa.input, "Geometry .jsonl, .json or directory");
  qa_cmd->add_option("--strategy", qa.strategy, "Dialogue strategy S1..S5")
      ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "S5"}))
      ->capture_default_str();
  qa_cmd->add_option("--source", qa.source, "Corpus source tag")
      ->check(CLI::IsMember({"synthetic", "real-world"}))
      ->capture_default_str();
  qa_cmd->add_option("--image-dir", qa.image_dir, "Image path prefix stored in samples")
      ->capture_default_str();
  qa_cmd->add_option("--output", qa.output, "Output file (default <out>/qa_<strategy>.jsonl)");
  qa_cmd->add_option("--predictions", qa.predictions,
                     "Also write the canonical answers as prediction JSONL to this file");

  ManifestArgs manifest;
  auto* manifest_cmd = app.add_subcommand("manifest", "Write a staged training manifest");
  manifest_cmd->add_option("--synthetic", manifest.synthetic, "Conversation JSONL of synthetic samples");
  manifest_cmd->add_option("--real-world", manifest.real_world, "Conversation JSONL of real-world samples");
  manifest_cmd->add_option("--strategy", manifest.strategy, "Dataset strategy T1..T4")
      ->check(CLI::IsMember({"T1", "T2", "T3", "T4"}))
      ->capture_default_str();
  manifest_cmd->add_option("--output", manifest.output, "Output file (default <out>/manifest_<strategy>.json)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score model outputs against truth geometry");
  eval_cmd->add_option("--truth", ev.truth, "Truth geometry (default <out>/geometries.jsonl)");
  eval_cmd->add_option("--predictions,-p", ev.predictions, "Prediction JSONL")->required();
  eval_cmd->add_option("--format", ev.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  eval_cmd->add_option("--output", ev.output, "Report file (default: standard output)");
  eval_cmd->add_option("--samples", ev.samples, "Also write per-sample reports as JSONL");
  eval_cmd->add_option("--matching", ev.matching,
                       "Pin matching; 'nearest' is for analysis and is not the reported metric")
      ->check(CLI::IsMember({"index", "nearest"}))
      ->capture_default_str();

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export-kicad", "Write KiCad footprint files");
  export_cmd->add_option("--input,-i", ex.input, "Geometry .jsonl, .json or directory");
  export_cmd->add_option("--output-dir", ex.output, "Output directory (default <out>/kicad)");

  OverlayArgs ov;
  auto* overlay_cmd = app.add_subcommand("overlay", "Draw predicted pads over truth pads");
  overlay_cmd->add_option("--truth", ov.truth, "Truth geometry (default <out>/geometries.jsonl)");
  overlay_cmd->add_option("--predictions,-p", ov.predictions, "Prediction JSONL")->required();
  overlay_cmd->add_option("--run", ov.run, "Run to draw (default: lowest run present)");
  overlay_cmd->add_option("--output-dir", ov.output, "Output directory (default <out>/overlays)");
  add_render_options(overlay_cmd, ov.render);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  g_opts.seed_set = seed_opt->count() > 0;

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*render_cmd) return cmd_render(render);
    if (*qa_cmd) return cmd_build_qa(qa);
    if (*manifest_cmd) return cmd_manifest(manifest);
    if (*eval_cmd) return cmd_eval(ev);
    if (*export_cmd) return cmd_export(ex);
    if (*overlay_cmd) return cmd_overlay(ov);
  } catch (const CLI::ValidationError& e) {
    log("error", "usage", {{"error", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    log("error", "failed", {{"error", e.what()}});
    return 1;
  }
  return 0;
}
