#include "padkit/qa.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

#include <json.hpp>

#include "padkit/errors.hpp"
#include "padkit/format.hpp"
#include "padkit/synth.hpp"

namespace padkit {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::size_t kMaxPredictionBytes = 1 << 20;
constexpr int kMaxNesting = 64;

double round4(double v) {
  const double r = std::round(v * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;
}

std::string pairs_text(const std::vector<Pair>& pairs) {
  std::string out = "[";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) out += ",";
    out += "[" + format_trimmed(pairs[i][0], 4) + "," + format_trimmed(pairs[i][1], 4) + "]";
  }
  return out + "]";
}

const char* task_key(int task) { return task == 2 ? "centers" : "dims"; }

bool read_count(const json& j, int& out) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0 || v > INT_MAX) return false;
    out = static_cast<int>(v);
    return true;
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v) || v < 0 || v > INT_MAX || v != std::floor(v)) return false;
    out = static_cast<int>(v);
    return true;
  }
  return false;
}

bool read_pairs(const json& j, std::vector<Pair>& out) {
  if (!j.is_array()) return false;
  std::vector<Pair> pairs;
  pairs.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) return false;
    const double a = e[0].get<double>();
    const double b = e[1].get<double>();
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    pairs.push_back({a, b});
  }
  out = std::move(pairs);
  return true;
}

// Does this JSON value have the shape of an answer to `task`?
bool accept(const json& j, int task, ParsedAnswer& out) {
  if (task == 1) {
    if (j.is_object()) {
      auto it = j.find("count");
      return it != j.end() && read_count(*it, out.count);
    }
    return read_count(j, out.count);
  }
  if (j.is_object()) {
    auto it = j.find(task_key(task));
    return it != j.end() && read_pairs(*it, out.pairs);
  }
  return read_pairs(j, out.pairs);
}

int nesting(std::string_view s) {
  int depth = 0, max_depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') max_depth = std::max(max_depth, ++depth);
    else if (c == ']' || c == '}') --depth;
  }
  return max_depth;
}

bool try_json(std::string_view s, int task, ParsedAnswer& out) {
  if (nesting(s) > kMaxNesting) return false;
  try {
    const json j = json::parse(s.begin(), s.end(), nullptr, false);
    if (j.is_discarded()) return false;
    return accept(j, task, out);
  } catch (const json::exception&) {
    return false;
  }
}

// End (exclusive) of the balanced bracket group starting at `start`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (stack.size() >= static_cast<std::size_t>(kMaxNesting)) return std::string_view::npos;
      stack.push_back(c == '[' ? ']' : '}');
    } else if (c == ']' || c == '}') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::string_view::npos;
}

bool first_fenced_block(std::string_view s, std::string_view& body) {
  const std::size_t open = s.find("```");
  if (open == std::string_view::npos) return false;
  std::size_t start = s.find('\n', open + 3);
  if (start == std::string_view::npos) return false;
  ++start;
  const std::size_t close = s.find("```", start);
  if (close == std::string_view::npos) return false;
  body = s.substr(start, close - start);
  return true;
}

bool is_word(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

// First standalone non-negative integer ("8", "8.0"), skipping parts of
// identifiers such as "SOIC-8" or "v2".
bool first_integer(std::string_view s, int& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t end = i;
    bool integral = true;
    if (i + 1 < s.size() && s[i] == '.' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      ++i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        if (s[i] != '0') integral = false;
        ++i;
      }
      end = i;
    }
    const bool bounded_left = start == 0 || !is_word(s[start - 1]);
    const bool bounded_right = end == s.size() || !std::isalnum(static_cast<unsigned char>(s[end]));
    if (bounded_left && bounded_right && integral && end - start <= 9) {
      long long v = 0;
      for (std::size_t k = start; k < end && s[k] != '.'; ++k) v = v * 10 + (s[k] - '0');
      out = static_cast<int>(v);
      return true;
    }
  }
  return false;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

void shuffle(std::vector<std::string>& v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::string_view to_string(Strategy s) {
  static constexpr std::array<std::string_view, 5> names{"S1", "S2", "S3", "S4", "S5"};
  return names[static_cast<std::size_t>(s)];
}

std::string_view to_string(DataStrategy s) {
  static constexpr std::array<std::string_view, 4> names{"T1", "T2", "T3", "T4"};
  return names[static_cast<std::size_t>(s)];
}

std::string_view to_string(Source s) { return s == Source::synthetic ? "synthetic" : "real-world"; }

std::string_view to_string(ParseOutcome outcome) {
  switch (outcome) {
    case ParseOutcome::strict: return "strict";
    case ParseOutcome::lenient: return "lenient";
    case ParseOutcome::failed: return "failed";
  }
  return "failed";
}

std::optional<Strategy> strategy_from_string(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    if (to_string(static_cast<Strategy>(i)) == text) return static_cast<Strategy>(i);
  }
  return std::nullopt;
}

std::optional<DataStrategy> data_strategy_from_string(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    if (to_string(static_cast<DataStrategy>(i)) == text) return static_cast<DataStrategy>(i);
  }
  return std::nullopt;
}

std::optional<Source> source_from_string(std::string_view text) {
  if (text == "synthetic") return Source::synthetic;
  if (text == "real-world") return Source::real_world;
  return std::nullopt;
}

Strategy parse_strategy(std::string_view text) {
  if (auto s = strategy_from_string(text)) return *s;
  throw SchemaError("unknown dialogue strategy '" + std::string(text) + "' (expected S1..S5)");
}

DataStrategy parse_data_strategy(std::string_view text) {
  if (auto s = data_strategy_from_string(text)) return *s;
  throw SchemaError("unknown dataset strategy '" + std::string(text) + "' (expected T1..T4)");
}

std::string_view question(int task) {
  switch (task) {
    case 1: return "How many pins are in this IC footprint diagram?";
    case 2:
      return "List the center coordinates [x, y] of every pin in millimeters, relative to the "
             "center of the diagram, in pin order.";
    case 3: return "List the dimensions [width, height] of every pin in millimeters, in pin order.";
  }
  throw SchemaError("task must be 1, 2 or 3 (got " + std::to_string(task) + ")");
}

CanonicalAnswers canonical_answers(const FootprintGeometry& geometry) {
  require_valid(geometry);
  const FootprintGeometry g =
      geometry.origin == Origin::layout_center ? geometry : recenter(geometry);
  std::vector<const Pin*> pins;
  for (const auto& p : g.pins) pins.push_back(&p);
  std::stable_sort(pins.begin(), pins.end(),
                   [](const Pin* a, const Pin* b) { return a->ordinal < b->ordinal; });
  CanonicalAnswers a;
  a.count = static_cast<int>(pins.size());
  for (const Pin* p : pins) {
    a.centers.push_back({round4(p->cx), round4(p->cy)});
    a.dims.push_back({round4(p->w), round4(p->h)});
  }
  return a;
}

std::string answer_text(const CanonicalAnswers& answers, int task) {
  switch (task) {
    case 1: return "{\"count\":" + std::to_string(answers.count) + "}";
    case 2: return "{\"centers\":" + pairs_text(answers.centers) + "}";
    case 3: return "{\"dims\":" + pairs_text(answers.dims) + "}";
  }
  throw SchemaError("task must be 1, 2 or 3 (got " + std::to_string(task) + ")");
}

std::vector<int> ConversationSample::tasks() const {
  std::vector<int> out;
  for (const auto& t : turns) out.push_back(t.task);
  return out;
}

std::vector<ConversationSample> build_conversation(const FootprintGeometry& geometry,
                                                   const std::string& image_ref, Strategy strategy,
                                                   Source source, std::string group_id) {
  const CanonicalAnswers answers = canonical_answers(geometry);
  if (group_id.empty()) group_id = geometry.source_id;

  struct Part {
    int round;
    std::vector<int> tasks;
  };
  std::vector<Part> parts;
  switch (strategy) {
    case Strategy::S1: parts = {{1, {1, 2, 3}}}; break;
    case Strategy::S2: parts = {{1, {1}}, {1, {2}}, {1, {3}}}; break;
    case Strategy::S3: parts = {{1, {1}}, {2, {2, 3}}}; break;
    case Strategy::S4: parts = {{1, {1, 2}}, {2, {1, 3}}}; break;
    case Strategy::S5: parts = {{1, {1}}, {2, {2}}, {3, {3}}}; break;
  }

  std::vector<ConversationSample> out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    ConversationSample s;
    s.id = group_id + ":" + std::to_string(k);
    s.image = image_ref;
    s.strategy = strategy;
    s.round = parts[k].round;
    s.group_id = group_id;
    s.source = source;
    for (int task : parts[k].tasks) {
      s.turns.push_back({task, std::string(question(task)), answer_text(answers, task)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_jsonl(const ConversationSample& sample) {
  ordered_json j;
  j["id"] = sample.id;
  j["image"] = sample.image;
  ordered_json turns = ordered_json::array();
  for (const auto& t : sample.turns) {
    ordered_json turn;
    turn["q"] = t.question;
    turn["a"] = t.answer;
    turns.push_back(std::move(turn));
  }
  j["turns"] = std::move(turns);
  j["strategy"] = std::string(to_string(sample.strategy));
  j["round"] = sample.round;
  j["group_id"] = sample.group_id;
  j["source"] = std::string(to_string(sample.source));
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ParsedAnswer parse_prediction(std::string_view text, int task) {
  ParsedAnswer out;
  out.task = task;
  if (task < 1 || task > 3) return out;
  if (text.size() > kMaxPredictionBytes) text = text.substr(0, kMaxPredictionBytes);

  ParsedAnswer attempt;
  attempt.task = task;
  auto finish = [&](ParseOutcome outcome) {
    attempt.outcome = outcome;
    return attempt;
  };

  const std::string_view body = trim(text);
  if (!body.empty() && try_json(body, task, attempt)) return finish(ParseOutcome::strict);

  std::string_view fenced;
  if (first_fenced_block(text, fenced) && try_json(trim(fenced), task, attempt)) {
    return finish(ParseOutcome::lenient);
  }

  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[' && text[i] != '{') continue;
    const std::size_t end = balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    if (try_json(text.substr(i, end - i), task, attempt)) return finish(ParseOutcome::lenient);
  }

  if (task == 1 && first_integer(text, attempt.count)) return finish(ParseOutcome::lenient);
  return out;
}

StageManifest build_manifest(const std::vector<std::string>& synthetic,
                             const std::vector<std::string>& real_world, DataStrategy strategy,
                             std::uint64_t seed) {
  auto need = [&](const std::vector<std::string>& v, const char* what) {
    if (v.empty()) {
      throw SchemaError(std::string(to_string(strategy)) + " needs a non-empty " + what + " corpus");
    }
  };
  StageManifest m;
  m.strategy = strategy;
  m.seed = seed;
  switch (strategy) {
    case DataStrategy::T1:
      need(real_world, "real-world");
      m.stages = {{"real-world", real_world}};
      break;
    case DataStrategy::T2: {
      if (synthetic.empty() && real_world.empty()) {
        throw SchemaError("T2 needs at least one non-empty corpus");
      }
      Stage s{"mixed", real_world};
      s.samples.insert(s.samples.end(), synthetic.begin(), synthetic.end());
      m.stages = {std::move(s)};
      break;
    }
    case DataStrategy::T3:
      need(real_world, "real-world");
      need(synthetic, "synthetic");
      m.stages = {{"real-world", real_world}, {"synthetic", synthetic}};
      break;
    case DataStrategy::T4:
      need(real_world, "real-world");
      need(synthetic, "synthetic");
      m.stages = {{"synthetic", synthetic}, {"real-world", real_world}};
      break;
  }
  for (std::size_t k = 0; k < m.stages.size(); ++k) {
    auto& stage = m.stages[k];
    std::set<std::string> seen;
    for (const auto& id : stage.samples) {
      if (!seen.insert(id).second) {
        throw SchemaError("sample '" + id + "' appears twice in stage '" + stage.name + "'");
      }
    }
    std::sort(stage.samples.begin(), stage.samples.end());
    shuffle(stage.samples, derive_seed(seed, k));
  }
  return m;
}

std::string manifest_json(const StageManifest& manifest) {
  ordered_json j;
  j["strategy"] = std::string(to_string(manifest.strategy));
  j["seed"] = manifest.seed;
  ordered_json stages = ordered_json::array();
  for (const auto& s : manifest.stages) {
    ordered_json stage;
    stage["name"] = s.name;
    stage["samples"] = s.samples;
    stages.push_back(std::move(stage));
  }
  j["stages"] = std::move(stages);
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace padkit
