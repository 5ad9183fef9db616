#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padkit/geometry.hpp"

namespace padkit {

/// Dialogue strategies: how the three tasks are split across samples and
/// training rounds.
///   S1 {123}      one sample, tasks 1, 2, 3 in order
///   S2 {1,2,3}    three independent single-task samples, one round
///   S3 {1}{23}    round 1: task 1; round 2: tasks 2, 3
///   S4 {12}{13}   round 1: tasks 1, 2; round 2: tasks 1, 3
///   S5 {1}{2}{3}  one task per round, three rounds
enum class Strategy { S1, S2, S3, S4, S5 };

/// Dataset strategies: which corpora feed which training stage.
///   T1 real-world only; T2 one mixed stage; T3 real-world then synthetic;
///   T4 synthetic then real-world.
enum class DataStrategy { T1, T2, T3, T4 };

enum class Source { synthetic, real_world };

std::string_view to_string(Strategy s);
std::string_view to_string(DataStrategy s);
std::string_view to_string(Source s);  // "synthetic", "real-world"
std::optional<Strategy> strategy_from_string(std::string_view text);
std::optional<DataStrategy> data_strategy_from_string(std::string_view text);
std::optional<Source> source_from_string(std::string_view text);
Strategy parse_strategy(std::string_view text);            // throws SchemaError
DataStrategy parse_data_strategy(std::string_view text);   // throws SchemaError

/// Canonical question text for task 1 (count), 2 (centers) or 3 (dims).
std::string_view question(int task);

using Pair = std::array<double, 2>;

struct CanonicalAnswers {
  int count = 0;
  std::vector<Pair> centers;  // [x, y] mm, by ordinal
  std::vector<Pair> dims;     // [w, h] mm, by ordinal; circles report [d, d]
};

/// Values are rounded to 4 decimals, so they survive the text round trip.
CanonicalAnswers canonical_answers(const FootprintGeometry& geometry);

/// JSON fragment for one task: {"count":8}, {"centers":[[x,y],...]},
/// {"dims":[[w,h],...]}. Numbers carry at most 4 decimals.
std::string answer_text(const CanonicalAnswers& answers, int task);

struct Turn {
  int task = 1;
  std::string question;
  std::string answer;
};

struct ConversationSample {
  std::string id;
  std::string image;
  std::vector<Turn> turns;
  Strategy strategy = Strategy::S1;
  int round = 1;
  std::string group_id;
  Source source = Source::synthetic;

  std::vector<int> tasks() const;
};

/// Samples for one footprint under a strategy. `group_id` defaults to the
/// geometry's source id; sample ids are "<group_id>:<k>".
std::vector<ConversationSample> build_conversation(const FootprintGeometry& geometry,
                                                   const std::string& image_ref, Strategy strategy,
                                                   Source source = Source::synthetic,
                                                   std::string group_id = {});

/// One JSONL line (no trailing newline):
/// {"id","image","turns":[{"q","a"}],"strategy","round","group_id","source"}.
std::string to_jsonl(const ConversationSample& sample);

enum class ParseOutcome { strict, lenient, failed };

std::string_view to_string(ParseOutcome outcome);

struct ParsedAnswer {
  int task = 1;
  ParseOutcome outcome = ParseOutcome::failed;
  int count = 0;           // task 1
  std::vector<Pair> pairs;  // tasks 2 and 3
};

/// Read free-form model output for a task. Tries, in order: the whole text as
/// JSON; the first fenced code block; the first balanced {...} or [...] that
/// has the expected shape (or, for task 1, the first non-negative integer in
/// the text). Never throws on bad input; unusable text yields `failed`.
ParsedAnswer parse_prediction(std::string_view text, int task);

struct Stage {
  std::string name;
  std::vector<std::string> samples;
};

struct StageManifest {
  DataStrategy strategy = DataStrategy::T1;
  std::uint64_t seed = 0;
  std::vector<Stage> stages;
};

/// Stage layout per strategy; within a stage, samples are shuffled with a
/// seeded Fisher-Yates pass. Errors: a required corpus is empty, or a sample
/// id occurs twice within a stage.
StageManifest build_manifest(const std::vector<std::string>& synthetic,
                             const std::vector<std::string>& real_world, DataStrategy strategy,
                             std::uint64_t seed = 0);

std::string manifest_json(const StageManifest& manifest);

}  // namespace padkit
