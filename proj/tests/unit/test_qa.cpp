#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "../support/prediction_fuzz.hpp"
#include "padkit/errors.hpp"
#include "padkit/qa.hpp"
#include "padkit/synth.hpp"

using namespace padkit;
using nlohmann::json;

namespace {

FootprintGeometry chip() {
  FootprintGeometry g;
  g.package_class = package_class("CHIP2");
  g.origin = Origin::layout_center;
  g.source_id = "chip";
  g.pins = {{"1", 1, -1.5, 0.0, PadShape::rectangle, 0.9, 1.6},
            {"2", 2, 1.5, 0.0, PadShape::rectangle, 0.9, 1.6}};
  return g;
}

FootprintGeometry soic8() {
  FootprintParams p;
  p.pins = 8;
  p.pitch = 1.27;
  p.pad_width = 0.6;
  p.pad_length = 1.5;
  p.row_span = 5.4;
  return make_footprint(package_class("SOIC"), p, "soic8");
}

const std::map<Strategy, std::vector<std::pair<int, std::vector<int>>>> kPartitions = {
    {Strategy::S1, {{1, {1, 2, 3}}}},
    {Strategy::S2, {{1, {1}}, {1, {2}}, {1, {3}}}},
    {Strategy::S3, {{1, {1}}, {2, {2, 3}}}},
    {Strategy::S4, {{1, {1, 2}}, {2, {1, 3}}}},
    {Strategy::S5, {{1, {1}}, {2, {2}}, {3, {3}}}},
};

}  // namespace

TEST_CASE("canonical answers of a two-pad chip") {
  const auto a = canonical_answers(chip());
  CHECK(a.count == 2);
  CHECK(a.centers == std::vector<Pair>{{-1.5, 0.0}, {1.5, 0.0}});
  CHECK(a.dims == std::vector<Pair>{{0.9, 1.6}, {0.9, 1.6}});
  CHECK(answer_text(a, 1) == "{\"count\":2}");
  CHECK(answer_text(a, 2) == "{\"centers\":[[-1.5,0],[1.5,0]]}");
  CHECK(answer_text(a, 3) == "{\"dims\":[[0.9,1.6],[0.9,1.6]]}");
}

TEST_CASE("a single circle pad reports [d, d]") {
  FootprintGeometry g;
  g.package_class = package_class("SIP");
  g.origin = Origin::layout_center;
  g.pins = {{"1", 1, 0.0, 0.0, PadShape::circle, 1.0, 1.0}};
  const auto a = canonical_answers(g);
  CHECK(a.count == 1);
  CHECK(answer_text(a, 2) == "{\"centers\":[[0,0]]}");
  CHECK(answer_text(a, 3) == "{\"dims\":[[1,1]]}");
}

TEST_CASE("SOIC-8 answers match the hand-computed table") {
  const auto a = canonical_answers(soic8());
  CHECK(answer_text(a, 1) == "{\"count\":8}");
  CHECK(answer_text(a, 2) ==
        "{\"centers\":[[-2.7,1.905],[-2.7,0.635],[-2.7,-0.635],[-2.7,-1.905],"
        "[2.7,-1.905],[2.7,-0.635],[2.7,0.635],[2.7,1.905]]}");
  CHECK(answer_text(a, 3) ==
        "{\"dims\":[[1.5,0.6],[1.5,0.6],[1.5,0.6],[1.5,0.6],[1.5,0.6],[1.5,0.6],[1.5,0.6],[1.5,0.6]]}");
}

TEST_CASE("answers follow ordinal order and recentre source-origin input") {
  auto g = chip();
  std::swap(g.pins[0], g.pins[1]);
  for (auto& p : g.pins) p.cx += 10.0;
  g.origin = Origin::source;
  const auto a = canonical_answers(g);
  CHECK(a.centers == std::vector<Pair>{{-1.5, 0.0}, {1.5, 0.0}});
}

TEST_CASE("answers carry at most four decimals") {
  auto g = chip();
  g.pins[0].cx = -1.23456789;
  g.pins[1].cx = 1.23456789;
  const auto a = canonical_answers(g);
  CHECK(answer_text(a, 2) == "{\"centers\":[[-1.2346,0],[1.2346,0]]}");
}

TEST_CASE("strategy partitions") {
  const auto g = soic8();
  for (const auto& [strategy, parts] : kPartitions) {
    INFO(to_string(strategy));
    const auto samples = build_conversation(g, "img/soic8.svg", strategy);
    REQUIRE(samples.size() == parts.size());
    std::set<int> covered;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      CHECK(samples[k].round == parts[k].first);
      CHECK(samples[k].tasks() == parts[k].second);
      CHECK(samples[k].group_id == "soic8");
      CHECK(samples[k].image == "img/soic8.svg");
      for (const auto& t : samples[k].turns) {
        CHECK(t.question == question(t.task));
        covered.insert(t.task);
      }
    }
    CHECK(covered == std::set<int>{1, 2, 3});
  }
  CHECK(build_conversation(g, "x", Strategy::S1).front().turns.size() == 3);
  for (const auto& s : build_conversation(g, "x", Strategy::S4)) CHECK(s.tasks().front() == 1);
  CHECK(parse_strategy("S3") == Strategy::S3);
  CHECK_THROWS_AS(parse_strategy("S6"), SchemaError);
  CHECK_THROWS_AS(question(4), SchemaError);
}

TEST_CASE("JSONL lines carry the fixed fields") {
  const auto samples = build_conversation(soic8(), "a.svg", Strategy::S3, Source::real_world);
  const json j = json::parse(to_jsonl(samples[1]));
  CHECK(j["id"] == "soic8:1");
  CHECK(j["image"] == "a.svg");
  CHECK(j["strategy"] == "S3");
  CHECK(j["round"] == 2);
  CHECK(j["group_id"] == "soic8");
  CHECK(j["source"] == "real-world");
  REQUIRE(j["turns"].size() == 2);
  CHECK(j["turns"][0]["q"] == std::string(question(2)));
  CHECK(json::parse(j["turns"][1]["a"].get<std::string>()).contains("dims"));
  CHECK(to_jsonl(samples[1]).find('\n') == std::string::npos);
}

TEST_CASE("canonical answers survive the parser exactly") {
  const auto corpus = sample_corpus(default_corpus_spec(200, 9));
  for (const auto& g : corpus) {
    const auto a = canonical_answers(g);
    const auto p1 = parse_prediction(answer_text(a, 1), 1);
    const auto p2 = parse_prediction(answer_text(a, 2), 2);
    const auto p3 = parse_prediction(answer_text(a, 3), 3);
    CHECK(p1.outcome == ParseOutcome::strict);
    CHECK(p2.outcome == ParseOutcome::strict);
    CHECK(p3.outcome == ParseOutcome::strict);
    CHECK(p1.count == a.count);
    CHECK(p2.pairs == a.centers);
    CHECK(p3.pairs == a.dims);
    // The 1e-4 mm corpus grid makes answers equal the geometry itself.
    for (std::size_t i = 0; i < g.pins.size(); ++i) {
      CHECK(a.centers[i][0] == g.pins[i].cx);
      CHECK(a.dims[i][1] == g.pins[i].h);
    }
  }
}

TEST_CASE("prediction parsing examples") {
  auto p = parse_prediction("The diagram has 8 pins.", 1);
  CHECK(p.outcome == ParseOutcome::lenient);
  CHECK(p.count == 8);

  p = parse_prediction(R"({"centers": [[-1.5,0],[1.5,0]]})", 2);
  CHECK(p.outcome == ParseOutcome::strict);
  CHECK(p.pairs.size() == 2);

  p = parse_prediction("I cannot determine this.", 2);
  CHECK(p.outcome == ParseOutcome::failed);
  CHECK(p.pairs.empty());

  p = parse_prediction("Here you go:\n```json\n{\"dims\": [[1, 2]]}\n```\nDone.", 3);
  CHECK(p.outcome == ParseOutcome::lenient);
  CHECK(p.pairs == std::vector<Pair>{{1.0, 2.0}});

  p = parse_prediction("Pins at [[0, 1], [2, 3]] roughly", 2);
  CHECK(p.outcome == ParseOutcome::lenient);
  CHECK(p.pairs.size() == 2);

  p = parse_prediction("This SOIC-8 package has 6 pins", 1);
  CHECK(p.count == 6);

  p = parse_prediction("{\"count\": 12}", 1);
  CHECK(p.outcome == ParseOutcome::strict);
  CHECK(p.count == 12);

  p = parse_prediction("12", 1);
  CHECK(p.outcome == ParseOutcome::strict);

  // A wrong key is not a strict answer; the embedded list is still found.
  CHECK(parse_prediction(R"({"dims": [[1, 2]]})", 2).outcome == ParseOutcome::lenient);
  CHECK(parse_prediction(R"({"dims": 3})", 2).outcome == ParseOutcome::failed);
  CHECK(parse_prediction(R"({"count": -1})", 1).outcome == ParseOutcome::failed);
  CHECK(parse_prediction(R"({"count": 2.5})", 1).outcome == ParseOutcome::failed);
  CHECK(parse_prediction("[[1, 2], [3]]", 2).outcome == ParseOutcome::failed);
  CHECK(parse_prediction("", 1).outcome == ParseOutcome::failed);
  CHECK(parse_prediction("8", 4).outcome == ParseOutcome::failed);
}

TEST_CASE("fuzzed prediction texts never crash and are always classified") {
  const auto corpus = testing::prediction_fuzz_corpus(2000, 77);
  std::map<ParseOutcome, int> outcomes;
  for (const auto& c : corpus) {
    ParsedAnswer p;
    CHECK_NOTHROW(p = parse_prediction(c.text, c.task));
    ++outcomes[p.outcome];
    if (c.kind == testing::FuzzCase::Kind::json) CHECK(p.outcome == ParseOutcome::strict);
    if (c.kind == testing::FuzzCase::Kind::prose) CHECK(p.outcome == ParseOutcome::lenient);
    if (p.outcome == ParseOutcome::failed) {
      CHECK(p.pairs.empty());
      CHECK(p.count == 0);
    }
  }
  CHECK(outcomes[ParseOutcome::strict] > 0);
  CHECK(outcomes[ParseOutcome::lenient] > 0);
  CHECK(outcomes[ParseOutcome::failed] > 0);
}

TEST_CASE("manifests per dataset strategy") {
  std::vector<std::string> synth, real;
  for (int i = 0; i < 10; ++i) synth.push_back("s" + std::to_string(i));
  for (int i = 0; i < 5; ++i) real.push_back("r" + std::to_string(i));

  auto m = build_manifest(synth, real, DataStrategy::T4, 1);
  REQUIRE(m.stages.size() == 2);
  CHECK(m.stages[0].name == "synthetic");
  CHECK(m.stages[0].samples.size() == 10);
  CHECK(m.stages[1].name == "real-world");
  CHECK(m.stages[1].samples.size() == 5);

  m = build_manifest(synth, real, DataStrategy::T3, 1);
  CHECK(m.stages[0].name == "real-world");
  CHECK(m.stages[1].name == "synthetic");

  m = build_manifest(synth, real, DataStrategy::T2, 1);
  REQUIRE(m.stages.size() == 1);
  CHECK(m.stages[0].samples.size() == 15);

  m = build_manifest(synth, real, DataStrategy::T1, 1);
  REQUIRE(m.stages.size() == 1);
  CHECK(m.stages[0].samples.size() == 5);

  CHECK_THROWS_AS(build_manifest(synth, {}, DataStrategy::T1, 1), SchemaError);
  CHECK_THROWS_AS(build_manifest(synth, {}, DataStrategy::T3, 1), SchemaError);
  CHECK_THROWS_AS(build_manifest(synth, {}, DataStrategy::T4, 1), SchemaError);
  CHECK_THROWS_AS(build_manifest({}, real, DataStrategy::T4, 1), SchemaError);
  CHECK_NOTHROW(build_manifest(synth, {}, DataStrategy::T2, 1));
  CHECK_THROWS_AS(build_manifest({"a", "a"}, {"r"}, DataStrategy::T4, 1), SchemaError);
  CHECK_THROWS_AS(build_manifest({"a"}, {"a"}, DataStrategy::T2, 1), SchemaError);
}

TEST_CASE("manifest order is seeded and independent of input order") {
  std::vector<std::string> synth;
  for (int i = 0; i < 50; ++i) synth.push_back("s" + std::to_string(i));
  auto reversed = synth;
  std::reverse(reversed.begin(), reversed.end());
  const auto a = build_manifest(synth, {"r"}, DataStrategy::T4, 5);
  const auto b = build_manifest(reversed, {"r"}, DataStrategy::T4, 5);
  const auto c = build_manifest(synth, {"r"}, DataStrategy::T4, 6);
  CHECK(a.stages[0].samples == b.stages[0].samples);
  CHECK(a.stages[0].samples != c.stages[0].samples);
  auto sorted = a.stages[0].samples;
  std::sort(sorted.begin(), sorted.end());
  auto expected = synth;
  std::sort(expected.begin(), expected.end());
  CHECK(sorted == expected);
  const json j = json::parse(manifest_json(a));
  CHECK(j["strategy"] == "T4");
  CHECK(j["stages"][1]["samples"] == json::array({"r"}));
}
