#include <doctest.h>

#include <algorithm>

#include "goalc/cgm.hpp"
#include "goalc/error.hpp"
#include "goalc/randgen.hpp"
#include "support.hpp"

using namespace goalc;
using namespace goalc::cgm;

namespace {

std::vector<std::string> rules(const std::vector<Violation>& vs) {
  std::vector<std::string> out;
  for (const auto& v : vs) out.push_back(v.rule);
  return out;
}

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
  auto r = rules(vs);
  return std::find(r.begin(), r.end(), rule) != r.end();
}

const char* kTwoSensors = R"({
  "root": "G",
  "nodes": [
    {"id": "G", "kind": "goal", "decomposition": "or", "children": ["S1", "S2"], "dm": ["S1", "S2"]},
    {"id": "S1", "kind": "task", "decomposition": "and", "children": ["S1.1", "S1.2", "S1.3"], "contexts": ["C1"]},
    {"id": "S1.1", "kind": "leaf"}, {"id": "S1.2", "kind": "leaf"}, {"id": "S1.3", "kind": "leaf"},
    {"id": "S2", "kind": "task", "decomposition": "and", "children": ["S2.1", "S2.2"], "contexts": ["C2"]},
    {"id": "S2.1", "kind": "leaf"}, {"id": "S2.2", "kind": "leaf"}
  ],
  "contexts": [{"id": "C1"}, {"id": "C2", "kind": "double", "condition": "battery >= 0.02"}]
})";

}  // namespace

TEST_CASE("bundled BSN model parses with the published structure") {
  const GoalModel& m = testing::bsn();
  CHECK(m.root_id() == "G1");
  REQUIRE(m.node("T1").dm_annotation.has_value());
  CHECK(*m.node("T1").dm_annotation == std::vector<std::string>{"T1.1", "T1.2", "T1.3", "T1.4", "T1.X"});
  CHECK(m.node("T1.X").kind == NodeKind::Placeholder);
  CHECK(m.node("G2").children == std::vector<std::string>{"G3", "G4"});
  CHECK(validate(m).empty());
  CHECK(check_sensor_guideline(m).empty());
  CHECK(m.contexts().size() == 6);
}

TEST_CASE("single leaf model") {
  GoalModel m = parse_model(R"({"root": "T", "nodes": [{"id": "T", "kind": "leaf"}]})");
  CHECK(m.nodes().size() == 1);
  CHECK(m.contexts().empty());
  REQUIRE(m.node("T").leaf_params.has_value());
  CHECK(m.node("T").leaf_params->reliability == "r_T");
  CHECK(m.node("T").leaf_params->frequency == "f_T");
  CHECK(m.node("T").leaf_params->cost == "w_T");
}

TEST_CASE("DM on a leaf is rejected") {
  const char* text = R"({"root": "T", "nodes": [{"id": "T", "kind": "leaf", "dm": ["T"]}]})";
  try {
    parse_model(text);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(has_rule(e.violations(), "dm-on-leaf"));
    CHECK(std::string(e.what()).find("DM on leaf node") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry a byte position") {
  try {
    parse_model("{\"root\": \"T\", \"nodes\": [ }");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() > 0);
  }
}

TEST_CASE("validation rules") {
  SUBCASE("DM child without context") {
    auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "or", "children": ["A", "B"], "dm": ["A", "B"]},
      {"id": "A", "kind": "leaf", "contexts": ["C1"]}, {"id": "B", "kind": "leaf"}],
      "contexts": [{"id": "C1"}]})");
    auto vs = validate(m);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "dm-child-needs-context");
    CHECK(vs[0].node_id == "B");
  }
  SUBCASE("dangling child") {
    auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "and", "children": ["A", "Z"]}, {"id": "A", "kind": "leaf"}]})");
    auto vs = validate(m);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "dangling-child");
  }
  SUBCASE("duplicate id") {
    auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "and", "children": ["A"]}, {"id": "A", "kind": "leaf"}, {"id": "A", "kind": "leaf"}]})");
    CHECK(has_rule(validate(m), "duplicate-id"));
  }
  SUBCASE("unknown context reference") {
    auto m = parse_model_unchecked(R"({"root": "A", "nodes": [{"id": "A", "kind": "leaf", "contexts": ["C9"]}]})");
    CHECK(has_rule(validate(m), "dangling-context"));
  }
  SUBCASE("placeholder id must end in X") {
    auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "and", "children": ["A", "P"]}, {"id": "A", "kind": "leaf"},
      {"id": "P", "kind": "placeholder"}]})");
    CHECK(has_rule(validate(m), "placeholder-suffix"));
  }
  SUBCASE("DM needs an OR node") {
    auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "and", "children": ["A"], "dm": ["A"]},
      {"id": "A", "kind": "leaf", "contexts": ["C1"]}], "contexts": [{"id": "C1"}]})");
    CHECK(has_rule(validate(m), "dm-requires-or"));
  }
  SUBCASE("two parents") {
    auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "and", "children": ["H", "A"]},
      {"id": "H", "decomposition": "and", "children": ["A"]}, {"id": "A", "kind": "leaf"}]})");
    CHECK(has_rule(validate(m), "multiple-parents"));
  }
  SUBCASE("boolean context with condition") {
    auto m = parse_model_unchecked(R"({"root": "A", "nodes": [{"id": "A", "kind": "leaf", "contexts": ["C1"]}],
      "contexts": [{"id": "C1", "kind": "boolean", "condition": "x > 1"}]})");
    CHECK(has_rule(validate(m), "context-condition"));
  }
}

TEST_CASE("validate is pure and ordered by node id then rule") {
  auto m = parse_model_unchecked(R"({"root": "G", "nodes": [
    {"id": "G", "decomposition": "and", "children": ["Z", "Y"], "dm": ["Q"]},
    {"id": "A", "kind": "leaf"}]})");
  auto a = validate(m), b = validate(m);
  CHECK(a == b);
  CHECK(a.size() >= 3);
  CHECK(std::is_sorted(a.begin(), a.end(), [](const Violation& x, const Violation& y) {
    return std::tie(x.node_id, x.rule) < std::tie(y.node_id, y.rule);
  }));
}

TEST_CASE("sensor guideline advisories") {
  auto m = parse_model(kTwoSensors);
  auto adv = check_sensor_guideline(m);
  REQUIRE(adv.size() == 1);
  CHECK(adv[0].node_id == "S2");
  CHECK(check_sensor_guideline(parse_model(R"({"root": "T", "nodes": [{"id": "T", "kind": "leaf"}]})")).empty());
}

TEST_CASE("context definitions") {
  auto m = parse_model(kTwoSensors);
  const ContextDef* c2 = m.find_context("C2");
  REQUIRE(c2);
  CHECK(c2->value_kind == ValueKind::Double);
  REQUIRE(c2->condition.has_value());
  CHECK(c2->condition->holds(0.5));
  CHECK_FALSE(c2->condition->holds(0.01));
  CHECK_THROWS_AS(Comparison::parse("battery ~ 2"), ParseError);
}

TEST_CASE("serialize round trip") {
  CHECK(parse_model(serialize(testing::bsn())) == testing::bsn());
  CHECK(parse_model(serialize(parse_model(kTwoSensors))) == parse_model(kTwoSensors));
  randgen::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    GoalModel m = randgen::random_model(rng);
    CHECK(parse_model(serialize(m)) == m);
  }
}

TEST_CASE("parameter count is 3L + K + placeholders") {
  const GoalModel& m = testing::bsn();
  std::size_t leaves = 0, placeholders = 0;
  for (const auto& [id, n] : m.nodes()) {
    leaves += n.kind == NodeKind::LeafTask;
    placeholders += n.kind == NodeKind::Placeholder;
  }
  CHECK(leaves == 15);
  CHECK(m.parameter_names().size() == 3 * leaves + m.contexts().size() + placeholders);
}

TEST_CASE("subtree queries") {
  const GoalModel& m = testing::bsn();
  auto sub = m.subtree("T1.1");
  REQUIRE(sub.size() == 4);
  CHECK(sub[0]->id == "T1.1");
  CHECK(m.leaves_under("G4").size() == 3);
  CHECK(m.parent_of("T1.11")->id == "T1.1");
  CHECK(m.parent_of("G1") == nullptr);
  GoalModel g3 = m.extract("G3");
  CHECK(g3.root_id() == "G3");
  CHECK(validate(g3).empty());
}
