#include <doctest.h>

#include <cmath>

#include "goalc/compiler.hpp"
#include "goalc/error.hpp"
#include "goalc/naming.hpp"
#include "goalc/oracle.hpp"
#include "goalc/randgen.hpp"
#include "support.hpp"

using namespace goalc;
using sym::Rational;

namespace {

sym::Bindings fill(const cgm::GoalModel& m, double r, double f, double w, double c = 1, double opt = 1) {
  sym::Bindings b;
  for (const auto& name : m.parameter_names()) {
    switch (naming::infer_kind(name)) {
      case ParamKind::Reliability: b[name] = r; break;
      case ParamKind::Frequency: b[name] = f; break;
      case ParamKind::Cost: b[name] = w; break;
      case ParamKind::Context: b[name] = c; break;
      case ParamKind::Opt: b[name] = opt; break;
      case ParamKind::Free: break;
    }
  }
  return b;
}

const char* kAnd3 = R"({"root": "G", "nodes": [
  {"id": "G", "decomposition": "and", "children": ["A", "B", "C"]},
  {"id": "A", "kind": "leaf"}, {"id": "B", "kind": "leaf"}, {"id": "C", "kind": "leaf"}]})";

const char* kOr2 = R"({"root": "G", "nodes": [
  {"id": "G", "decomposition": "or", "children": ["A", "B"]},
  {"id": "A", "kind": "leaf"}, {"id": "B", "kind": "leaf"}]})";

const char* kOr3 = R"({"root": "G", "nodes": [
  {"id": "G", "decomposition": "or", "children": ["A", "B", "C"]},
  {"id": "A", "kind": "leaf"}, {"id": "B", "kind": "leaf"}, {"id": "C", "kind": "leaf"}]})";

}  // namespace

TEST_CASE("leaf outcome distribution") {
  auto o = oracle::leaf_outcomes(1, 0.8, 0.9);
  CHECK(o.success == doctest::Approx(0.72));
  CHECK(o.skipped == doctest::Approx(0.2));
  CHECK(o.failure == doctest::Approx(0.08));
  randgen::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Rational c = randgen::chance(rng, 0.5) ? 1 : 0;
    Rational f(static_cast<long long>(randgen::below(rng, 101)), 100);
    Rational r(static_cast<long long>(randgen::below(rng, 1001)), 1000);
    auto e = oracle::leaf_outcomes_exact(c, f, r);
    CHECK(e.success + e.skipped + e.failure == 1);
    CHECK(e.success == c * f * r);
  }
}

TEST_CASE("single leaf") {
  auto m = cgm::parse_model(R"({"root": "T", "nodes": [{"id": "T", "kind": "leaf"}]})");
  CHECK(oracle::prob_reach(m, "T", {{"r_T", 0.9}, {"f_T", 1}, {"w_T", 2}}) == doctest::Approx(0.9));
  CHECK(oracle::cost_reach(m, "T", {{"r_T", 0.5}, {"f_T", 1}, {"w_T", 2}}) == doctest::Approx(1.0));
}

TEST_CASE("G3 with only the first sensor available") {
  const auto& m = testing::bsn();
  sym::Bindings b = fill(m, 0.95, 1, 0.1, 0, 0);
  b["C_C1"] = 1;
  double oracle_value = oracle::prob_reach(m, "G3", b);
  CHECK(oracle_value == doctest::Approx(0.857375).epsilon(1e-12));
  CHECK(compiler::compose_node_form(m, "G3").P.evaluate(b) == doctest::Approx(oracle_value).epsilon(1e-12));
}

TEST_CASE("AND of three leaves: cost of the all-success path") {
  auto m = cgm::parse_model(kAnd3);
  sym::Bindings b = fill(m, 0.5, 1, 1);
  CHECK(oracle::prob_reach(m, "G", b) == doctest::Approx(0.125));
  CHECK(oracle::cost_reach(m, "G", b) == doctest::Approx(0.375));
  CHECK(oracle::cost_reach(m, "G", b, oracle::CostMode::RunAll) == doctest::Approx(0.375));
  randgen::Rng rng(9);
  auto rep = oracle::check_formula(m, "G", randgen::random_binding(m, rng), 1e-9);
  CHECK(rep.cost_status == "ok");
  CHECK(rep.cost_ok);
}

TEST_CASE("binary OR at unit frequency matches the OR cost row") {
  auto m = cgm::parse_model(kOr2);
  randgen::Rng rng(21);
  auto f = compiler::compose_node_form(m, "G");
  for (int i = 0; i < 100; ++i) {
    sym::Bindings b = randgen::random_binding(m, rng);
    b["f_A"] = b["f_B"] = 1;
    CHECK(std::abs(f.Cost.evaluate(b) - oracle::cost_reach(m, "G", b)) <= 1e-9);
    CHECK(oracle::cost_comparable(m, "G", b));
  }
}

TEST_CASE("ternary OR with partial frequencies is not cost-comparable") {
  auto m = cgm::parse_model(kOr3);
  sym::Bindings b = fill(m, 0.9, 0.5, 1);
  CHECK_FALSE(oracle::cost_comparable(m, "G", b));
  auto rep = oracle::check_formula(m, "G", b, 1e-9);
  CHECK(rep.cost_status == "not-applicable");
  CHECK(rep.reliability_ok);
}

TEST_CASE("all-skipped corner equals the formula") {
  randgen::Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    cgm::GoalModel m = randgen::random_model(rng);
    sym::Bindings b = randgen::random_binding(m, rng);
    for (auto& [name, v] : b)
      if (naming::infer_kind(name) == ParamKind::Frequency) v = 0;
    double formula = compiler::compose_node_form(m, m.root_id()).P.evaluate(b);
    CHECK(std::abs(formula - oracle::prob_reach(m, m.root_id(), b)) <= 1e-12);
  }
}

TEST_CASE("DM with every context off") {
  auto m = cgm::parse_model(R"({"root": "G", "nodes": [
    {"id": "G", "decomposition": "or", "children": ["A", "B"], "dm": ["A", "B"]},
    {"id": "A", "kind": "leaf", "contexts": ["C1"]}, {"id": "B", "kind": "leaf", "contexts": ["C2"]}],
    "contexts": [{"id": "C1"}, {"id": "C2"}]})");
  sym::Bindings b = fill(m, 0.9, 0.9, 1, 0);
  double o = oracle::prob_reach(m, "G", b);
  CHECK(o == compiler::compose_node_form(m, "G").P.evaluate(b));
  CHECK(o == 0.0);
}

TEST_CASE("random models: reliability agrees, restricted cost agrees") {
  randgen::Rng rng(41);
  std::size_t cost_checked = 0;
  for (int i = 0; i < 200; ++i) {
    cgm::GoalModel m = randgen::random_model(rng);
    auto forms = compiler::compose_node_form(m, m.root_id());
    for (int k = 0; k < 10; ++k) {
      auto rep = oracle::check_formula(m, forms, randgen::random_binding(m, rng), 1e-9);
      CHECK(rep.reliability_ok);
      CHECK(rep.cost_status != "mismatch");
      cost_checked += rep.cost_status == "ok";
    }
  }
  CHECK(cost_checked > 100);
}

TEST_CASE("prob_reach is monotone in reliabilities and frequencies") {
  randgen::Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    cgm::GoalModel m = randgen::random_model(rng);
    sym::Bindings b = randgen::random_binding(m, rng);
    double base = oracle::prob_reach(m, m.root_id(), b);
    for (const auto& [name, v] : b) {
      ParamKind k = naming::infer_kind(name);
      if (k != ParamKind::Reliability) continue;
      sym::Bindings up = b;
      up[name] = std::min(1.0, v + 0.3);
      CHECK(oracle::prob_reach(m, m.root_id(), up) >= base - 1e-12);
    }
  }
}

TEST_CASE("limits and missing bindings") {
  auto m = cgm::parse_model(kAnd3);
  CHECK_THROWS_AS(oracle::prob_reach(m, "G", {{"r_A", 1}}), MissingBinding);
  std::string nodes, kids;
  for (int i = 0; i < 21; ++i) {
    std::string id = "L" + std::to_string(i);
    kids += (i ? ", \"" : "\"") + id + "\"";
    nodes += R"(, {"id": ")" + id + R"(", "kind": "leaf"})";
  }
  auto big = cgm::parse_model(R"({"root": "G", "nodes": [{"id": "G", "decomposition": "and", "children": [)" + kids +
                              "]}" + nodes + "]}");
  CHECK_THROWS_AS(oracle::prob_reach(big, "G", fill(big, 1, 1, 1)), DomainError);
}
