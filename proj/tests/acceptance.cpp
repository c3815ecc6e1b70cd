// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Thresholds are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "goalc/bsnsim.hpp"
#include "goalc/compiler.hpp"
#include "goalc/manifest.hpp"
#include "goalc/naming.hpp"
#include "goalc/oracle.hpp"
#include "goalc/prismgen.hpp"
#include "goalc/randgen.hpp"

using namespace goalc;
using Clock = std::chrono::steady_clock;
using sym::SymExpr;

namespace {

constexpr double kTol = 1e-9;
constexpr double kOracleSeconds = 60;
constexpr double kCompileSeconds = 1.0;
constexpr double kEvalMs = 100;
constexpr std::size_t kMaxFormulaBytes = 5 * 22 * 1024;
constexpr double kMinInBand = 0.70;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <class F>
void criterion(const std::string& name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(false, name, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string data(const std::string& rel) { return std::string(GOALC_DATA_DIR) + "/" + rel; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, sym::Rational> fix(std::initializer_list<std::pair<const char*, int>> kv) {
  std::map<std::string, sym::Rational> out;
  for (const auto& [k, v] : kv) out[k] = v;
  return out;
}

// Random trees for the cost class: nested AND refinements, or a binary OR
// (optionally DM-annotated) over AND operands.
struct TreeBuilder {
  randgen::Rng& rng;
  std::string nodes;
  int next = 0;
  int leaves = 0;

  std::string context(bool force) {
    if (!force && !randgen::chance(rng, 0.4)) return "";
    return R"(, "contexts": ["C)" + std::to_string(randgen::below(rng, 3) + 1) + "\"]";
  }

  std::string leaf(bool force_context = false) {
    std::string id = "L" + std::to_string(++next);
    ++leaves;
    nodes += R"(, {"id": ")" + id + R"(", "kind": "leaf")" + context(force_context) + "}";
    return id;
  }

  // DM children must carry a context, hence force_context.
  std::string and_tree(int budget, bool force_context = false) {
    if (budget <= 1) return leaf(force_context);
    std::string id = "A" + std::to_string(++next);
    int n = 2 + static_cast<int>(randgen::below(rng, 2));
    std::string kids;
    for (int i = 0; i < n && leaves < 6; ++i) {
      int share = std::max(1, budget / n);
      std::string kid = randgen::chance(rng, 0.3) && share > 1 ? and_tree(share) : leaf();
      kids += (kids.empty() ? "\"" : ", \"") + kid + "\"";
    }
    nodes += R"(, {"id": ")" + id + R"(", "decomposition": "and", "children": [)" + kids + "]" +
             context(force_context) + "}";
    return id;
  }

  cgm::GoalModel finish(const std::string& root) {
    std::string text = R"({"root": ")" + root + R"(", "nodes": [)" + nodes.substr(2) +
                       R"(], "contexts": [{"id": "C1"}, {"id": "C2"}, {"id": "C3"}]})";
    return cgm::parse_model(text);
  }
};

cgm::GoalModel random_and_tree(randgen::Rng& rng) {
  TreeBuilder b{rng};
  std::string root = b.and_tree(2 + static_cast<int>(randgen::below(rng, 5)));
  return b.finish(root);
}

cgm::GoalModel random_binary_or(randgen::Rng& rng, bool dm) {
  TreeBuilder b{rng};
  std::string x = randgen::chance(rng, 0.5) ? b.and_tree(3, dm) : b.leaf(dm);
  std::string y = randgen::chance(rng, 0.5) ? b.and_tree(3, dm) : b.leaf(dm);
  std::string kids = "\"" + x + "\", \"" + y + "\"";
  b.nodes += R"(, {"id": "G", "decomposition": "or", "children": [)" + kids + "]" +
             (dm ? ", \"dm\": [" + kids + "]" : std::string()) + "}";
  return b.finish("G");
}

sym::Bindings bsn_binding(const cgm::GoalModel& m) {
  sym::Bindings b;
  for (const auto& name : m.parameter_names()) {
    switch (naming::infer_kind(name)) {
      case ParamKind::Reliability: b[name] = 0.95; break;
      case ParamKind::Frequency: b[name] = 1.0; break;
      case ParamKind::Cost: b[name] = 0.01; break;
      case ParamKind::Context: b[name] = 1.0; break;
      case ParamKind::Opt: b[name] = 0.0; break;
      case ParamKind::Free: break;
    }
  }
  return b;
}

std::string chain(std::initializer_list<const char*> leaves) {
  std::string out;
  for (const char* l : leaves) out += std::string(out.empty() ? "" : "*") + "r_T1_" + l + "*f_T1_" + l;
  return out;
}

cgm::GoalModel flat(const char* decomposition, int leaves, bool contexts, bool dm) {
  std::string nodes, kids, ctx;
  for (int i = 1; i <= leaves; ++i) {
    std::string id = "L" + std::to_string(i);
    kids += (i > 1 ? ", \"" : "\"") + id + "\"";
    nodes += R"(, {"id": ")" + id + R"(", "kind": "leaf")" +
             (contexts ? R"(, "contexts": ["C)" + std::to_string(i) + "\"]" : std::string()) + "}";
    if (contexts) ctx += std::string(i > 1 ? ", " : "") + R"({"id": "C)" + std::to_string(i) + "\"}";
  }
  return cgm::parse_model(R"({"root": "G", "nodes": [{"id": "G", "decomposition": ")" + std::string(decomposition) +
                          R"(", "children": [)" + kids + "]" + (dm ? ", \"dm\": [" + kids + "]" : std::string()) +
                          "}" + nodes + "], \"contexts\": [" + ctx + "]}");
}

}  // namespace

int main() {
  const cgm::GoalModel bsn = cgm::load_model(data("bsn.json"));

  criterion("oracle-reliability", [] {
    auto t0 = Clock::now();
    randgen::Rng rng(1);
    double worst = 0;
    std::size_t checked = 0;
    for (int i = 0; i < 1000; ++i) {
      cgm::GoalModel m = randgen::random_model(rng);
      auto forms = compiler::compose_node_form(m, m.root_id());
      for (int k = 0; k < 10; ++k) {
        auto rep = oracle::check_formula(m, forms, randgen::random_binding(m, rng), kTol);
        worst = std::max(worst, rep.reliability_delta);
        ++checked;
      }
    }
    double s = seconds_since(t0);
    report(worst <= kTol && s < kOracleSeconds, "oracle-reliability",
           std::to_string(checked) + " bindings, max delta " + fmt("%.3g", worst) + ", " + fmt("%.2f", s) + " s");
  });

  criterion("oracle-cost", [] {
    randgen::Rng rng(2);
    double worst = 0;
    std::size_t checked = 0, skipped = 0;
    auto run = [&](const cgm::GoalModel& m, bool unit_frequency) {
      auto forms = compiler::compose_node_form(m, m.root_id());
      for (int k = 0; k < 10; ++k) {
        sym::Bindings b = randgen::random_binding(m, rng);
        if (unit_frequency)
          for (auto& [name, v] : b)
            if (naming::infer_kind(name) == ParamKind::Frequency) v = 1.0;
        auto rep = oracle::check_formula(m, forms, b, kTol);
        if (rep.cost_status == "not-applicable") {
          ++skipped;
          continue;
        }
        worst = std::max(worst, rep.cost_delta);
        ++checked;
      }
    };
    for (int i = 0; i < 400; ++i) run(random_and_tree(rng), false);
    for (int i = 0; i < 300; ++i) run(random_binary_or(rng, false), true);
    for (int i = 0; i < 300; ++i) run(random_binary_or(rng, true), true);
    report(worst <= kTol && skipped == 0, "oracle-cost",
           std::to_string(checked) + " bindings (AND trees, binary OR, binary DM), max delta " + fmt("%.3g", worst) +
               ", " + std::to_string(skipped) + " outside the class");
  });

  criterion("context-table", [&] {
    SymExpr p = compiler::compose_node_form(bsn, "G3").P.substitute(
        fix({{"C_C3", 0}, {"C_C4", 0}, {"C_C5", 0}, {"OPT_T1_X", 0}}));
    std::string a = chain({"11", "12", "13"}), b = chain({"21", "22", "23"});
    SymExpr row11 = SymExpr::parse("-" + a + "*C_C1*" + b + "*C_C2 + " + a + "*C_C1 + " + b + "*C_C2");
    SymExpr row10 = SymExpr::parse(a + "*C_C1");
    SymExpr row01 = SymExpr::parse(b + "*C_C2");
    bool ok11 = p.substitute(fix({{"C_C1", 1}, {"C_C2", 1}})) == row11.substitute(fix({{"C_C1", 1}, {"C_C2", 1}}));
    bool ok10 = p.substitute(fix({{"C_C2", 0}})) == row10;
    bool ok01 = p.substitute(fix({{"C_C1", 0}})) == row01;
    bool symbolic = p == row11;
    report(ok11 && ok10 && ok01 && symbolic, "context-table",
           std::string("rows (1,1) ") + (ok11 && symbolic ? "equal" : "differ") + ", (1,0) " +
               (ok10 ? "equal" : "differ") + ", (0,1) " + (ok01 ? "equal" : "differ"));
  });

  criterion("param-growth", [] {
    struct Case {
      const char* label;
      const char* decomposition;
      bool contexts, dm;
      std::size_t per_r, per_c;
    };
    const Case cases[] = {{"AND", "and", false, false, 2, 3},
                          {"OR", "or", false, false, 2, 3},
                          {"AND+ctx", "and", true, false, 3, 4},
                          {"OR+ctx", "or", true, false, 3, 4},
                          {"DM", "or", true, true, 3, 4}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
      bool case_ok = true;
      for (int n = 1; n <= 6; ++n) {
        auto g = compiler::param_growth_report(flat(c.decomposition, n, c.contexts, c.dm)).at("G");
        case_ok = case_ok && g.reliability == c.per_r * n && g.cost == c.per_c * n;
      }
      ok = ok && case_ok;
      detail += std::string(detail.empty() ? "" : ", ") + c.label + " " + std::to_string(c.per_r) + "/" +
                std::to_string(c.per_c) + (case_ok ? "" : " (mismatch)");
    }
    report(ok, "param-growth", detail + " per leaf, 1..6 leaves");
  });

  criterion("dm-single-operand", [] {
    auto m = cgm::parse_model(R"({"root": "G", "nodes": [
      {"id": "G", "decomposition": "or", "children": ["N1"], "dm": ["N1"]},
      {"id": "N1", "kind": "leaf", "contexts": ["C1"]}], "contexts": [{"id": "C1"}]})");
    SymExpr p = compiler::compose_node_form(m, "G").P;
    report(p == SymExpr::parse("C_C1*r_N1*f_N1"), "dm-single-operand", "P = " + p.render());
  });

  criterion("performance", [&] {
    auto t0 = Clock::now();
    cgm::GoalModel m = cgm::load_model(data("bsn.json"));
    auto all = compiler::compile(m, m.root_id());
    double compile_s = seconds_since(t0);
    const SymExpr& cost = all.at(m.root_id()).Cost;
    sym::Bindings b = bsn_binding(m);
    auto t1 = Clock::now();
    double v = cost.evaluate(b);
    double eval_ms = seconds_since(t1) * 1000;
    std::size_t bytes = cost.size_bytes() + all.at(m.root_id()).P.size_bytes();
    report(compile_s < kCompileSeconds && eval_ms < kEvalMs && bytes <= kMaxFormulaBytes && std::isfinite(v),
           "performance",
           "compile " + fmt("%.3f", compile_s) + " s, cost eval " + fmt("%.3f", eval_ms) + " ms, formula text " +
               std::to_string(bytes) + " bytes");
  });

  criterion("prism-emission", [&] {
    std::string golden = GOALC_GOLDEN_DIR;
    auto dm2 = prismgen::emit(cgm::load_model(golden + "/dm2.json"), "G");
    bool bytes_ok = dm2.model == slurp(golden + "/dm2.pm") && dm2.properties == slurp(golden + "/dm2.pctl");
    auto t1 = prismgen::emit(bsn, "T1");
    report(bytes_ok && t1.ctx_constants == 31, "prism-emission",
           std::string("golden ") + (bytes_ok ? "identical" : "differs") + ", T1 CTX constants " +
               std::to_string(t1.ctx_constants));
  });

  criterion("closed-loop", [&] {
    auto policy = runtime::Policy::load(data("policy.json"), bsn);
    const auto& props = policy.properties;
    double r_set = props[0].setpoint, r_margin = props[0].margin;
    double c_set = props[1].setpoint, c_margin = props[1].margin;
    bool ok = true;
    std::string detail;
    for (const char* name : {"1a", "1b", "1c"}) {
      auto config = bsnsim::ScenarioConfig::load(data(std::string("scenarios/") + name + ".json"), bsn);
      auto tamed = bsnsim::run(config, policy, bsn, bsnsim::Mode::Tamed);
      auto untamed = bsnsim::run(config, policy, bsn, bsnsim::Mode::Untamed);
      auto m = bsnsim::metrics(tamed, untamed, r_set, c_set);
      double band = bsnsim::in_band_fraction(tamed, r_set, r_margin, c_set, c_margin, config.transient);
      ok = ok && m.e_r > 1 && m.e_c > 1 && band >= kMinInBand;
      detail += std::string(detail.empty() ? "" : "; ") + name + " e_r " + bsnsim::format_ratio(m.e_r) + " e_c " +
                bsnsim::format_ratio(m.e_c) + " in-band " + fmt("%.1f%%", band * 100);
    }
    report(ok, "closed-loop", detail);
  });

  criterion("determinism", [&] {
    auto policy = runtime::Policy::load(data("policy.json"), bsn);
    auto config = bsnsim::ScenarioConfig::load(data("scenarios/1c.json"), bsn);
    auto h1 = fnv1a(bsnsim::run(config, policy, bsn, bsnsim::Mode::Tamed).to_csv());
    auto h2 = fnv1a(bsnsim::run(config, policy, bsn, bsnsim::Mode::Tamed).to_csv());
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h1));
    report(h1 == h2, "determinism", std::string("CSV hash ") + buf + (h1 == h2 ? " twice" : " then differs"));
  });

  return failures == 0 ? 0 : 1;
}
