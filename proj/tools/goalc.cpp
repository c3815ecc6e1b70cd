// goalc: compile, emit-prism, eval, verify, simulate, report.
//
// Exit codes: 0 success, 1 domain or validation error, 2 IO or usage error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "goalc/bsnsim.hpp"
#include "goalc/cgm.hpp"
#include "goalc/compiler.hpp"
#include "goalc/manifest.hpp"
#include "goalc/oracle.hpp"
#include "goalc/prismgen.hpp"
#include "goalc/randgen.hpp"
#include "goalc/runtime.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace goalc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") std::cout << text;
  else write_file(out, text);
}

void manifest(const std::string& command, const std::vector<std::string>& inputs,
              std::optional<std::uint64_t> seed, const std::vector<std::string>& outputs) {
  if (outputs.empty()) return;
  RunManifest m;
  m.command = command;
  m.inputs = inputs;
  m.seed = seed;
  m.outputs = outputs;
  m.config_hash = hash_inputs(inputs);
  m.write_next_to(outputs.front());
}

json number_or_inf(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

// --- compile ---------------------------------------------------------------

struct CompileArgs {
  std::string model;
  std::string goal;
  std::string out;
};

int run_compile(const CompileArgs& a) {
  cgm::GoalModel model = cgm::load_model(a.model);
  std::string goal = a.goal.empty() ? model.root_id() : a.goal;
  if (!model.contains(goal)) throw DomainError("unknown goal '" + goal + "'");
  auto forms = compiler::compile(model, goal);
  json doc = json::object();
  for (const cgm::Node* n : model.subtree(goal)) {
    const auto& f = forms.at(n->id);
    std::set<std::string> params = f.P.parameter_names();
    for (const auto& p : f.Cost.parameter_names()) params.insert(p);
    doc[n->id] = {{"reliability", f.P.render()}, {"cost", f.Cost.render()}, {"params", params}};
  }
  emit(a.out, doc.dump(2) + "\n");
  manifest("compile", {a.model}, std::nullopt, a.out.empty() || a.out == "-" ? std::vector<std::string>{}
                                                                                : std::vector{a.out});
  return 0;
}

// --- emit-prism ------------------------------------------------------------

struct EmitArgs {
  std::string model;
  std::string goal;
  std::string out_dir = ".";
  std::string name;
};

int run_emit(const EmitArgs& a) {
  cgm::GoalModel model = cgm::load_model(a.model);
  std::string goal = a.goal.empty() ? model.root_id() : a.goal;
  if (!model.contains(goal)) throw DomainError("unknown goal '" + goal + "'");
  prismgen::Emission e = prismgen::emit(model, goal);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + a.out_dir + "'");
  std::string stem = a.name.empty() ? fs::path(a.model).stem().string() : a.name;
  std::string pm = (fs::path(a.out_dir) / (stem + ".pm")).string();
  std::string pctl = (fs::path(a.out_dir) / (stem + ".pctl")).string();
  write_file(pm, e.model);
  write_file(pctl, e.properties);
  manifest("emit-prism", {a.model}, std::nullopt, {pm, pctl});
  json info = {{"model", pm}, {"properties", pctl}, {"modules", e.modules}, {"ctx_constants", e.ctx_constants}};
  std::cout << info.dump(2) << "\n";
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string formulas;
  std::string bind;
  std::string node;
  bool time = false;
};

int run_eval(const EvalArgs& a) {
  json doc;
  try {
    doc = json::parse(slurp(a.formulas));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed formula file: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || doc.empty()) throw DomainError("formula file holds no nodes");
  std::string node = a.node.empty() ? doc.begin().key() : a.node;
  if (!doc.contains(node)) throw DomainError("formula file has no node '" + node + "'");

  sym::Bindings binding;
  json jb;
  try {
    jb = json::parse(slurp(a.bind));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed binding file: ") + e.what(), e.byte);
  }
  for (const auto& [k, v] : jb.items()) {
    if (!v.is_number()) throw DomainError("binding for '" + k + "' is not a number");
    binding[k] = v.get<double>();
  }

  auto start = std::chrono::steady_clock::now();
  sym::SymExpr rel = sym::SymExpr::parse(doc[node].at("reliability").get<std::string>());
  sym::SymExpr cost = sym::SymExpr::parse(doc[node].at("cost").get<std::string>());
  double r = rel.evaluate(binding);
  double c = cost.evaluate(binding);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  json out = {{"node", node}, {"reliability", r}, {"cost", c}};
  if (a.time) out["eval_ms"] = ms;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string model;
  std::string goal;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t random_models = 0;
  double tol = 1e-9;
  bool details = false;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  if (a.model.empty() && a.random_models == 0) throw DomainError("give a model file or --random-models N");
  randgen::Rng rng(a.seed);
  std::vector<cgm::GoalModel> models;
  if (!a.model.empty()) models.push_back(cgm::load_model(a.model));
  for (std::size_t i = 0; i < a.random_models; ++i) models.push_back(randgen::random_model(rng));

  std::size_t rel_checked = 0, rel_bad = 0, cost_checked = 0, cost_bad = 0, cost_na = 0;
  double rel_max = 0, cost_max = 0;
  json details = json::array();
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const cgm::GoalModel& m = models[mi];
    std::string goal = a.goal.empty() || mi > 0 || a.model.empty() ? m.root_id() : a.goal;
    if (!m.contains(goal)) throw DomainError("unknown goal '" + goal + "'");
    compiler::NodeForms forms = compiler::compose_node_form(m, goal);
    for (std::size_t t = 0; t < a.trials; ++t) {
      sym::Bindings b = randgen::random_binding(m, rng);
      oracle::CheckReport r = oracle::check_formula(m, forms, b, a.tol);
      ++rel_checked;
      rel_max = std::max(rel_max, r.reliability_delta);
      if (!r.reliability_ok) ++rel_bad;
      if (r.cost_status == "not-applicable") {
        ++cost_na;
      } else {
        ++cost_checked;
        cost_max = std::max(cost_max, r.cost_delta);
        if (!r.cost_ok) ++cost_bad;
      }
      if (a.details || !r.reliability_ok || r.cost_status == "mismatch") {
        json d = {{"model", mi},
                  {"trial", t},
                  {"reliability", {{"formula", r.formula_reliability},
                                   {"oracle", r.oracle_reliability},
                                   {"delta", r.reliability_delta},
                                   {"ok", r.reliability_ok}}},
                  {"cost", {{"status", r.cost_status},
                            {"formula", r.formula_cost},
                            {"oracle", r.oracle_cost},
                            {"delta", r.cost_delta}}}};
        if (!r.reliability_ok || r.cost_status == "mismatch") d["model_json"] = json::parse(cgm::serialize(m));
        details.push_back(std::move(d));
      }
    }
  }
  json report = {{"seed", a.seed},
                 {"models", models.size()},
                 {"trials_per_model", a.trials},
                 {"tolerance", a.tol},
                 {"reliability", {{"checked", rel_checked}, {"mismatches", rel_bad}, {"max_delta", rel_max}}},
                 {"cost",
                  {{"checked", cost_checked},
                   {"mismatches", cost_bad},
                   {"not_applicable", cost_na},
                   {"max_delta", cost_max}}},
                 {"bindings", details}};
  emit(a.out, report.dump(2) + "\n");
  std::vector<std::string> inputs;
  if (!a.model.empty()) inputs.push_back(a.model);
  manifest("verify", inputs, a.seed, a.out.empty() || a.out == "-" ? std::vector<std::string>{}
                                                                   : std::vector{a.out});
  return rel_bad + cost_bad == 0 ? 0 : 1;
}

// --- simulate / report -------------------------------------------------------

struct SimulateArgs {
  std::string model;
  std::string policy;
  std::string scenario;
  std::string mode = "tamed";
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  cgm::GoalModel model = cgm::load_model(a.model);
  runtime::Policy policy = runtime::Policy::load(a.policy, model);
  bsnsim::ScenarioConfig config = bsnsim::ScenarioConfig::load(a.scenario, model);
  if (a.seed) config.seed = *a.seed;
  bsnsim::TimeSeries ts = bsnsim::run(config, policy, model, bsnsim::parse_mode(a.mode));
  emit(a.out, ts.to_csv());
  manifest("simulate --mode " + a.mode, {a.model, a.policy, a.scenario}, config.seed,
           a.out.empty() || a.out == "-" ? std::vector<std::string>{} : std::vector{a.out});
  return 0;
}

struct ReportArgs {
  std::string tamed;
  std::string untamed;
  std::string model;
  std::string policy;
  double reliability_setpoint = 0.90;
  double reliability_margin = 0.02;
  double cost_setpoint = 0.47;
  double cost_margin = 0.02;
  double transient = 30;
};

int run_report(ReportArgs a) {
  if (!a.policy.empty()) {
    if (a.model.empty()) throw DomainError("--policy needs --model");
    cgm::GoalModel model = cgm::load_model(a.model);
    runtime::Policy policy = runtime::Policy::load(a.policy, model);
    bool rel = false, cost = false;
    for (const auto& p : policy.properties) {
      if (p.metric == runtime::Metric::Reliability && !rel) {
        a.reliability_setpoint = p.setpoint;
        a.reliability_margin = p.margin;
        rel = true;
      } else if (p.metric == runtime::Metric::Cost && !cost) {
        a.cost_setpoint = p.setpoint;
        a.cost_margin = p.margin;
        cost = true;
      }
    }
  }
  auto tamed = bsnsim::TimeSeries::from_csv(slurp(a.tamed));
  auto untamed = bsnsim::TimeSeries::from_csv(slurp(a.untamed));
  bsnsim::Metrics m = bsnsim::metrics(tamed, untamed, a.reliability_setpoint, a.cost_setpoint);
  json out = {{"rows", tamed.rows.size()},
              {"reliability_setpoint", a.reliability_setpoint},
              {"cost_setpoint", a.cost_setpoint},
              {"d_tamed_reliability", m.d_tamed_reliability},
              {"d_untamed_reliability", m.d_untamed_reliability},
              {"e_r", number_or_inf(m.e_r)},
              {"d_tamed_cost", m.d_tamed_cost},
              {"d_untamed_cost", m.d_untamed_cost},
              {"e_c", number_or_inf(m.e_c)},
              {"in_band_tamed", bsnsim::in_band_fraction(tamed, a.reliability_setpoint, a.reliability_margin,
                                                         a.cost_setpoint, a.cost_margin, a.transient)},
              {"in_band_untamed", bsnsim::in_band_fraction(untamed, a.reliability_setpoint, a.reliability_margin,
                                                           a.cost_setpoint, a.cost_margin, a.transient)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const cgm::ModelError& e) {
    std::cerr << "goalc: invalid model\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.node_id << ": " << v.rule << ": " << v.message << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "goalc: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "goalc: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "goalc: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-model formula compiler and runtime"};
  app.set_version_flag("--version", std::string(GOALC_VERSION));
  app.require_subcommand(1);

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "Compile reliability and cost formulae for a goal subtree");
  compile->add_option("model", ca.model, "CGM JSON file")->required();
  compile->add_option("--goal", ca.goal, "Goal node (default: root)");
  compile->add_option("--out", ca.out, "Output JSON (default: stdout)");

  EmitArgs ea;
  auto* emit_cmd = app.add_subcommand("emit-prism", "Write PRISM model and properties");
  emit_cmd->add_option("model", ea.model, "CGM JSON file")->required();
  emit_cmd->add_option("--goal", ea.goal, "Goal node (default: root)");
  emit_cmd->add_option("--out-dir", ea.out_dir, "Output directory");
  emit_cmd->add_option("--name", ea.name, "Output file stem (default: model file stem)");

  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "Evaluate compiled formulae under a binding");
  eval->add_option("formulas", va.formulas, "Formula JSON written by compile")->required();
  eval->add_option("--bind", va.bind, "JSON object of parameter values")->required();
  eval->add_option("--node", va.node, "Node to evaluate (default: first in file)");
  eval->add_flag("--time", va.time, "Report evaluation wall time in milliseconds");

  VerifyArgs ra;
  auto* verify = app.add_subcommand("verify", "Compare formulae with the brute-force oracle");
  verify->add_option("model", ra.model, "CGM JSON file");
  verify->add_option("--goal", ra.goal, "Goal node (default: root)");
  verify->add_option("--trials", ra.trials, "Random bindings per model");
  verify->add_option("--seed", ra.seed, "Random seed");
  verify->add_option("--random-models", ra.random_models, "Also check this many random models");
  verify->add_option("--tol", ra.tol, "Absolute tolerance");
  verify->add_flag("--details", ra.details, "List every binding in the report");
  verify->add_option("--out", ra.out, "Output JSON (default: stdout)");

  SimulateArgs sa;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario");
  simulate->add_option("--model", sa.model, "CGM JSON file")->required();
  simulate->add_option("--policy", sa.policy, "Policy JSON file")->required();
  simulate->add_option("--scenario", sa.scenario, "Scenario JSON file")->required();
  simulate->add_option("--mode", sa.mode, "tamed or untamed")->check(CLI::IsMember({"tamed", "untamed"}));
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--out", sa.out, "Output CSV (default: stdout)");

  ReportArgs pa;
  auto* report = app.add_subcommand("report", "Compare tamed and untamed time series");
  report->add_option("tamed", pa.tamed, "Tamed CSV")->required();
  report->add_option("untamed", pa.untamed, "Untamed CSV")->required();
  report->add_option("--model", pa.model, "CGM JSON file (with --policy)");
  report->add_option("--policy", pa.policy, "Take setpoints and margins from this policy");
  report->add_option("--reliability-setpoint", pa.reliability_setpoint);
  report->add_option("--reliability-margin", pa.reliability_margin);
  report->add_option("--cost-setpoint", pa.cost_setpoint);
  report->add_option("--cost-margin", pa.cost_margin);
  report->add_option("--transient", pa.transient, "Ignore rows up to this time for in-band fractions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*compile) return guarded([&] { return run_compile(ca); });
  if (*emit_cmd) return guarded([&] { return run_emit(ea); });
  if (*eval) return guarded([&] { return run_eval(va); });
  if (*verify) return guarded([&] { return run_verify(ra); });
  if (*simulate) {
    if (*seed_opt) sa.seed = seed;
    return guarded([&] { return run_simulate(sa); });
  }
  if (*report) return guarded([&] { return run_report(pa); });
  return 2;
}
