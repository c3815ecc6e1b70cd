#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "goalc/bsnsim.hpp"
#include "goalc/cgm.hpp"
#include "goalc/compiler.hpp"
#include "goalc/error.hpp"
#include "goalc/oracle.hpp"
#include "goalc/prismgen.hpp"
#include "goalc/runtime.hpp"

namespace py = pybind11;
using namespace goalc;

namespace {

std::string goal_or_root(const cgm::GoalModel& m, const std::optional<std::string>& goal) {
  return goal ? *goal : m.root_id();
}

py::dict compile_dict(const cgm::GoalModel& m, const std::optional<std::string>& goal) {
  std::string g = goal_or_root(m, goal);
  auto forms = compiler::compile(m, g);
  py::dict out;
  for (const cgm::Node* n : m.subtree(g)) {
    const auto& f = forms.at(n->id);
    py::dict entry;
    entry["reliability"] = f.P.render();
    entry["cost"] = f.Cost.render();
    out[py::str(n->id)] = entry;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_goalc, m) {
  m.doc() = "Goal-model reliability and cost formulae, PRISM emission and BSN simulation";
  m.attr("__version__") = GOALC_VERSION;

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<DomainError>(m, "DomainError", error);

  py::class_<sym::SymExpr>(m, "Formula")
      .def(py::init([](const std::string& text) { return sym::SymExpr::parse(text); }), py::arg("text"))
      .def("evaluate", &sym::SymExpr::evaluate, py::arg("bindings"))
      .def("substitute",
           [](const sym::SymExpr& e, const std::map<std::string, double>& values) { return e.substitute(values); })
      .def_property_readonly("parameters", &sym::SymExpr::parameter_names)
      .def_property_readonly("size_bytes", &sym::SymExpr::size_bytes)
      .def("__eq__", [](const sym::SymExpr& a, const sym::SymExpr& b) { return a == b; })
      .def("__str__", &sym::SymExpr::render)
      .def("__repr__", [](const sym::SymExpr& e) { return "Formula('" + e.render() + "')"; });

  py::class_<cgm::GoalModel>(m, "GoalModel")
      .def_property_readonly("root", &cgm::GoalModel::root_id)
      .def_property_readonly("node_ids", &cgm::GoalModel::declaration_order)
      .def_property_readonly("parameters", &cgm::GoalModel::parameter_names)
      .def("to_json", [](const cgm::GoalModel& g) { return cgm::serialize(g); });

  m.def("parse_model", [](const std::string& text) { return cgm::parse_model(text); }, py::arg("text"));
  m.def("load_model", [](const std::string& path) { return cgm::load_model(path); }, py::arg("path"));

  m.def("compile", &compile_dict, py::arg("model"), py::arg("goal") = py::none(),
        "Reliability and cost formula text for every node of the subtree.");
  m.def(
      "formulas",
      [](const cgm::GoalModel& g, const std::optional<std::string>& goal) {
        auto f = compiler::compose_node_form(g, goal_or_root(g, goal));
        return py::make_tuple(f.P, f.Cost);
      },
      py::arg("model"), py::arg("goal") = py::none(), "(reliability, cost) formulae of one node.");

  m.def(
      "emit_prism",
      [](const cgm::GoalModel& g, const std::optional<std::string>& goal) {
        auto e = prismgen::emit(g, goal_or_root(g, goal));
        return py::make_tuple(e.model, e.properties);
      },
      py::arg("model"), py::arg("goal") = py::none());

  m.def(
      "oracle_reliability",
      [](const cgm::GoalModel& g, const sym::Bindings& b, const std::optional<std::string>& goal) {
        return oracle::prob_reach(g, goal_or_root(g, goal), b);
      },
      py::arg("model"), py::arg("bindings"), py::arg("goal") = py::none());
  m.def(
      "oracle_cost",
      [](const cgm::GoalModel& g, const sym::Bindings& b, const std::optional<std::string>& goal) {
        return oracle::cost_reach(g, goal_or_root(g, goal), b);
      },
      py::arg("model"), py::arg("bindings"), py::arg("goal") = py::none());

  m.def(
      "simulate",
      [](const cgm::GoalModel& g, const std::string& policy, const std::string& scenario, const std::string& mode,
         std::optional<std::uint64_t> seed) {
        auto p = runtime::Policy::load(policy, g);
        auto config = bsnsim::ScenarioConfig::load(scenario, g);
        if (seed) config.seed = *seed;
        py::gil_scoped_release release;
        return bsnsim::run(config, p, g, bsnsim::parse_mode(mode)).to_csv();
      },
      py::arg("model"), py::arg("policy"), py::arg("scenario"), py::arg("mode") = "tamed",
      py::arg("seed") = py::none(), "Runs a closed-loop scenario and returns the CSV trace.");

  m.def(
      "compare",
      [](const std::string& tamed_csv, const std::string& untamed_csv, double reliability_setpoint,
         double cost_setpoint) {
        auto r = bsnsim::metrics(bsnsim::TimeSeries::from_csv(tamed_csv), bsnsim::TimeSeries::from_csv(untamed_csv),
                                 reliability_setpoint, cost_setpoint);
        py::dict out;
        out["d_tamed_reliability"] = r.d_tamed_reliability;
        out["d_untamed_reliability"] = r.d_untamed_reliability;
        out["e_r"] = r.e_r;
        out["d_tamed_cost"] = r.d_tamed_cost;
        out["d_untamed_cost"] = r.d_untamed_cost;
        out["e_c"] = r.e_c;
        return out;
      },
      py::arg("tamed_csv"), py::arg("untamed_csv"), py::arg("reliability_setpoint") = 0.90,
      py::arg("cost_setpoint") = 0.47);
}
