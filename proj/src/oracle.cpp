#include "goalc/oracle.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "goalc/naming.hpp"

namespace goalc::oracle {

namespace {

double lookup(const sym::Bindings& b, const std::string& name) {
  auto it = b.find(name);
  if (it == b.end()) throw MissingBinding(name);
  double v = it->second;
  ParamKind kind = naming::infer_kind(name);
  if (is_binary(kind) && v != 0.0 && v != 1.0) throw DomainViolation(name, v, "0 or 1");
  if ((kind == ParamKind::Reliability || kind == ParamKind::Frequency) && !(v >= 0.0 && v <= 1.0)) {
    throw DomainViolation(name, v, "[0, 1]");
  }
  if (kind == ParamKind::Cost && !(v >= 0.0)) throw DomainViolation(name, v, ">= 0");
  return v;
}

enum class Op { Leaf, Placeholder, And, Or };

struct Flat {
  Op op = Op::Leaf;
  bool gate_open = true;   // own contexts
  bool present = true;     // placeholder OPT flag
  int slot = -1;           // leaf index into outcome vector
  std::vector<int> kids;
};

// Compact view of the subtree with every parameter resolved.
struct Tree {
  std::vector<Flat> nodes;
  std::vector<LeafOutcomes> leaf_probs;
  std::vector<double> leaf_cost;

  Tree(const cgm::GoalModel& model, const std::string& goal, const sym::Bindings& b) {
    build(model, model.node(goal), 1.0, b);
    if (leaf_probs.size() > kMaxLeaves) {
      throw DomainError("oracle enumeration limited to " + std::to_string(kMaxLeaves) + " leaves");
    }
  }

  int build(const cgm::GoalModel& model, const cgm::Node& n, double outer, const sym::Bindings& b) {
    double gate = 1.0;
    for (const auto& c : n.context_refs) gate *= lookup(b, naming::context(c));
    int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[idx].gate_open = gate != 0.0;
    double c = outer * gate;
    if (n.kind == cgm::NodeKind::LeafTask) {
      double r = lookup(b, n.leaf_params->reliability);
      double f = lookup(b, n.leaf_params->frequency);
      double w = lookup(b, n.leaf_params->cost);
      nodes[idx].op = Op::Leaf;
      nodes[idx].slot = static_cast<int>(leaf_probs.size());
      leaf_probs.push_back(leaf_outcomes(c, f, r));
      leaf_cost.push_back(w);
      return idx;
    }
    if (n.kind == cgm::NodeKind::Placeholder) {
      nodes[idx].op = Op::Placeholder;
      nodes[idx].present = lookup(b, naming::opt(n.id)) != 0.0;
      return idx;
    }
    nodes[idx].op = n.decomposition == cgm::Decomposition::Or ? Op::Or : Op::And;
    const auto& operands = n.dm_annotation ? *n.dm_annotation : n.children;
    for (const auto& k : operands) {
      int child = build(model, model.node(k), c, b);
      nodes[idx].kids.push_back(child);
    }
    return idx;
  }

  struct Result {
    bool success;
    double cost;
  };

  Result eval(int i, const std::vector<Outcome>& omega, CostMode mode) const {
    const Flat& n = nodes[i];
    if (n.op == Op::Leaf) {
      Outcome o = omega[n.slot];
      return {n.gate_open && o == Outcome::Success, o == Outcome::Skipped ? 0.0 : leaf_cost[n.slot]};
    }
    if (!n.gate_open) return {false, 0.0};
    if (n.op == Op::Placeholder) return {n.present, 0.0};
    double cost = 0;
    if (n.op == Op::And) {
      bool all = true;
      for (int k : n.kids) {
        Result r = eval(k, omega, mode);
        all = all && r.success;
        cost += r.cost;
      }
      return {all, cost};
    }
    bool any = false;
    for (int k : n.kids) {
      Result r = eval(k, omega, mode);
      cost += r.cost;
      any = any || r.success;
      if (any && mode == CostMode::ShortCircuit) break;
    }
    return {any, cost};
  }

  // Sums weight(omega) * P(omega) over every outcome vector of nonzero mass.
  double expect(const std::function<double(const std::vector<Outcome>&)>& weight) const {
    std::vector<Outcome> omega(leaf_probs.size(), Outcome::Skipped);
    double total = 0;
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double p) {
      if (i == omega.size()) {
        total += p * weight(omega);
        return;
      }
      const LeafOutcomes& lo = leaf_probs[i];
      const std::pair<Outcome, double> choices[] = {
          {Outcome::Success, lo.success}, {Outcome::Skipped, lo.skipped}, {Outcome::Failure, lo.failure}};
      for (const auto& [o, q] : choices) {
        if (q == 0.0) continue;
        omega[i] = o;
        rec(i + 1, p * q);
      }
    };
    rec(0, 1.0);
    return total;
  }
};

bool and_only(const cgm::GoalModel& model, const cgm::Node& n) {
  if (n.is_leaf()) return true;
  const auto& operands = n.dm_annotation ? *n.dm_annotation : n.children;
  if (n.decomposition == cgm::Decomposition::Or && operands.size() > 1) return false;
  for (const auto& k : operands)
    if (!and_only(model, model.node(k))) return false;
  return true;
}

}  // namespace

LeafOutcomes leaf_outcomes(double c, double f, double r) {
  double run = c * f;
  return LeafOutcomes{run * r, 1.0 - run, run * (1.0 - r)};
}

ExactLeafOutcomes leaf_outcomes_exact(const sym::Rational& c, const sym::Rational& f,
                                      const sym::Rational& r) {
  sym::Rational run = c * f;
  return ExactLeafOutcomes{run * r, 1 - run, run * (1 - r)};
}

double prob_reach(const cgm::GoalModel& model, const std::string& goal_id,
                  const sym::Bindings& binding) {
  Tree t(model, goal_id, binding);
  return t.expect([&](const std::vector<Outcome>& w) {
    return t.eval(0, w, CostMode::RunAll).success ? 1.0 : 0.0;
  });
}

double cost_reach(const cgm::GoalModel& model, const std::string& goal_id,
                  const sym::Bindings& binding, CostMode mode) {
  Tree t(model, goal_id, binding);
  return t.expect([&](const std::vector<Outcome>& w) {
    auto r = t.eval(0, w, mode);
    return r.success ? r.cost : 0.0;
  });
}

bool cost_comparable(const cgm::GoalModel& model, const std::string& goal_id,
                     const sym::Bindings& binding) {
  const cgm::Node* n = &model.node(goal_id);
  if (and_only(model, *n)) return true;
  // Descend through single-operand refinements to the first real fork.
  for (;;) {
    const auto& operands = n->dm_annotation ? *n->dm_annotation : n->children;
    if (operands.size() != 1) break;
    n = &model.node(operands.front());
  }
  const auto& operands = n->dm_annotation ? *n->dm_annotation : n->children;
  if (n->decomposition != cgm::Decomposition::Or || operands.size() != 2) return false;
  for (const auto& k : operands)
    if (!and_only(model, model.node(k))) return false;
  for (const cgm::Node* leaf : model.leaves_under(goal_id)) {
    if (leaf->kind != cgm::NodeKind::LeafTask) continue;
    if (lookup(binding, leaf->leaf_params->frequency) != 1.0) return false;
  }
  return true;
}

CheckReport check_formula(const cgm::GoalModel& model, const compiler::NodeForms& forms,
                          const sym::Bindings& binding, double tol) {
  CheckReport rep;
  rep.formula_reliability = forms.P.evaluate(binding);
  rep.oracle_reliability = prob_reach(model, forms.node_id, binding);
  rep.reliability_delta = std::abs(rep.formula_reliability - rep.oracle_reliability);
  rep.reliability_ok = rep.reliability_delta <= tol;
  if (!cost_comparable(model, forms.node_id, binding)) {
    rep.cost_status = "not-applicable";
    rep.cost_ok = true;
    return rep;
  }
  rep.formula_cost = forms.Cost.evaluate(binding);
  rep.oracle_cost = cost_reach(model, forms.node_id, binding, CostMode::ShortCircuit);
  rep.cost_delta = std::abs(rep.formula_cost - rep.oracle_cost);
  rep.cost_ok = rep.cost_delta <= tol;
  rep.cost_status = rep.cost_ok ? "ok" : "mismatch";
  return rep;
}

CheckReport check_formula(const cgm::GoalModel& model, const std::string& goal_id,
                          const sym::Bindings& binding, double tol) {
  return check_formula(model, compiler::compose_node_form(model, goal_id), binding, tol);
}

}  // namespace goalc::oracle
