#include "goalc/compiler.hpp"

#include "goalc/naming.hpp"

namespace goalc::compiler {

namespace {

SymExpr one() { return SymExpr::constant(1); }

SymExpr fixed(const SymExpr& e, const CompileOptions& options) {
  return options.fixed.empty() ? e : e.substitute(options.fixed);
}

NodeForms gated(NodeForms forms, const SymExpr& gate) {
  forms.P = gate * forms.P;
  forms.W = gate * forms.W;
  forms.Cost = gate * forms.Cost;
  return forms;
}

PairKind fold_kind(const cgm::Node& n) {
  if (n.dm_annotation) return PairKind::Dm;
  return n.decomposition == cgm::Decomposition::Or ? PairKind::Or : PairKind::And;
}

class Compiler {
 public:
  Compiler(const cgm::GoalModel& model, const CompileOptions& options)
      : model_(model), options_(options) {}

  const NodeForms& forms(const std::string& id) {
    if (auto it = done_.find(id); it != done_.end()) return it->second;
    NodeForms f = build(model_.node(id));
    return done_.emplace(id, std::move(f)).first->second;
  }

  std::map<std::string, NodeForms> take() { return std::move(done_); }

 private:
  SymExpr gate(const cgm::Node& n) const { return fixed(context_gate(n), options_); }

  NodeForms build(const cgm::Node& n) {
    if (n.kind == cgm::NodeKind::LeafTask) {
      NodeForms f = atomic_forms(n);
      f.P = fixed(f.P, options_);
      f.W = fixed(f.W, options_);
      f.Cost = fixed(f.Cost, options_);
      return f;
    }
    if (n.kind == cgm::NodeKind::Placeholder) {
      NodeForms unit{n.id, one(), SymExpr{}, SymExpr{}};
      auto opt = fixed(SymExpr::param(naming::opt(n.id)), options_);
      NodeForms f = compose_pair(PairKind::Incompleteness, unit, nullptr, gate(n), one(), opt);
      f.node_id = n.id;
      return f;
    }

    const std::vector<std::string>& operands =
        n.dm_annotation ? *n.dm_annotation : n.children;
    PairKind kind = fold_kind(n);
    NodeForms acc;
    if (operands.size() == 1) {
      const cgm::Node& child = model_.node(operands.front());
      if (kind == PairKind::Dm) {
        acc = compose_pair(kind, forms(child.id), nullptr, gate(child));
      } else {
        acc = gated(forms(child.id), gate(child));
      }
    } else {
      const cgm::Node& first = model_.node(operands[0]);
      const cgm::Node& second = model_.node(operands[1]);
      acc = compose_pair(kind, forms(first.id), &forms(second.id), gate(first), gate(second));
      for (std::size_t i = 2; i < operands.size(); ++i) {
        const cgm::Node& next = model_.node(operands[i]);
        acc = compose_pair(kind, acc, &forms(next.id), one(), gate(next));
      }
    }
    acc = gated(std::move(acc), gate(n));
    acc.node_id = n.id;
    return acc;
  }

  const cgm::GoalModel& model_;
  const CompileOptions& options_;
  std::map<std::string, NodeForms> done_;
};

}  // namespace

SymExpr context_gate(const cgm::Node& node) {
  SymExpr g = one();
  for (const auto& c : node.context_refs) g *= SymExpr::param(naming::context(c));
  return g;
}

NodeForms atomic_forms(const cgm::Node& leaf) {
  if (leaf.kind != cgm::NodeKind::LeafTask || !leaf.leaf_params) {
    throw DomainError("atomic forms requested for non-leaf node '" + leaf.id + "'");
  }
  const auto& p = *leaf.leaf_params;
  SymExpr c = context_gate(leaf);
  SymExpr r = SymExpr::param(p.reliability);
  SymExpr f = SymExpr::param(p.frequency);
  SymExpr w = SymExpr::param(p.cost);
  return NodeForms{leaf.id, c * r * f, w, c * w * r * f};
}

NodeForms compose_pair(PairKind kind, const NodeForms& left, const NodeForms* right,
                       const SymExpr& ctx_left, const SymExpr& ctx_right,
                       const std::optional<SymExpr>& opt) {
  NodeForms out;
  out.node_id = left.node_id;
  if (kind == PairKind::Incompleteness) {
    if (!opt) throw DomainError("incompleteness composition needs an OPT parameter");
    out.P = ctx_left * left.P * *opt;
    out.W = left.W;
    out.Cost = ctx_left * left.W * left.P * *opt;
    return out;
  }
  if (!right && kind != PairKind::Dm) {
    throw DomainError("binary composition is missing its right operand");
  }

  SymExpr cp1 = ctx_left * left.P;
  SymExpr cw1 = ctx_left * left.W;
  SymExpr cp2 = right ? ctx_right * right->P : SymExpr{};
  SymExpr cw2 = right ? ctx_right * right->W : SymExpr{};

  out.W = cw1 + cw2;
  if (kind == PairKind::And) {
    out.P = cp1 * cp2;
    out.Cost = out.W * out.P;
  } else {
    out.P = cp1 + cp2 - cp1 * cp2;
    out.Cost = out.W * out.P - cw2 * cp1;
  }
  return out;
}

std::map<std::string, NodeForms> compile(const cgm::GoalModel& model, const std::string& node_id,
                                         const CompileOptions& options) {
  Compiler c(model, options);
  c.forms(node_id);
  return c.take();
}

NodeForms compose_node_form(const cgm::GoalModel& model, const std::string& node_id,
                            const CompileOptions& options) {
  Compiler c(model, options);
  return c.forms(node_id);
}

std::map<std::string, ParamGrowth> param_growth_report(const cgm::GoalModel& model) {
  std::map<std::string, ParamGrowth> out;
  for (auto& [id, f] : compile(model, model.root_id())) {
    out[id] = ParamGrowth{f.P.parameter_names().size(), f.Cost.parameter_names().size()};
  }
  return out;
}

}  // namespace goalc::compiler
