#pragma once

// Compositional synthesis of per-node reliability and cost formulae.
//
// Every node carries a triple: P (probability of success), W (accumulated
// raw cost weight of the subtree) and Cost (the reportable expected-cost
// formula). Binary compositions follow the closed forms below; n-ary
// refinements are left-folded in child order.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "goalc/cgm.hpp"
#include "goalc/symexpr.hpp"

namespace goalc::compiler {

using sym::SymExpr;

struct NodeForms {
  std::string node_id;
  SymExpr P;
  SymExpr W;
  SymExpr Cost;
};

enum class PairKind { And, Or, Dm, Incompleteness };

/// Product of C parameters for the contexts attached to `node`; 1 if none.
SymExpr context_gate(const cgm::Node& node);

/// Forms of a leaf task: P = C*r*f, W = w, Cost = C*w*r*f.
NodeForms atomic_forms(const cgm::Node& leaf);

/// One row of the composition table. `right` may be null for single-operand
/// DM (the missing operand counts as zero) and must be null for
/// Incompleteness, which instead requires `opt`. Context gates default to 1.
NodeForms compose_pair(PairKind kind, const NodeForms& left, const NodeForms* right,
                       const SymExpr& ctx_left = SymExpr::constant(1),
                       const SymExpr& ctx_right = SymExpr::constant(1),
                       const std::optional<SymExpr>& opt = std::nullopt);

struct CompileOptions {
  /// Parameter values substituted into every atomic form and context gate
  /// before composition (e.g. a fixed context configuration).
  std::map<std::string, sym::Rational> fixed;
};

/// Forms for every node of the subtree rooted at `node_id`, keyed by id.
std::map<std::string, NodeForms> compile(const cgm::GoalModel& model, const std::string& node_id,
                                         const CompileOptions& options = {});

/// Forms of a single node, including the gate of its own contexts.
NodeForms compose_node_form(const cgm::GoalModel& model, const std::string& node_id,
                            const CompileOptions& options = {});

struct ParamGrowth {
  std::size_t reliability = 0;
  std::size_t cost = 0;
};

/// Parameter counts of P and Cost for every node of the model.
std::map<std::string, ParamGrowth> param_growth_report(const cgm::GoalModel& model);

}  // namespace goalc::compiler
