#pragma once

// PRISM MDP and PCTL emission for a goal subtree.
//
// Leaves and placeholders become five-state modules numbered 1..L in
// depth-first order (state s<i>, constants r<i>, f<i>, w<i> or OPT<i>).
// Every node guarded by a context gets a gate c<k>: DM children get a
// global enabled by the non-determinism module, other nodes a constant.
// Modules are chained sequentially through next<x> labels.

#include <cstddef>
#include <string>
#include <vector>

#include "goalc/cgm.hpp"

namespace goalc::prismgen {

inline constexpr std::size_t kMaxDmChildren = 12;

struct Emission {
  std::string model;       // .pm text
  std::string properties;  // .pctl text
  std::size_t modules = 0;
  std::size_t ctx_constants = 0;
};

/// Leaf module text. `gates` are the gate variables guarding the leaf
/// (own and ancestors'); the init probability is their product times f<index>.
std::string emit_leaf_module(const cgm::Node& leaf, int index, int x,
                             const std::vector<std::string>& gates);

/// Non-determinism module for a DM node whose operands have gates
/// `child_gates` (one per operand, in annotation order). CTX constants are
/// numbered from `first_ctx`.
std::string emit_dm_module(const cgm::Node& node, const std::vector<std::string>& child_gates,
                           int first_ctx, int x);

Emission emit(const cgm::GoalModel& model, const std::string& goal_id);
std::string emit_model(const cgm::GoalModel& model, const std::string& goal_id);

/// Four queries for `goal_id` and for every goal node below it, with state
/// indices matching emit_model(model, goal_id).
std::string emit_properties(const cgm::GoalModel& model, const std::string& goal_id);

/// The success proposition of `node_id` within the emission rooted at `goal_id`.
std::string proposition(const cgm::GoalModel& model, const std::string& goal_id,
                        const std::string& node_id);

}  // namespace goalc::prismgen
