#pragma once

// Brute-force ground truth for compiled formulae. With every context fixed
// the leaf outcomes are independent, so the induced chain can be analysed by
// enumerating the 3^L joint outcome vectors of the L leaf tasks.

#include <map>
#include <string>

#include "goalc/cgm.hpp"
#include "goalc/compiler.hpp"
#include "goalc/symexpr.hpp"

namespace goalc::oracle {

inline constexpr std::size_t kMaxLeaves = 20;

enum class Outcome { Success, Skipped, Failure };

/// Execution order used when accruing cost in OR/DM refinements.
/// AND refinements always run every child.
enum class CostMode { ShortCircuit, RunAll };

struct LeafOutcomes {
  double success = 0;
  double skipped = 0;
  double failure = 0;
};

struct ExactLeafOutcomes {
  sym::Rational success;
  sym::Rational skipped;
  sym::Rational failure;
};

/// c is the product of the leaf's context gates (its own and its ancestors').
LeafOutcomes leaf_outcomes(double c, double f, double r);
ExactLeafOutcomes leaf_outcomes_exact(const sym::Rational& c, const sym::Rational& f,
                                      const sym::Rational& r);

/// Probability that the goal's success proposition eventually holds.
double prob_reach(const cgm::GoalModel& model, const std::string& goal_id,
                  const sym::Bindings& binding);

/// Expected cost accrued on paths that satisfy the goal's proposition.
double cost_reach(const cgm::GoalModel& model, const std::string& goal_id,
                  const sym::Bindings& binding, CostMode mode = CostMode::ShortCircuit);

/// Whether the compiled cost formula is expected to agree with cost_reach:
/// AND-only subtrees at any binding, or a binary OR/DM over AND-only
/// operands when every frequency in the subtree equals 1.
bool cost_comparable(const cgm::GoalModel& model, const std::string& goal_id,
                     const sym::Bindings& binding);

struct CheckReport {
  double formula_reliability = 0;
  double oracle_reliability = 0;
  double reliability_delta = 0;
  bool reliability_ok = false;

  /// "ok", "mismatch" or "not-applicable".
  std::string cost_status;
  double formula_cost = 0;
  double oracle_cost = 0;
  double cost_delta = 0;
  bool cost_ok = false;
};

CheckReport check_formula(const cgm::GoalModel& model, const std::string& goal_id,
                          const sym::Bindings& binding, double tol);

/// Same, reusing forms already compiled for the goal.
CheckReport check_formula(const cgm::GoalModel& model, const compiler::NodeForms& forms,
                          const sym::Bindings& binding, double tol);

}  // namespace goalc::oracle
