#pragma once

// Contextual goal models augmented with uncertainty annotations: leaf tasks
// carry reliability/cost/frequency parameters, nodes may be guarded by
// contexts, OR-refined nodes may carry a decision-making (DM) annotation and
// placeholder nodes stand for parts of the system unknown at design time.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "goalc/error.hpp"

namespace goalc::cgm {

enum class NodeKind { Goal, Task, LeafTask, Placeholder };
enum class Decomposition { And, Or, MeansEnd, None };
enum class ValueKind { Boolean, Integer, Double };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Decomposition d);
std::string_view to_string(ValueKind kind);

/// Parameter names owned by a leaf task. Never holds values.
struct LeafParams {
  std::string reliability;
  std::string cost;
  std::string frequency;

  friend bool operator==(const LeafParams&, const LeafParams&) = default;
};

/// `variable op threshold`, e.g. "battery_ecg >= 0.02".
struct Comparison {
  std::string variable;
  std::string op;
  double threshold = 0.0;

  static Comparison parse(std::string_view text);
  bool holds(double value) const;
  std::string text() const;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct ContextDef {
  std::string id;
  std::string description;
  ValueKind value_kind = ValueKind::Boolean;
  std::optional<Comparison> condition;

  friend bool operator==(const ContextDef&, const ContextDef&) = default;
};

struct Node {
  std::string id;
  std::string label;
  NodeKind kind = NodeKind::Goal;
  Decomposition decomposition = Decomposition::None;
  std::vector<std::string> children;
  std::optional<std::vector<std::string>> dm_annotation;
  std::vector<std::string> context_refs;
  std::optional<LeafParams> leaf_params;

  bool is_leaf() const { return kind == NodeKind::LeafTask || kind == NodeKind::Placeholder; }

  friend bool operator==(const Node&, const Node&) = default;
};

class GoalModel {
 public:
  GoalModel() = default;

  /// Takes nodes in declaration order. Leaf parameter names are derived here.
  /// No validation happens; see validate().
  GoalModel(std::string actor, std::string root_id, std::vector<Node> nodes,
            std::vector<ContextDef> contexts);

  const std::string& actor_name() const noexcept { return actor_; }
  const std::string& root_id() const noexcept { return root_; }
  const std::map<std::string, Node>& nodes() const noexcept { return nodes_; }
  const std::map<std::string, ContextDef>& contexts() const noexcept { return contexts_; }

  /// Node ids in declaration order.
  const std::vector<std::string>& declaration_order() const noexcept { return order_; }
  const std::vector<std::string>& duplicate_ids() const noexcept { return duplicates_; }

  const Node& node(const std::string& id) const;
  const Node* find(const std::string& id) const;
  const ContextDef* find_context(const std::string& id) const;
  bool contains(const std::string& id) const { return nodes_.count(id) != 0; }

  /// Parent of `id`, or nullptr for the root. Requires a valid model.
  const Node* parent_of(const std::string& id) const;

  /// Nodes of the subtree rooted at `id` in depth-first pre-order.
  std::vector<const Node*> subtree(const std::string& id) const;

  /// Leaf tasks and placeholders under `id` in depth-first order.
  std::vector<const Node*> leaves_under(const std::string& id) const;

  /// Every parameter name the model induces: r/f/w per leaf, C per referenced
  /// context, OPT per placeholder.
  std::vector<std::string> parameter_names() const;

  /// The subtree under `id` as a standalone model (contexts carried over).
  GoalModel extract(const std::string& id) const;

  friend bool operator==(const GoalModel& a, const GoalModel& b) {
    return a.actor_ == b.actor_ && a.root_ == b.root_ && a.nodes_ == b.nodes_ &&
           a.contexts_ == b.contexts_ && a.order_ == b.order_;
  }

 private:
  std::string actor_;
  std::string root_;
  std::map<std::string, Node> nodes_;
  std::vector<std::string> order_;
  std::vector<std::string> duplicates_;
  std::map<std::string, ContextDef> contexts_;
  std::vector<std::string> context_order_;
  std::map<std::string, std::string> parent_;
};

struct Violation {
  std::string node_id;
  std::string rule;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct Advisory {
  std::string node_id;
  std::string message;
};

/// Thrown by parse_model when the parsed model breaks a structural invariant.
class ModelError : public DomainError {
 public:
  explicit ModelError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Parses the JSON model format and validates it.
/// Throws ParseError on malformed text and ModelError on invariant violations.
GoalModel parse_model(std::string_view text);
GoalModel load_model(const std::filesystem::path& path);

/// Parses without validating; for tools that want to report every violation.
GoalModel parse_model_unchecked(std::string_view text);

std::string serialize(const GoalModel& model);

/// All invariant violations, ordered by node id then rule name.
std::vector<Violation> validate(const GoalModel& model);

/// Non-fatal modeling-guideline check: every context-dependent data-collection
/// task should be AND-refined into three leaves (read, filter, transfer).
std::vector<Advisory> check_sensor_guideline(const GoalModel& model);

}  // namespace goalc::cgm
