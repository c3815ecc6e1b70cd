#pragma once

// The managing system: monitor, analyze, plan and execute over the compiled
// formulae of the goals named in an adaptation policy.

#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "goalc/cgm.hpp"
#include "goalc/compiler.hpp"
#include "goalc/symexpr.hpp"
#include "goalc/telemetry.hpp"

namespace goalc::runtime {

inline constexpr std::size_t kDefaultWindow = 100;

/// Windowed estimates for one leaf task.
struct LeafEstimate {
  double reliability = 1.0;  // successes / executions that ran
  double cost = 0.0;         // mean cost sample
  double gain = 1.0;         // executions that ran / execution slots
  double frequency = 1.0;    // commanded frequency

  std::deque<bool> successes;
  std::deque<bool> slots;
  std::deque<double> costs;
};

class KnowledgeState {
 public:
  KnowledgeState() = default;
  explicit KnowledgeState(const cgm::GoalModel& model, std::size_t window = kDefaultWindow);

  /// Folds a timestamp-ordered batch into the estimates. Events naming
  /// unknown leaves or contexts are counted and skipped.
  std::size_t ingest(const std::vector<telemetry::Event>& events);

  void set_time(double t) { time_ = t; }
  double time() const { return time_; }
  std::size_t window() const { return window_; }

  const std::map<std::string, LeafEstimate>& leaves() const { return leaves_; }
  const LeafEstimate& leaf(const std::string& id) const;
  void set_estimate(const std::string& leaf_id, double reliability, double cost, double gain = 1.0);
  void set_frequency(const std::string& leaf_id, double f);

  const std::map<std::string, bool>& contexts() const { return contexts_; }
  void set_context(const std::string& id, bool holds);
  void set_opt(const std::string& placeholder_id, bool present);

  /// Parameter values for formula evaluation. The bound frequency is the
  /// commanded frequency scaled by the estimated gain.
  sym::Bindings bindings() const;

 private:
  std::size_t window_ = kDefaultWindow;
  double time_ = 0;
  std::map<std::string, LeafEstimate> leaves_;
  std::map<std::string, bool> contexts_;
  std::map<std::string, bool> opts_;
};

enum class Metric { Reliability, Cost };

struct Property {
  Metric metric = Metric::Reliability;
  std::string goal;
  double setpoint = 0;
  double margin = 0;  // fraction of the setpoint
};

struct Knob {
  std::string id;
  double min = 0;
  double max = 1;
  double step = 0.1;
  std::vector<std::string> leaves;  // leaf tasks whose frequency the knob sets

  std::size_t count() const;
  double value(std::size_t i) const;
  /// Index of the grid value closest to v.
  std::size_t nearest(double v) const;
};

/// Propositional combination of property indices (1-based).
class Combination {
 public:
  Combination() = default;
  /// Grammar: expr := term (OR term)*, term := atom (AND atom)*,
  /// atom := INT | '(' expr ')'. AND/OR also accept &, &&, |, ||.
  static Combination parse(std::string_view text, std::size_t properties);
  static Combination all_of(std::size_t properties);

  bool evaluate(const std::vector<bool>& holds) const;
  const std::string& text() const { return text_; }

 private:
  struct Item {
    enum Kind { Atom, And, Or } kind;
    std::size_t index;
  };
  std::vector<Item> rpn_;
  std::string text_;
};

struct Policy {
  std::vector<Property> properties;
  Combination combination;
  std::vector<Knob> knobs;  // sorted by id

  /// Parses and validates the policy JSON against `model`.
  static Policy parse(std::string_view text, const cgm::GoalModel& model);
  static Policy load(const std::string& path, const cgm::GoalModel& model);
};

struct Analysis {
  std::vector<double> values;
  std::vector<double> errors;  // value - setpoint
  std::vector<bool> in_margin;
  bool satisfied = false;
  double objective = 0;  // sum of |error| / setpoint
};

struct Actuation {
  std::map<std::string, double> assignments;  // knob id -> value
  std::vector<double> predicted;              // per policy property
  double objective = 0;
  bool feasible = true;
  bool identity = true;
};

struct ControllerOptions {
  std::size_t max_candidates = 1'000'000;
  /// Worker threads for plan; 0 reads GOALC_THREADS, else hardware concurrency.
  unsigned threads = 0;
};

class Controller {
 public:
  Controller(const cgm::GoalModel& model, Policy policy, ControllerOptions options = {});

  const Policy& policy() const { return policy_; }

  /// The formula for property i.
  const sym::SymExpr& formula(std::size_t i) const;

  Analysis analyze(const KnowledgeState& state) const;

  /// Exhaustive grid search; identity when the combination already holds.
  Actuation plan(const KnowledgeState& state) const;

  /// Current knob values read from the commanded frequencies in `state`.
  std::map<std::string, double> knob_values(const KnowledgeState& state) const;

  /// One command per changed knob, ordered by knob id.
  std::vector<telemetry::Command> execute(const Actuation& actuation, const KnowledgeState& state,
                                          double t) const;

  /// Applies commands to the commanded frequencies of `state`.
  void apply(const std::vector<telemetry::Command>& commands, KnowledgeState& state) const;

 private:
  Analysis judge(const std::vector<double>& values) const;

  cgm::GoalModel model_;
  Policy policy_;
  ControllerOptions options_;
  std::map<std::string, compiler::NodeForms> forms_;
};

}  // namespace goalc::runtime
