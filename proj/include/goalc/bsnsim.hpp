#pragma once

// Seeded discrete-time simulation of a body sensor network closed by the
// runtime controller. The world holds the true component parameters; the
// controller sees them only through telemetry (tamed) or not at all
// (untamed, which keeps the static estimates of the scenario file).

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "goalc/cgm.hpp"
#include "goalc/runtime.hpp"
#include "goalc/symexpr.hpp"
#include "goalc/telemetry.hpp"
#include "goalc/vitals.hpp"

namespace goalc::bsnsim {

enum class ScenarioKind { None, SystemItself, SystemGoals, Environment };
enum class Mode { Tamed, Untamed };

std::string_view to_string(ScenarioKind k);
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view text);

struct LeafTruth {
  double reliability = 1.0;
  double cost = 0.0;
  double gain = 1.0;  // fraction of commanded executions that actually run
};

/// Step change of a leaf's true reliability at time t.
struct Degradation {
  double t = 0;
  std::string node;  // leaf or subtree id
  double delta = 0;
};

struct BatterySpec {
  std::string node;     // subtree whose executions drain the battery
  std::string context;  // availability context driven by the battery
  double level = 1.0;
  double drain_per_exec = 0.0;
  double recharge_per_tick = 0.0;
};

inline constexpr double kBatteryOff = 0.02;
inline constexpr double kBatteryOn = 0.90;

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::None;
  std::uint64_t seed = 1;
  double duration = 300;
  double tick = 1;
  double transient = 30;
  std::size_t window = runtime::kDefaultWindow;
  std::size_t opportunities_per_tick = 100;
  std::size_t control_period = 1;  // ticks between planning rounds
  double cost_noise = 0.05;        // relative spread of per-execution cost samples

  std::map<std::string, LeafTruth> truth;    // per leaf
  std::map<std::string, LeafTruth> assumed;  // static estimates, per leaf
  std::map<std::string, double> initial_knobs;
  std::map<std::string, bool> contexts;          // true initial values
  std::map<std::string, bool> assumed_contexts;  // untamed belief
  std::map<std::string, bool> opt;
  std::vector<Degradation> degradations;
  std::vector<BatterySpec> batteries;
  std::optional<std::string> vitals_context;  // context driven by vital-sign validity

  /// Node ids in the "truth"/"assumed" sections may name subtrees; they are
  /// expanded to leaves in file order, later entries overriding earlier ones.
  static ScenarioConfig parse(std::string_view text, const cgm::GoalModel& model);
  static ScenarioConfig load(const std::string& path, const cgm::GoalModel& model);
};

struct Battery {
  BatterySpec spec;
  double level = 1.0;
  bool on = true;
};

class World {
 public:
  World(const cgm::GoalModel& model, const ScenarioConfig& config, const runtime::Policy& policy);

  /// Advances one tick: scenario hooks, batteries, executions. Returns the
  /// telemetry emitted during the tick in timestamp order.
  std::vector<telemetry::Event> step(double t);

  void apply(const std::vector<telemetry::Command>& commands);

  /// True parameter values, with frequencies = commanded * gain.
  sym::Bindings truth() const;

  const std::map<std::string, double>& knobs() const { return knobs_; }
  const std::map<std::string, bool>& contexts() const { return contexts_; }
  const std::vector<Battery>& batteries() const { return batteries_; }
  double true_reliability(const std::string& leaf) const { return truth_.at(leaf).reliability; }
  const vitals::Generator& patient() const { return vitals_; }

 private:
  bool leaf_active(const std::string& leaf) const;

  const cgm::GoalModel& model_;
  const ScenarioConfig& config_;
  std::vector<std::string> leaves_;
  std::map<std::string, LeafTruth> truth_;
  std::map<std::string, double> frequency_;  // commanded, per leaf
  std::map<std::string, double> knobs_;
  std::map<std::string, std::vector<std::string>> knob_leaves_;
  std::map<std::string, bool> contexts_;
  std::map<std::string, std::string> leaf_battery_;  // leaf -> battery node
  std::vector<Battery> batteries_;
  std::size_t next_degradation_ = 0;
  std::mt19937_64 rng_;
  vitals::Generator vitals_;
  bool first_ = true;
};

struct TickRecord {
  double t = 0;
  double reliability = 0;
  double cost = 0;
  std::vector<int> contexts;
  std::vector<double> knobs;
};

struct TimeSeries {
  std::vector<std::string> context_ids;
  std::vector<std::string> knob_ids;
  std::vector<TickRecord> rows;

  std::string to_csv() const;
  static TimeSeries from_csv(std::string_view text);
};

TimeSeries run(const ScenarioConfig& config, const runtime::Policy& policy, const cgm::GoalModel& model,
               Mode mode);

struct Metrics {
  double d_tamed_reliability = 0;
  double d_untamed_reliability = 0;
  double e_r = 0;
  double d_tamed_cost = 0;
  double d_untamed_cost = 0;
  double e_c = 0;
};

/// d = mean |x_i - setpoint| over every row; e = d_untamed / d_tamed
/// (+infinity when d_tamed is zero). Throws DomainError on unequal lengths.
Metrics metrics(const TimeSeries& tamed, const TimeSeries& untamed, double reliability_setpoint,
                double cost_setpoint);

double mean_distance(const std::vector<double>& xs, double setpoint);

/// Fraction of rows with t > after whose reliability and cost are both
/// within setpoint * (1 +- margin).
double in_band_fraction(const TimeSeries& ts, double reliability_setpoint, double reliability_margin,
                        double cost_setpoint, double cost_margin, double after);

/// "inf" for infinite ratios, fixed six decimals otherwise.
std::string format_ratio(double x);

}  // namespace goalc::bsnsim
