#include "goalc/bsnsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "goalc/compiler.hpp"
#include "goalc/naming.hpp"

namespace goalc::bsnsim {

using json = nlohmann::json;

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::None: return "none";
    case ScenarioKind::SystemItself: return "system_itself";
    case ScenarioKind::SystemGoals: return "system_goals";
    case ScenarioKind::Environment: return "environment";
  }
  return "none";
}

std::string_view to_string(Mode m) { return m == Mode::Tamed ? "tamed" : "untamed"; }

Mode parse_mode(std::string_view text) {
  if (text == "tamed") return Mode::Tamed;
  if (text == "untamed") return Mode::Untamed;
  throw DomainError("unknown mode '" + std::string(text) + "' (expected tamed or untamed)");
}

namespace {

ScenarioKind parse_kind(const std::string& s) {
  if (s == "none") return ScenarioKind::None;
  if (s == "system_itself" || s == "1a") return ScenarioKind::SystemItself;
  if (s == "system_goals" || s == "1b") return ScenarioKind::SystemGoals;
  if (s == "environment" || s == "1c") return ScenarioKind::Environment;
  throw DomainError("unknown scenario kind '" + s + "'");
}

std::vector<std::string> leaves_of(const cgm::GoalModel& model, const std::string& id) {
  if (!model.contains(id)) throw DomainError("scenario refers to unknown node '" + id + "'");
  std::vector<std::string> out;
  for (const cgm::Node* n : model.leaves_under(id))
    if (n->kind == cgm::NodeKind::LeafTask) out.push_back(n->id);
  return out;
}

void read_truth(const json& arr, const cgm::GoalModel& model, std::map<std::string, LeafTruth>& into) {
  for (const auto& e : arr) {
    for (const auto& leaf : leaves_of(model, e.at("node").get<std::string>())) {
      LeafTruth& t = into[leaf];
      if (e.contains("reliability")) t.reliability = e.at("reliability").get<double>();
      if (e.contains("cost")) t.cost = e.at("cost").get<double>();
      if (e.contains("gain")) t.gain = e.at("gain").get<double>();
      if (t.reliability < 0 || t.reliability > 1 || t.gain < 0 || t.gain > 1 || t.cost < 0) {
        throw DomainError("scenario parameters for '" + leaf + "' are out of range");
      }
    }
  }
}

void read_contexts(const json& obj, const cgm::GoalModel& model, std::map<std::string, bool>& into) {
  for (const auto& [id, v] : obj.items()) {
    if (!model.find_context(id)) throw DomainError("scenario refers to unknown context '" + id + "'");
    into[id] = v.is_boolean() ? v.get<bool>() : v.get<double>() != 0.0;
  }
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(std::string_view text, const cgm::GoalModel& model) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario JSON: ") + e.what(), e.byte);
  }
  ScenarioConfig c;
  try {
    c.name = doc.value("name", "");
    c.kind = parse_kind(doc.value("scenario", "none"));
    c.seed = doc.value("seed", std::uint64_t{1});
    c.duration = doc.value("duration", 300.0);
    c.tick = doc.value("tick", 1.0);
    c.transient = doc.value("transient", 30.0);
    c.window = doc.value("window", runtime::kDefaultWindow);
    c.opportunities_per_tick = doc.value("opportunities_per_tick", std::size_t{100});
    c.control_period = doc.value("control_period", std::size_t{1});
    c.cost_noise = doc.value("cost_noise", 0.05);
    if (!(c.duration > 0) || !(c.tick > 0)) throw DomainError("scenario duration and tick must be positive");
    if (c.control_period == 0) throw DomainError("control_period must be at least 1");

    for (const auto& [id, n] : model.nodes())
      if (n.kind == cgm::NodeKind::LeafTask) c.truth[id] = LeafTruth{};
    if (doc.contains("truth")) read_truth(doc.at("truth"), model, c.truth);
    c.assumed = c.truth;
    if (doc.contains("assumed")) read_truth(doc.at("assumed"), model, c.assumed);

    for (const auto& [id, _] : model.contexts()) c.contexts[id] = true;
    if (doc.contains("contexts")) read_contexts(doc.at("contexts"), model, c.contexts);
    c.assumed_contexts = c.contexts;
    if (doc.contains("assumed_contexts")) read_contexts(doc.at("assumed_contexts"), model, c.assumed_contexts);

    for (const auto& [id, n] : model.nodes())
      if (n.kind == cgm::NodeKind::Placeholder) c.opt[id] = false;
    if (doc.contains("opt")) {
      for (const auto& [id, v] : doc.at("opt").items()) {
        const cgm::Node* n = model.find(id);
        if (!n || n->kind != cgm::NodeKind::Placeholder) throw DomainError("'" + id + "' is not a placeholder");
        c.opt[id] = v.get<bool>();
      }
    }
    if (doc.contains("initial_knobs")) {
      for (const auto& [id, v] : doc.at("initial_knobs").items()) c.initial_knobs[id] = v.get<double>();
    }
    if (doc.contains("degradations")) {
      for (const auto& d : doc.at("degradations")) {
        Degradation g{d.at("t").get<double>(), d.at("node").get<std::string>(), d.at("delta").get<double>()};
        leaves_of(model, g.node);
        c.degradations.push_back(g);
      }
      std::stable_sort(c.degradations.begin(), c.degradations.end(),
                       [](const Degradation& a, const Degradation& b) { return a.t < b.t; });
    }
    if (doc.contains("batteries")) {
      for (const auto& b : doc.at("batteries")) {
        BatterySpec s;
        s.node = b.at("node").get<std::string>();
        s.context = b.at("context").get<std::string>();
        s.level = b.value("level", 1.0);
        s.drain_per_exec = b.value("drain_per_exec", 0.0);
        s.recharge_per_tick = b.value("recharge_per_tick", 0.0);
        leaves_of(model, s.node);
        if (!model.find_context(s.context)) throw DomainError("battery drives unknown context '" + s.context + "'");
        if (s.level < 0 || s.level > 1) throw DomainError("battery level must lie in [0, 1]");
        c.batteries.push_back(s);
      }
    }
    if (doc.contains("vitals_context")) {
      std::string v = doc.at("vitals_context").get<std::string>();
      if (!model.find_context(v)) throw DomainError("vitals drive unknown context '" + v + "'");
      c.vitals_context = v;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario schema error: ") + e.what(), 0);
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path, const cgm::GoalModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), model);
}

// ---------------------------------------------------------------------------

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

World::World(const cgm::GoalModel& model, const ScenarioConfig& config, const runtime::Policy& policy)
    : model_(model),
      config_(config),
      truth_(config.truth),
      contexts_(config.contexts),
      rng_(config.seed),
      vitals_(config.seed ^ 0x9e3779b97f4a7c15ULL) {
  for (const auto& id : model.declaration_order()) {
    const cgm::Node& n = model.node(id);
    if (n.kind != cgm::NodeKind::LeafTask) continue;
    leaves_.push_back(id);
    frequency_[id] = 1.0;
  }
  for (const auto& k : policy.knobs) {
    auto it = config.initial_knobs.find(k.id);
    double v = it == config.initial_knobs.end() ? k.max : it->second;
    knobs_[k.id] = v;
    knob_leaves_[k.id] = k.leaves;
    for (const auto& leaf : k.leaves) frequency_[leaf] = v;
  }
  for (const auto& spec : config.batteries) {
    Battery b{spec, spec.level, spec.level >= kBatteryOff};
    contexts_[spec.context] = b.on;
    for (const auto& leaf : leaves_of(model, spec.node)) leaf_battery_[leaf] = spec.node;
    batteries_.push_back(b);
  }
}

bool World::leaf_active(const std::string& leaf) const {
  for (const cgm::Node* n = &model_.node(leaf); n; n = model_.parent_of(n->id)) {
    for (const auto& c : n->context_refs) {
      auto it = contexts_.find(c);
      if (it != contexts_.end() && !it->second) return false;
    }
  }
  return true;
}

std::vector<telemetry::Event> World::step(double t) {
  std::vector<telemetry::Event> events;
  if (first_) {
    for (const auto& [id, holds] : contexts_) events.push_back(telemetry::Event::context(t, id, holds));
    first_ = false;
  }

  while (next_degradation_ < config_.degradations.size() && config_.degradations[next_degradation_].t <= t) {
    const Degradation& d = config_.degradations[next_degradation_++];
    for (const auto& leaf : leaves_of(model_, d.node)) {
      double& r = truth_[leaf].reliability;
      r = std::clamp(r + d.delta, 0.0, 1.0);
    }
  }

  vitals_.step();
  if (config_.vitals_context) {
    bool ok = vitals_.all_valid();
    bool& cur = contexts_[*config_.vitals_context];
    if (cur != ok) {
      cur = ok;
      events.push_back(telemetry::Event::context(t, *config_.vitals_context, ok));
    }
  }

  std::map<std::string, std::size_t> runs_by_battery;
  for (const auto& leaf : leaves_) {
    const LeafTruth& truth = truth_[leaf];
    double f = frequency_[leaf];
    bool active = leaf_active(leaf);
    std::size_t ran_count = 0;
    for (std::size_t k = 0; k < config_.opportunities_per_tick; ++k) {
      // Four draws per slot regardless of outcome keep the stream aligned
      // across controller decisions.
      double u_slot = unit(rng_), u_gain = unit(rng_), u_ok = unit(rng_), u_cost = unit(rng_);
      if (!active || u_slot >= f) continue;
      bool ran = u_gain < truth.gain;
      bool ok = ran && u_ok < truth.reliability;
      events.push_back(telemetry::Event::exec(t, leaf, ran, ok));
      if (!ran) continue;
      ++ran_count;
      double sample = truth.cost * (1.0 + config_.cost_noise * (2.0 * u_cost - 1.0));
      events.push_back(telemetry::Event::cost(t, leaf, sample));
    }
    if (auto it = leaf_battery_.find(leaf); it != leaf_battery_.end()) runs_by_battery[it->second] += ran_count;
  }

  for (auto& b : batteries_) {
    if (b.on) {
      b.level = std::max(0.0, b.level - b.spec.drain_per_exec * static_cast<double>(runs_by_battery[b.spec.node]));
      if (b.level < kBatteryOff) {
        b.on = false;
        contexts_[b.spec.context] = false;
        events.push_back(telemetry::Event::context(t, b.spec.context, false));
      }
    } else {
      b.level = std::min(1.0, b.level + b.spec.recharge_per_tick);
      if (b.level >= kBatteryOn) {
        b.on = true;
        contexts_[b.spec.context] = true;
        events.push_back(telemetry::Event::context(t, b.spec.context, true));
      }
    }
  }
  return events;
}

void World::apply(const std::vector<telemetry::Command>& commands) {
  for (const auto& c : commands) {
    auto it = knob_leaves_.find(c.knob);
    if (it == knob_leaves_.end()) throw DomainError("unknown knob '" + c.knob + "'");
    knobs_[c.knob] = c.value;
    for (const auto& leaf : it->second) frequency_[leaf] = c.value;
  }
}

sym::Bindings World::truth() const {
  sym::Bindings b;
  for (const auto& leaf : leaves_) {
    const LeafTruth& t = truth_.at(leaf);
    b[naming::reliability(leaf)] = t.reliability;
    b[naming::frequency(leaf)] = std::clamp(frequency_.at(leaf) * t.gain, 0.0, 1.0);
    b[naming::cost(leaf)] = t.cost;
  }
  for (const auto& [id, holds] : contexts_) b[naming::context(id)] = holds ? 1.0 : 0.0;
  for (const auto& [id, present] : config_.opt) b[naming::opt(id)] = present ? 1.0 : 0.0;
  return b;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t p = line.find(sep, start);
    out.emplace_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

}  // namespace

std::string TimeSeries::to_csv() const {
  std::string out = "t,reliability,cost";
  for (const auto& c : context_ids) out += "," + c;
  for (const auto& k : knob_ids) out += "," + k;
  out += "\n";
  for (const auto& r : rows) {
    out += fmt("%.3f", r.t) + "," + fmt("%.9f", r.reliability) + "," + fmt("%.9f", r.cost);
    for (int c : r.contexts) out += "," + std::to_string(c);
    for (double k : r.knobs) out += "," + fmt("%.3f", k);
    out += "\n";
  }
  return out;
}

TimeSeries TimeSeries::from_csv(std::string_view text) {
  TimeSeries ts;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty time series", 0);
  auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "t" || header[1] != "reliability" || header[2] != "cost") {
    throw ParseError("time series must start with t,reliability,cost", 0);
  }
  ts.knob_ids.assign(header.begin() + 3, header.end());
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size()) throw ParseError("ragged time series row", offset);
    TickRecord r;
    try {
      r.t = std::stod(cells[0]);
      r.reliability = std::stod(cells[1]);
      r.cost = std::stod(cells[2]);
      for (std::size_t i = 3; i < cells.size(); ++i) r.knobs.push_back(std::stod(cells[i]));
    } catch (const std::exception&) {
      throw ParseError("non-numeric time series cell", offset);
    }
    ts.rows.push_back(std::move(r));
    offset += line.size() + 1;
  }
  return ts;
}

TimeSeries run(const ScenarioConfig& config, const runtime::Policy& policy, const cgm::GoalModel& model,
               Mode mode) {
  const runtime::Property* rel = nullptr;
  const runtime::Property* cost = nullptr;
  for (const auto& p : policy.properties) {
    if (p.metric == runtime::Metric::Reliability && !rel) rel = &p;
    if (p.metric == runtime::Metric::Cost && !cost) cost = &p;
  }
  if (!rel || !cost) throw DomainError("simulation needs a policy with a reliability and a cost property");
  auto rel_forms = compiler::compose_node_form(model, rel->goal);
  auto cost_forms = cost->goal == rel->goal ? rel_forms : compiler::compose_node_form(model, cost->goal);

  World world(model, config, policy);
  runtime::Controller controller(model, policy);
  runtime::KnowledgeState state(model, config.window);
  for (const auto& [leaf, a] : config.assumed) state.set_estimate(leaf, a.reliability, a.cost, a.gain);
  for (const auto& [id, holds] : config.assumed_contexts) state.set_context(id, holds);
  for (const auto& [id, present] : config.opt) state.set_opt(id, present);
  for (const auto& k : policy.knobs)
    for (const auto& leaf : k.leaves) state.set_frequency(leaf, world.knobs().at(k.id));

  TimeSeries ts;
  for (const auto& [id, _] : model.contexts()) ts.context_ids.push_back(id);
  for (const auto& k : policy.knobs) ts.knob_ids.push_back(k.id);

  auto ticks = static_cast<std::size_t>(std::floor(config.duration / config.tick + 1e-9));
  for (std::size_t k = 1; k <= ticks; ++k) {
    double t = static_cast<double>(k) * config.tick;
    auto events = world.step(t);
    if (mode == Mode::Tamed) state.ingest(events);
    state.set_time(t);
    if ((k - 1) % config.control_period == 0) {
      auto act = controller.plan(state);
      auto commands = controller.execute(act, state, t);
      controller.apply(commands, state);
      world.apply(commands);
    }
    sym::Bindings truth = world.truth();
    TickRecord r;
    r.t = t;
    r.reliability = rel_forms.P.evaluate(truth);
    r.cost = cost_forms.Cost.evaluate(truth);
    for (const auto& id : ts.context_ids) r.contexts.push_back(world.contexts().at(id) ? 1 : 0);
    for (const auto& id : ts.knob_ids) r.knobs.push_back(world.knobs().at(id));
    ts.rows.push_back(std::move(r));
  }
  return ts;
}

double mean_distance(const std::vector<double>& xs, double setpoint) {
  if (xs.empty()) return 0;
  double sum = 0;
  for (double x : xs) sum += std::abs(x - setpoint);
  return sum / static_cast<double>(xs.size());
}

Metrics metrics(const TimeSeries& tamed, const TimeSeries& untamed, double reliability_setpoint,
                double cost_setpoint) {
  if (tamed.rows.size() != untamed.rows.size()) {
    throw DomainError("time series differ in length (" + std::to_string(tamed.rows.size()) + " vs " +
                      std::to_string(untamed.rows.size()) + " rows)");
  }
  auto column = [](const TimeSeries& ts, bool reliability) {
    std::vector<double> out;
    for (const auto& r : ts.rows) out.push_back(reliability ? r.reliability : r.cost);
    return out;
  };
  auto ratio = [](double u, double t) {
    if (t == 0) return u == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    return u / t;
  };
  Metrics m;
  m.d_tamed_reliability = mean_distance(column(tamed, true), reliability_setpoint);
  m.d_untamed_reliability = mean_distance(column(untamed, true), reliability_setpoint);
  m.d_tamed_cost = mean_distance(column(tamed, false), cost_setpoint);
  m.d_untamed_cost = mean_distance(column(untamed, false), cost_setpoint);
  m.e_r = ratio(m.d_untamed_reliability, m.d_tamed_reliability);
  m.e_c = ratio(m.d_untamed_cost, m.d_tamed_cost);
  return m;
}

double in_band_fraction(const TimeSeries& ts, double reliability_setpoint, double reliability_margin,
                        double cost_setpoint, double cost_margin, double after) {
  std::size_t total = 0, inside = 0;
  for (const auto& r : ts.rows) {
    if (r.t <= after) continue;
    ++total;
    bool rel_ok = std::abs(r.reliability - reliability_setpoint) <= reliability_margin * reliability_setpoint;
    bool cost_ok = std::abs(r.cost - cost_setpoint) <= cost_margin * cost_setpoint;
    if (rel_ok && cost_ok) ++inside;
  }
  return total == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(total);
}

std::string format_ratio(double x) {
  if (std::isinf(x)) return "inf";
  return fmt("%.6f", x);
}

}  // namespace goalc::bsnsim
