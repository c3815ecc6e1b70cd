#include "goalc/runtime.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "goalc/naming.hpp"

namespace goalc::runtime {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Knowledge

KnowledgeState::KnowledgeState(const cgm::GoalModel& model, std::size_t window)
    : window_(window == 0 ? 1 : window) {
  for (const auto& [id, n] : model.nodes()) {
    if (n.kind == cgm::NodeKind::LeafTask) leaves_[id] = LeafEstimate{};
    if (n.kind == cgm::NodeKind::Placeholder) opts_[id] = false;
    for (const auto& c : n.context_refs) contexts_[c] = true;
  }
  for (const auto& [id, c] : model.contexts()) contexts_.try_emplace(id, true);
}

const LeafEstimate& KnowledgeState::leaf(const std::string& id) const {
  auto it = leaves_.find(id);
  if (it == leaves_.end()) throw DomainError("unknown leaf '" + id + "'");
  return it->second;
}

void KnowledgeState::set_estimate(const std::string& leaf_id, double reliability, double cost, double gain) {
  auto it = leaves_.find(leaf_id);
  if (it == leaves_.end()) throw DomainError("unknown leaf '" + leaf_id + "'");
  it->second.reliability = reliability;
  it->second.cost = cost;
  it->second.gain = gain;
}

void KnowledgeState::set_frequency(const std::string& leaf_id, double f) {
  auto it = leaves_.find(leaf_id);
  if (it == leaves_.end()) throw DomainError("unknown leaf '" + leaf_id + "'");
  it->second.frequency = f;
}

void KnowledgeState::set_context(const std::string& id, bool holds) { contexts_[id] = holds; }

void KnowledgeState::set_opt(const std::string& placeholder_id, bool present) {
  opts_[placeholder_id] = present;
}

std::size_t KnowledgeState::ingest(const std::vector<telemetry::Event>& events) {
  std::size_t skipped = 0;
  auto push = [this](auto& window, auto value) {
    window.push_back(value);
    if (window.size() > window_) window.pop_front();
  };
  std::set<std::string> touched;
  for (const auto& e : events) {
    time_ = std::max(time_, e.t);
    if (e.kind == telemetry::EventKind::Context) {
      if (!contexts_.count(e.id)) {
        ++skipped;
        continue;
      }
      contexts_[e.id] = e.value != 0.0;
      continue;
    }
    auto it = leaves_.find(e.id);
    if (it == leaves_.end()) {
      ++skipped;
      continue;
    }
    LeafEstimate& est = it->second;
    if (e.kind == telemetry::EventKind::Exec) {
      push(est.slots, e.ran);
      if (e.ran) push(est.successes, e.success);
    } else {
      if (!(e.value >= 0.0)) {
        ++skipped;
        continue;
      }
      push(est.costs, e.value);
    }
    touched.insert(e.id);
  }
  for (const auto& id : touched) {
    LeafEstimate& est = leaves_[id];
    if (!est.successes.empty()) {
      est.reliability = static_cast<double>(std::count(est.successes.begin(), est.successes.end(), true)) /
                        static_cast<double>(est.successes.size());
    }
    if (!est.slots.empty()) {
      est.gain = static_cast<double>(std::count(est.slots.begin(), est.slots.end(), true)) /
                 static_cast<double>(est.slots.size());
    }
    if (!est.costs.empty()) {
      double sum = 0;
      for (double c : est.costs) sum += c;
      est.cost = sum / static_cast<double>(est.costs.size());
    }
  }
  return skipped;
}

sym::Bindings KnowledgeState::bindings() const {
  sym::Bindings b;
  for (const auto& [id, est] : leaves_) {
    b[naming::reliability(id)] = est.reliability;
    b[naming::frequency(id)] = std::clamp(est.frequency * est.gain, 0.0, 1.0);
    b[naming::cost(id)] = est.cost;
  }
  for (const auto& [id, holds] : contexts_) b[naming::context(id)] = holds ? 1.0 : 0.0;
  for (const auto& [id, present] : opts_) b[naming::opt(id)] = present ? 1.0 : 0.0;
  return b;
}

// ---------------------------------------------------------------------------
// Policy

std::size_t Knob::count() const {
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

double Knob::value(std::size_t i) const { return std::min(max, min + static_cast<double>(i) * step); }

std::size_t Knob::nearest(double v) const {
  double i = std::round((v - min) / step);
  if (i < 0) return 0;
  return std::min(static_cast<std::size_t>(i), count() - 1);
}

namespace {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      out.emplace_back(1, c);
      ++i;
    } else if (c == '&' || c == '|') {
      std::size_t j = i;
      while (j < text.size() && text[j] == c) ++j;
      out.push_back(c == '&' ? "AND" : "OR");
      i = j;
    } else if (std::isalnum(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
      std::string word(text.substr(i, j - i));
      for (auto& ch : word) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      out.push_back(word);
      i = j;
    } else {
      throw ParseError("unexpected character in combination", i);
    }
  }
  return out;
}

}  // namespace

Combination Combination::parse(std::string_view text, std::size_t properties) {
  Combination c;
  c.text_ = std::string(text);
  auto tokens = tokenize(text);
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("combination '" + std::string(text) + "': " + msg, pos);
  };
  // Recursive descent straight into reverse Polish form.
  std::function<void()> expr, term, atom;
  atom = [&] {
    if (pos >= tokens.size()) fail("unexpected end");
    const std::string& t = tokens[pos];
    if (t == "(") {
      ++pos;
      expr();
      if (pos >= tokens.size() || tokens[pos] != ")") fail("missing ')'");
      ++pos;
      return;
    }
    if (!std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      fail("expected a property number, got '" + t + "'");
    }
    std::size_t k = std::stoul(t);
    if (k < 1 || k > properties) fail("property " + t + " does not exist");
    c.rpn_.push_back(Item{Item::Atom, k - 1});
    ++pos;
  };
  term = [&] {
    atom();
    while (pos < tokens.size() && tokens[pos] == "AND") {
      ++pos;
      atom();
      c.rpn_.push_back(Item{Item::And, 0});
    }
  };
  expr = [&] {
    term();
    while (pos < tokens.size() && tokens[pos] == "OR") {
      ++pos;
      term();
      c.rpn_.push_back(Item{Item::Or, 0});
    }
  };
  expr();
  if (pos != tokens.size()) fail("trailing input");
  return c;
}

Combination Combination::all_of(std::size_t properties) {
  std::string text;
  for (std::size_t i = 1; i <= properties; ++i) {
    if (i > 1) text += " AND ";
    text += "(" + std::to_string(i) + ")";
  }
  if (properties == 0) {
    Combination c;
    return c;
  }
  return parse(text, properties);
}

bool Combination::evaluate(const std::vector<bool>& holds) const {
  if (rpn_.empty()) return true;
  std::vector<bool> stack;
  for (const auto& item : rpn_) {
    if (item.kind == Item::Atom) {
      stack.push_back(holds.at(item.index));
      continue;
    }
    bool b = stack.back();
    stack.pop_back();
    bool a = stack.back();
    stack.pop_back();
    stack.push_back(item.kind == Item::And ? (a && b) : (a || b));
  }
  return stack.back();
}

Policy Policy::parse(std::string_view text, const cgm::GoalModel& model) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed policy JSON: ") + e.what(), e.byte);
  }
  Policy p;
  try {
    for (const auto& jp : doc.at("properties")) {
      Property prop;
      std::string metric = jp.at("metric").get<std::string>();
      for (auto& ch : metric) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (metric == "reliability") {
        prop.metric = Metric::Reliability;
      } else if (metric == "cost") {
        prop.metric = Metric::Cost;
      } else {
        throw DomainError("unknown policy metric '" + metric + "'");
      }
      prop.goal = jp.at("goal").get<std::string>();
      prop.setpoint = jp.at("setpoint").get<double>();
      prop.margin = jp.at("margin").get<double>();
      if (!model.contains(prop.goal)) throw DomainError("policy goal '" + prop.goal + "' is not in the model");
      if (!(prop.margin > 0)) throw DomainError("policy margin must be positive");
      p.properties.push_back(prop);
    }
    if (doc.contains("combination") && !doc.at("combination").get<std::string>().empty()) {
      p.combination = Combination::parse(doc.at("combination").get<std::string>(), p.properties.size());
    } else {
      p.combination = Combination::all_of(p.properties.size());
    }
    std::set<std::string> claimed;
    for (const auto& jk : doc.at("knobs")) {
      Knob k;
      k.id = jk.at("id").get<std::string>();
      k.min = jk.at("min").get<double>();
      k.max = jk.at("max").get<double>();
      k.step = jk.at("step").get<double>();
      if (!(k.min <= k.max)) throw DomainError("knob '" + k.id + "' has min > max");
      if (!(k.step > 0)) throw DomainError("knob '" + k.id + "' needs a positive step");
      if (k.min < 0 || k.max > 1) throw DomainError("knob '" + k.id + "' must stay within [0, 1]");
      if (model.contains(k.id)) {
        for (const cgm::Node* leaf : model.leaves_under(k.id))
          if (leaf->kind == cgm::NodeKind::LeafTask) k.leaves.push_back(leaf->id);
      } else {
        for (const auto& [id, n] : model.nodes())
          if (n.leaf_params && n.leaf_params->frequency == k.id) k.leaves.push_back(id);
      }
      if (k.leaves.empty()) throw DomainError("knob '" + k.id + "' controls no leaf task");
      for (const auto& leaf : k.leaves) {
        if (!claimed.insert(leaf).second) throw DomainError("leaf '" + leaf + "' is controlled by two knobs");
      }
      p.knobs.push_back(std::move(k));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("policy schema error: ") + e.what(), 0);
  }
  std::sort(p.knobs.begin(), p.knobs.end(), [](const Knob& a, const Knob& b) { return a.id < b.id; });
  return p;
}

Policy Policy::load(const std::string& path, const cgm::GoalModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read policy file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), model);
}

// ---------------------------------------------------------------------------
// Controller

namespace {

// A formula with every non-knob parameter fixed: a polynomial in the knob
// values with double coefficients.
struct Reduced {
  std::size_t knobs = 0;
  std::vector<double> coeff;
  std::vector<std::uint8_t> exps;  // knobs entries per term
  std::uint8_t max_exp = 0;

  double eval(const std::vector<const double*>& powers) const {
    double total = 0;
    for (std::size_t t = 0; t < coeff.size(); ++t) {
      double v = coeff[t];
      const std::uint8_t* e = &exps[t * knobs];
      for (std::size_t j = 0; j < knobs; ++j)
        if (e[j]) v *= powers[j][e[j]];
      total += v;
    }
    return total;
  }
};

Reduced reduce(const sym::SymExpr& expr, const sym::Bindings& b,
               const std::map<std::string, std::pair<std::size_t, double>>& knob_of, std::size_t knobs) {
  std::map<std::vector<std::uint8_t>, double> acc;
  for (const auto& [mono, c] : expr.terms()) {
    double v = static_cast<double>(c);
    std::vector<std::uint8_t> e(knobs, 0);
    for (const auto& [name, k] : mono.factors()) {
      if (auto it = knob_of.find(name); it != knob_of.end()) {
        e[it->second.first] = static_cast<std::uint8_t>(e[it->second.first] + k);
        v *= std::pow(it->second.second, k);
        continue;
      }
      auto bit = b.find(name);
      if (bit == b.end()) throw MissingBinding(name);
      v *= std::pow(bit->second, k);
    }
    if (v != 0.0) acc[e] += v;
  }
  Reduced r;
  r.knobs = knobs;
  for (const auto& [e, v] : acc) {
    r.coeff.push_back(v);
    r.exps.insert(r.exps.end(), e.begin(), e.end());
    for (auto x : e) r.max_exp = std::max(r.max_exp, x);
  }
  return r;
}

unsigned worker_count(unsigned requested) {
  if (requested) return requested;
  if (const char* env = std::getenv("GOALC_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

Controller::Controller(const cgm::GoalModel& model, Policy policy, ControllerOptions options)
    : model_(model), policy_(std::move(policy)), options_(options) {
  for (const auto& prop : policy_.properties) {
    if (!forms_.count(prop.goal)) forms_.emplace(prop.goal, compiler::compose_node_form(model_, prop.goal));
  }
}

const sym::SymExpr& Controller::formula(std::size_t i) const {
  const Property& p = policy_.properties.at(i);
  const auto& f = forms_.at(p.goal);
  return p.metric == Metric::Reliability ? f.P : f.Cost;
}

Analysis Controller::judge(const std::vector<double>& values) const {
  Analysis a;
  a.values = values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Property& p = policy_.properties[i];
    double err = values[i] - p.setpoint;
    a.errors.push_back(err);
    a.in_margin.push_back(std::abs(err) <= p.margin * p.setpoint);
    a.objective += p.setpoint != 0 ? std::abs(err) / std::abs(p.setpoint) : std::abs(err);
  }
  a.satisfied = policy_.combination.evaluate(a.in_margin);
  return a;
}

Analysis Controller::analyze(const KnowledgeState& state) const {
  sym::Bindings b = state.bindings();
  std::vector<double> values;
  for (std::size_t i = 0; i < policy_.properties.size(); ++i) values.push_back(formula(i).evaluate(b));
  return judge(values);
}

std::map<std::string, double> Controller::knob_values(const KnowledgeState& state) const {
  std::map<std::string, double> out;
  for (const auto& k : policy_.knobs) out[k.id] = state.leaf(k.leaves.front()).frequency;
  return out;
}

Actuation Controller::plan(const KnowledgeState& state) const {
  Analysis now = analyze(state);
  Actuation act;
  act.assignments = knob_values(state);
  act.predicted = now.values;
  act.objective = now.objective;
  act.feasible = now.satisfied;
  act.identity = true;
  if (now.satisfied || policy_.knobs.empty()) return act;

  const auto& knobs = policy_.knobs;
  std::size_t K = knobs.size();
  std::size_t total = 1;
  for (const auto& k : knobs) {
    std::size_t n = k.count();
    if (total > options_.max_candidates / n) {
      throw DomainError("plan grid exceeds " + std::to_string(options_.max_candidates) + " candidates");
    }
    total *= n;
  }

  sym::Bindings b = state.bindings();
  std::map<std::string, std::pair<std::size_t, double>> knob_of;
  for (std::size_t j = 0; j < K; ++j) {
    for (const auto& leaf : knobs[j].leaves) {
      knob_of[naming::frequency(leaf)] = {j, state.leaf(leaf).gain};
    }
  }
  std::vector<Reduced> reduced;
  std::uint8_t max_exp = 1;
  for (std::size_t i = 0; i < policy_.properties.size(); ++i) {
    reduced.push_back(reduce(formula(i), b, knob_of, K));
    max_exp = std::max(max_exp, reduced.back().max_exp);
  }

  // powers[j][i][e] = value_i(knob j)^e
  std::vector<std::vector<std::vector<double>>> table(K);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t i = 0; i < knobs[j].count(); ++i) {
      std::vector<double> pw(max_exp + 1, 1.0);
      for (std::size_t e = 1; e <= max_exp; ++e) pw[e] = pw[e - 1] * knobs[j].value(i);
      table[j].push_back(std::move(pw));
    }
  }

  struct Best {
    std::size_t index = SIZE_MAX;
    bool feasible = false;
    double objective = 0;
    std::vector<double> values;
  };
  auto better = [](const Best& a, const Best& b) {
    if (b.index == SIZE_MAX) return a.index != SIZE_MAX;
    if (a.feasible != b.feasible) return a.feasible;
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.index < b.index;
  };

  auto search = [&](std::size_t begin, std::size_t end) {
    Best best;
    std::vector<std::size_t> digit(K);
    std::size_t rest = begin;
    for (std::size_t j = K; j-- > 0;) {
      digit[j] = rest % knobs[j].count();
      rest /= knobs[j].count();
    }
    std::vector<const double*> powers(K);
    std::vector<double> values(reduced.size());
    for (std::size_t n = begin; n < end; ++n) {
      for (std::size_t j = 0; j < K; ++j) powers[j] = table[j][digit[j]].data();
      for (std::size_t i = 0; i < reduced.size(); ++i) values[i] = reduced[i].eval(powers);
      Analysis a = judge(values);
      Best cand{n, a.satisfied, a.objective, {}};
      if (better(cand, best)) {
        cand.values = values;
        best = std::move(cand);
      }
      for (std::size_t j = K; j-- > 0;) {
        if (++digit[j] < knobs[j].count()) break;
        digit[j] = 0;
      }
    }
    return best;
  };

  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(options_.threads), total));
  Best best;
  if (workers <= 1 || total < 4096) {
    best = search(0, total);
  } else {
    std::vector<Best> partial(workers);
    std::vector<std::thread> pool;
    std::size_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      std::size_t lo = std::min(total, w * chunk);
      std::size_t hi = std::min(total, lo + chunk);
      pool.emplace_back([&, w, lo, hi] { partial[w] = search(lo, hi); });
    }
    for (auto& t : pool) t.join();
    for (auto& p : partial)
      if (better(p, best)) best = std::move(p);
  }

  std::size_t rest = best.index;
  std::vector<std::size_t> digit(K);
  for (std::size_t j = K; j-- > 0;) {
    digit[j] = rest % knobs[j].count();
    rest /= knobs[j].count();
  }
  act.assignments.clear();
  for (std::size_t j = 0; j < K; ++j) act.assignments[knobs[j].id] = knobs[j].value(digit[j]);
  act.predicted = best.values;
  act.objective = best.objective;
  act.feasible = best.feasible;
  act.identity = act.assignments == knob_values(state);
  return act;
}

std::vector<telemetry::Command> Controller::execute(const Actuation& actuation, const KnowledgeState& state,
                                                    double t) const {
  std::vector<telemetry::Command> out;
  if (actuation.identity) return out;
  auto current = knob_values(state);
  for (const auto& [id, value] : actuation.assignments) {
    auto it = current.find(id);
    if (it != current.end() && it->second == value) continue;
    out.push_back(telemetry::Command{t, id, value});
  }
  return out;
}

void Controller::apply(const std::vector<telemetry::Command>& commands, KnowledgeState& state) const {
  for (const auto& c : commands) {
    auto it = std::find_if(policy_.knobs.begin(), policy_.knobs.end(),
                           [&](const Knob& k) { return k.id == c.knob; });
    if (it == policy_.knobs.end()) throw DomainError("unknown knob '" + c.knob + "'");
    for (const auto& leaf : it->leaves) state.set_frequency(leaf, c.value);
  }
}

}  // namespace goalc::runtime
