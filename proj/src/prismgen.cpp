#include "goalc/prismgen.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "goalc/naming.hpp"

namespace goalc::prismgen {

namespace {

std::string product(const std::vector<std::string>& factors) {
  std::string out;
  for (const auto& f : factors) {
    if (!out.empty()) out += '*';
    out += f;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void final_states(std::ostream& os, const std::string& s, int x) {
  os << "  [next" << x + 1 << "] " << s << " = 2 -> (" << s << "'=2); //final state success\n";
  os << "  [next" << x + 1 << "] " << s << " = 3 -> (" << s << "'=3); //final state skipped\n";
  os << "  [next" << x + 1 << "] " << s << " = 4 -> (" << s << "'=4); //final state failure\n";
}

const std::vector<std::string>& operands(const cgm::Node& n) {
  return n.dm_annotation ? *n.dm_annotation : n.children;
}

// Index assignment for one emission.
class Layout {
 public:
  Layout(const cgm::GoalModel& model, const std::string& goal) : model_(model), goal_(goal) {
    order_ = model.subtree(goal);
    std::set<std::string> dm_children;
    for (const cgm::Node* n : order_) {
      if (n->dm_annotation) dm_children.insert(n->dm_annotation->begin(), n->dm_annotation->end());
    }
    std::map<std::string, std::string> shared;  // context set -> const gate
    int leaves = 0;
    int gates = 0;
    int x = 0;
    for (const cgm::Node* n : order_) {
      if (n->is_leaf()) leaf_index_[n->id] = ++leaves;
      if (n->is_leaf() || n->dm_annotation) module_x_[n->id] = ++x;
      if (n->context_refs.empty()) continue;
      if (dm_children.count(n->id) && n->id != goal) {
        std::string g = "c" + std::to_string(++gates);
        gate_[n->id] = g;
        global_.insert(g);
        owners_[g].push_back(n->id);
      } else {
        std::vector<std::string> refs = n->context_refs;
        std::sort(refs.begin(), refs.end());
        std::string key = join(refs, ",");
        auto it = shared.find(key);
        if (it == shared.end()) it = shared.emplace(key, "c" + std::to_string(++gates)).first;
        gate_[n->id] = it->second;
        owners_[it->second].push_back(n->id);
      }
      if (n->context_refs.size() == 1) {
        std::string alias = naming::sanitize(n->context_refs.front());
        if (!reserved(alias) && !alias_.count(alias)) alias_[alias] = gate_[n->id];
      }
    }
    modules_ = static_cast<std::size_t>(x);
  }

  const cgm::GoalModel& model() const { return model_; }
  const std::string& goal() const { return goal_; }
  const std::vector<const cgm::Node*>& order() const { return order_; }
  std::size_t modules() const { return modules_; }

  int leaf(const std::string& id) const { return leaf_index_.at(id); }
  int x(const std::string& id) const { return module_x_.at(id); }
  const std::string* gate(const std::string& id) const {
    auto it = gate_.find(id);
    return it == gate_.end() ? nullptr : &it->second;
  }
  bool is_global(const std::string& g) const { return global_.count(g) != 0; }
  const std::vector<std::string>& owners(const std::string& g) const { return owners_.at(g); }
  const std::map<std::string, std::string>& aliases() const { return alias_; }

  /// Gates from the emission root down to `id`, in that order, deduplicated.
  std::vector<std::string> gates_above(const std::string& id) const {
    std::vector<std::string> chain;
    for (const cgm::Node* n = &model_.node(id);; n = model_.parent_of(n->id)) {
      if (const std::string* g = gate(n->id)) chain.push_back(*g);
      if (n->id == goal_ || !model_.parent_of(n->id)) break;
    }
    std::reverse(chain.begin(), chain.end());
    std::vector<std::string> out;
    for (const auto& g : chain)
      if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    return out;
  }

  /// State test "the context of `id` holds".
  std::string condition(const cgm::Node& n) const {
    const std::string& g = *gate(n.id);
    if (n.context_refs.size() == 1) {
      std::string alias = naming::sanitize(n.context_refs.front());
      auto it = alias_.find(alias);
      if (it != alias_.end() && it->second == g) return alias + "=1";
    }
    return g + "=1";
  }

 private:
  static bool reserved(const std::string& name) {
    static const std::regex pattern("^((c|r|f|w|s|N|OPT|CTX_|next)[0-9]+|s_.*|NonDeterminism_.*|mdp|module|endmodule|global|const|formula|rewards|endrewards|true|false|min|max|floor|ceil|pow|mod|log|int|double|bool)$");
    return std::regex_match(name, pattern);
  }

  const cgm::GoalModel& model_;
  std::string goal_;
  std::vector<const cgm::Node*> order_;
  std::map<std::string, int> leaf_index_;
  std::map<std::string, int> module_x_;
  std::map<std::string, std::string> gate_;
  std::set<std::string> global_;
  std::map<std::string, std::vector<std::string>> owners_;
  std::map<std::string, std::string> alias_;
  std::size_t modules_ = 0;
};

std::string state_test(int index, int value) {
  return "s" + std::to_string(index) + "=" + std::to_string(value);
}

std::string skipped(const Layout& L, const cgm::Node& n) {
  std::vector<std::string> parts;
  for (const cgm::Node* leaf : L.model().leaves_under(n.id)) parts.push_back(state_test(L.leaf(leaf->id), 3));
  return parts.size() == 1 ? parts.front() : "(" + join(parts, " & ") + ")";
}

std::string phi(const Layout& L, const cgm::Node& n, bool dm_child) {
  std::string core;
  if (n.kind == cgm::NodeKind::LeafTask) {
    core = state_test(L.leaf(n.id), 2);
  } else if (n.kind == cgm::NodeKind::Placeholder) {
    int i = L.leaf(n.id);
    core = "(" + state_test(i, 2) + " | " + state_test(i, 3) + ")";
  } else {
    std::set<std::string> dm_ops;
    if (n.dm_annotation) dm_ops.insert(n.dm_annotation->begin(), n.dm_annotation->end());
    std::vector<std::string> parts;
    for (const auto& k : operands(n)) parts.push_back(phi(L, L.model().node(k), dm_ops.count(k) != 0));
    const char* op = n.decomposition == cgm::Decomposition::Or ? " | " : " & ";
    core = parts.size() == 1 ? parts.front() : "(" + join(parts, op) + ")";
  }
  if (!L.gate(n.id)) return core;
  std::string not_ctx = "(!(" + L.condition(n) + ") & " + skipped(L, n) + ")";
  if (dm_child) return "(" + core + " | " + not_ctx + ")";
  return "(" + not_ctx + " | " + core + ")";
}

std::string emit_placeholder_module(int index, int x,
                                    const std::vector<std::string>& gates) {
  std::string s = "s" + std::to_string(index);
  std::vector<std::string> factors = gates;
  factors.push_back("OPT" + std::to_string(index));
  std::string p = product(factors);
  std::ostringstream os;
  os << "module N" << index << "\n";
  os << "  " << s << " :[0..4] init 0;\n";
  os << "  //init to running if the resource exists, otherwise skipped\n";
  os << "  [next" << x << "] " << s << " = 0 -> " << p << " : (" << s << "'=1)+(1-" << p << ") : (" << s
     << "'=3);\n";
  os << "  [] " << s << " = 1 -> (" << s << "'=2); //running to final state\n";
  final_states(os, s, x);
  os << "endmodule\n";
  return os.str();
}

}  // namespace

std::string emit_leaf_module(const cgm::Node& leaf, int index, int x,
                             const std::vector<std::string>& gates) {
  if (leaf.kind != cgm::NodeKind::LeafTask) {
    throw DomainError("leaf module requested for non-leaf node '" + leaf.id + "'");
  }
  std::string i = std::to_string(index);
  std::string s = "s" + i;
  std::vector<std::string> factors = gates;
  factors.push_back("f" + i);
  std::string p = product(factors);
  std::ostringstream os;
  os << "module N" << i << "\n";
  os << "  " << s << " :[0..4] init 0;\n";
  os << "  //init to running or to skipped\n";
  os << "  [next" << x << "] " << s << " = 0 -> " << p << " : (" << s << "'=1)+(1-" << p << ") : (" << s
     << "'=3);\n";
  os << "  [] " << s << " = 1 -> r" << i << " : (" << s << "'=2) + (1 - r" << i << ") : (" << s
     << "'=4); //running to final state\n";
  final_states(os, s, x);
  os << "endmodule\n";
  return os.str();
}

std::string emit_dm_module(const cgm::Node& node, const std::vector<std::string>& child_gates,
                           int first_ctx, int x) {
  std::size_t k = child_gates.size();
  if (k == 0) throw DomainError("DM node '" + node.id + "' has no operands");
  if (k > kMaxDmChildren) {
    throw DomainError("DM node '" + node.id + "' has " + std::to_string(k) + " operands; at most " +
                      std::to_string(kMaxDmChildren) + " are supported");
  }
  std::size_t subsets = (std::size_t{1} << k) - 1;
  std::size_t final_state = subsets + 2;
  std::string s = "s_" + naming::sanitize(node.id);
  std::ostringstream os;
  os << "module NonDeterminism_" << naming::sanitize(node.id) << "\n";
  os << "  " << s << " :[0.." << final_state << "] init 0;\n";
  os << "  [next" << x << "] " << s << " = 0 -> (" << s << "'=1);\n";
  for (std::size_t m = 1; m <= subsets; ++m) {
    std::string ctx = "CTX_" + std::to_string(first_ctx + static_cast<int>(m) - 1);
    os << "  [] " << s << " = 1 -> " << ctx << " : (" << s << "'=" << m + 1 << ") + (1 - " << ctx << ") : ("
       << s << "'=1);\n";
  }
  os << "  [] " << s << " = 1 -> (" << s << "'=" << final_state << "); //no uncertainty holding\n";
  os << "  //enable the correspondent tasks\n";
  for (std::size_t m = 1; m <= subsets; ++m) {
    os << "  [] " << s << " = " << m + 1 << " -> (" << s << "'=" << final_state << ")";
    for (std::size_t j = 0; j < k; ++j)
      if (m & (std::size_t{1} << j)) os << " & (" << child_gates[j] << "'=1)";
    os << ";\n";
  }
  os << "  [next" << x + 1 << "] " << s << " = " << final_state << " -> (" << s << "'=" << final_state
     << ");\n";
  os << "endmodule\n";
  return os.str();
}

Emission emit(const cgm::GoalModel& model, const std::string& goal_id) {
  Layout L(model, goal_id);
  Emission out;
  out.modules = L.modules();
  std::set<std::string> declared;
  std::ostringstream os;
  os << "mdp\n";
  int ctx = 0;

  auto declare_const_gates = [&](const std::vector<std::string>& gates) {
    for (const auto& g : gates) {
      if (L.is_global(g) || !declared.insert(g).second) continue;
      os << "const int " << g << "; //context condition of " << join(L.owners(g), ", ") << "\n";
    }
  };

  for (const cgm::Node* n : L.order()) {
    if (n->dm_annotation) {
      const auto& ops = *n->dm_annotation;
      if (ops.size() > kMaxDmChildren) {
        throw DomainError("DM node '" + n->id + "' has " + std::to_string(ops.size()) +
                          " operands; at most " + std::to_string(kMaxDmChildren) + " are supported");
      }
      std::vector<std::string> gates;
      for (const auto& k : ops) gates.push_back(*L.gate(k));
      std::size_t subsets = (std::size_t{1} << ops.size()) - 1;
      os << "\n";
      for (std::size_t m = 1; m <= subsets; ++m) {
        std::vector<std::string> names;
        for (std::size_t j = 0; j < ops.size(); ++j)
          if (m & (std::size_t{1} << j)) names.push_back(ops[j]);
        os << "const int CTX_" << ctx + static_cast<int>(m) << "; //context condition of " << join(names, " & ")
           << "\n";
      }
      os << "\n";
      for (std::size_t j = 0; j < ops.size(); ++j) {
        if (!declared.insert(gates[j]).second) continue;
        os << "global " << gates[j] << ": [0..1] init 0; //variable that enables " << ops[j] << "\n";
      }
      os << emit_dm_module(*n, gates, ctx + 1, L.x(n->id));
      ctx += static_cast<int>(subsets);
      continue;
    }
    if (!n->is_leaf()) continue;
    int i = L.leaf(n->id);
    std::vector<std::string> gates = L.gates_above(n->id);
    os << "\n";
    declare_const_gates(gates);
    if (n->kind == cgm::NodeKind::Placeholder) {
      os << "const int OPT" << i << "; //" << n->id << " resource present at runtime\n";
      os << emit_placeholder_module(i, L.x(n->id), gates);
    } else {
      os << "const double r" << i << "; //" << n->id << " probability of success\n";
      os << "const double f" << i << "; //" << n->id << " frequency of execution\n";
      os << "const double w" << i << "; //" << n->id << " cost of execution\n";
      os << emit_leaf_module(*n, i, L.x(n->id), gates);
    }
  }

  if (!L.aliases().empty()) {
    os << "\n";
    for (const auto& [alias, g] : L.aliases()) os << "formula " << alias << " = " << g << ";\n";
  }

  os << "\nrewards \"cost\"\n";
  for (const cgm::Node* n : L.order()) {
    if (n->kind != cgm::NodeKind::LeafTask) continue;
    int i = L.leaf(n->id);
    os << "  s" << i << " = 1 : w" << i << "; //cost of " << n->id << " execution\n";
  }
  os << "endrewards\n";
  out.model = os.str();
  out.ctx_constants = static_cast<std::size_t>(ctx);

  std::ostringstream ps;
  bool first = true;
  for (const cgm::Node* n : L.order()) {
    if (n->id != goal_id && n->kind != cgm::NodeKind::Goal) continue;
    std::string p = phi(L, *n, false);
    std::string target = p.front() == '(' ? p : "(" + p + ")";
    if (!first) ps << "\n";
    first = false;
    ps << "// " << n->id << "\n";
    ps << "Pmax=? [ F " << target << " ]\n";
    ps << "Pmin=? [ F " << target << " ]\n";
    ps << "R{\"cost\"}max=? [ F " << target << " ]\n";
    ps << "R{\"cost\"}min=? [ F " << target << " ]\n";
  }
  out.properties = ps.str();
  return out;
}

std::string emit_model(const cgm::GoalModel& model, const std::string& goal_id) {
  return emit(model, goal_id).model;
}

std::string emit_properties(const cgm::GoalModel& model, const std::string& goal_id) {
  return emit(model, goal_id).properties;
}

std::string proposition(const cgm::GoalModel& model, const std::string& goal_id,
                        const std::string& node_id) {
  Layout L(model, goal_id);
  const cgm::Node* parent = model.parent_of(node_id);
  bool dm_child = node_id != goal_id && parent && parent->dm_annotation &&
                  std::find(parent->dm_annotation->begin(), parent->dm_annotation->end(), node_id) !=
                      parent->dm_annotation->end();
  return phi(L, model.node(node_id), dm_child);
}

}  // namespace goalc::prismgen
