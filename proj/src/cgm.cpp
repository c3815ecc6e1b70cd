#include "goalc/cgm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "goalc/naming.hpp"

namespace goalc::cgm {

using json = nlohmann::ordered_json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Goal: return "goal";
    case NodeKind::Task: return "task";
    case NodeKind::LeafTask: return "leaf";
    case NodeKind::Placeholder: return "placeholder";
  }
  return "goal";
}

std::string_view to_string(Decomposition d) {
  switch (d) {
    case Decomposition::And: return "and";
    case Decomposition::Or: return "or";
    case Decomposition::MeansEnd: return "means_end";
    case Decomposition::None: return "none";
  }
  return "none";
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Boolean: return "boolean";
    case ValueKind::Integer: return "integer";
    case ValueKind::Double: return "double";
  }
  return "boolean";
}

// ---------------------------------------------------------------------------

Comparison Comparison::parse(std::string_view text) {
  static const std::regex pattern(R"(^\s*([A-Za-z_][A-Za-z0-9_.]*)\s*(<=|>=|==|!=|<|>)\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*$)");
  std::string s(text);
  std::smatch m;
  if (!std::regex_match(s, m, pattern)) {
    throw ParseError("invalid context condition '" + s + "'", 0);
  }
  return Comparison{m[1].str(), m[2].str(), std::stod(m[3].str())};
}

bool Comparison::holds(double value) const {
  if (op == "<") return value < threshold;
  if (op == "<=") return value <= threshold;
  if (op == ">") return value > threshold;
  if (op == ">=") return value >= threshold;
  if (op == "==") return value == threshold;
  return value != threshold;
}

std::string Comparison::text() const {
  std::ostringstream os;
  os << variable << ' ' << op << ' ' << threshold;
  return os.str();
}

// ---------------------------------------------------------------------------

GoalModel::GoalModel(std::string actor, std::string root_id, std::vector<Node> nodes,
                     std::vector<ContextDef> contexts)
    : actor_(std::move(actor)), root_(std::move(root_id)) {
  for (auto& n : nodes) {
    if (n.kind == NodeKind::LeafTask) {
      n.leaf_params = LeafParams{naming::reliability(n.id), naming::cost(n.id),
                                 naming::frequency(n.id)};
    } else {
      n.leaf_params.reset();
    }
    std::string id = n.id;
    if (!nodes_.emplace(id, std::move(n)).second) {
      duplicates_.push_back(id);
      continue;
    }
    order_.push_back(id);
  }
  for (auto& c : contexts) {
    std::string id = c.id;
    if (contexts_.emplace(id, std::move(c)).second) context_order_.push_back(id);
  }
  for (const auto& id : order_) {
    for (const auto& child : nodes_.at(id).children) parent_.try_emplace(child, id);
  }
}

const Node& GoalModel::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw DomainError("unknown node '" + id + "'");
  return it->second;
}

const Node* GoalModel::find(const std::string& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const ContextDef* GoalModel::find_context(const std::string& id) const {
  auto it = contexts_.find(id);
  return it == contexts_.end() ? nullptr : &it->second;
}

const Node* GoalModel::parent_of(const std::string& id) const {
  auto it = parent_.find(id);
  return it == parent_.end() ? nullptr : find(it->second);
}

std::vector<const Node*> GoalModel::subtree(const std::string& id) const {
  std::vector<const Node*> out;
  std::vector<const Node*> stack{&node(id)};
  std::set<std::string> seen;
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n->id).second) continue;
    out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
      if (const Node* c = find(*it)) stack.push_back(c);
    }
  }
  return out;
}

std::vector<const Node*> GoalModel::leaves_under(const std::string& id) const {
  std::vector<const Node*> out;
  for (const Node* n : subtree(id))
    if (n->is_leaf()) out.push_back(n);
  return out;
}

std::vector<std::string> GoalModel::parameter_names() const {
  std::set<std::string> names;
  for (const auto& [id, n] : nodes_) {
    if (n.leaf_params) {
      names.insert(n.leaf_params->reliability);
      names.insert(n.leaf_params->frequency);
      names.insert(n.leaf_params->cost);
    }
    if (n.kind == NodeKind::Placeholder) names.insert(naming::opt(n.id));
    for (const auto& c : n.context_refs) names.insert(naming::context(c));
  }
  return {names.begin(), names.end()};
}

GoalModel GoalModel::extract(const std::string& id) const {
  std::vector<Node> nodes;
  std::set<std::string> used_contexts;
  for (const Node* n : subtree(id)) {
    nodes.push_back(*n);
    used_contexts.insert(n->context_refs.begin(), n->context_refs.end());
  }
  std::vector<ContextDef> contexts;
  for (const auto& cid : context_order_) {
    if (used_contexts.count(cid)) contexts.push_back(contexts_.at(cid));
  }
  return GoalModel(actor_, id, std::move(nodes), std::move(contexts));
}

// ---------------------------------------------------------------------------

ModelError::ModelError(std::vector<Violation> violations)
    : DomainError([&] {
        std::string msg = "invalid goal model";
        for (std::size_t i = 0; i < violations.size(); ++i) {
          msg += (i == 0 ? ": " : "; ") + violations[i].message;
        }
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

NodeKind parse_kind(const std::string& s) {
  std::string k;
  for (char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "goal") return NodeKind::Goal;
  if (k == "task") return NodeKind::Task;
  if (k == "leaf" || k == "leaf_task" || k == "leaftask") return NodeKind::LeafTask;
  if (k == "placeholder") return NodeKind::Placeholder;
  throw DomainError("unknown node kind '" + s + "'");
}

Decomposition parse_decomposition(const std::string& s) {
  std::string k;
  for (char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "and") return Decomposition::And;
  if (k == "or") return Decomposition::Or;
  if (k == "means_end" || k == "means-end" || k == "meansend") return Decomposition::MeansEnd;
  if (k == "none" || k.empty()) return Decomposition::None;
  throw DomainError("unknown decomposition '" + s + "'");
}

ValueKind parse_value_kind(const std::string& s) {
  std::string k;
  for (char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "boolean" || k == "bool") return ValueKind::Boolean;
  if (k == "integer" || k == "int") return ValueKind::Integer;
  if (k == "double" || k == "real") return ValueKind::Double;
  throw DomainError("unknown context kind '" + s + "'");
}

std::vector<std::string> string_list(const json& j, const char* field) {
  std::vector<std::string> out;
  if (!j.contains(field) || j.at(field).is_null()) return out;
  for (const auto& v : j.at(field)) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

GoalModel parse_model_unchecked(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what(), e.byte);
  }
  try {
    if (!doc.is_object()) throw DomainError("model must be a JSON object");
    std::vector<Node> nodes;
    for (const auto& jn : doc.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<std::string>();
      n.label = jn.value("label", "");
      n.kind = parse_kind(jn.value("kind", "goal"));
      if (jn.value("placeholder", false)) n.kind = NodeKind::Placeholder;
      n.decomposition = parse_decomposition(jn.value("decomposition", "none"));
      n.children = string_list(jn, "children");
      if (jn.contains("dm") && !jn.at("dm").is_null()) n.dm_annotation = string_list(jn, "dm");
      n.context_refs = string_list(jn, "contexts");
      nodes.push_back(std::move(n));
    }
    std::vector<ContextDef> contexts;
    if (doc.contains("contexts")) {
      for (const auto& jc : doc.at("contexts")) {
        ContextDef c;
        c.id = jc.at("id").get<std::string>();
        c.description = jc.value("description", "");
        c.value_kind = parse_value_kind(jc.value("kind", "boolean"));
        if (jc.contains("condition") && !jc.at("condition").is_null()) {
          c.condition = Comparison::parse(jc.at("condition").get<std::string>());
        }
        contexts.push_back(std::move(c));
      }
    }
    return GoalModel(doc.value("actor", ""), doc.at("root").get<std::string>(), std::move(nodes),
                     std::move(contexts));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model schema error: ") + e.what(), 0);
  }
}

GoalModel parse_model(std::string_view text) {
  GoalModel model = parse_model_unchecked(text);
  auto violations = validate(model);
  if (!violations.empty()) throw ModelError(std::move(violations));
  return model;
}

GoalModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string serialize(const GoalModel& model) {
  json doc;
  doc["actor"] = model.actor_name();
  doc["root"] = model.root_id();
  json nodes = json::array();
  for (const auto& id : model.declaration_order()) {
    const Node& n = model.node(id);
    json jn;
    jn["id"] = n.id;
    jn["label"] = n.label;
    jn["kind"] = std::string(to_string(n.kind));
    jn["decomposition"] = std::string(to_string(n.decomposition));
    jn["children"] = n.children;
    if (n.dm_annotation) jn["dm"] = *n.dm_annotation;
    jn["contexts"] = n.context_refs;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  json contexts = json::array();
  for (const auto& [id, c] : model.contexts()) {
    json jc;
    jc["id"] = c.id;
    jc["description"] = c.description;
    jc["kind"] = std::string(to_string(c.value_kind));
    if (c.condition) jc["condition"] = c.condition->text();
    contexts.push_back(std::move(jc));
  }
  doc["contexts"] = std::move(contexts);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate(const GoalModel& model) {
  std::vector<Violation> out;
  auto report = [&](const std::string& id, const char* rule, std::string message) {
    out.push_back(Violation{id, rule, std::move(message)});
  };
  static const std::regex id_pattern("^[A-Za-z0-9._]+$");

  for (const auto& id : model.duplicate_ids()) report(id, "duplicate-id", "duplicate node id '" + id + "'");
  if (!model.contains(model.root_id())) {
    report(model.root_id(), "dangling-root", "root '" + model.root_id() + "' is not a node");
  }

  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& [id, n] : model.nodes()) {
    for (const auto& c : n.children) parents[c].push_back(id);
  }

  for (const auto& [id, n] : model.nodes()) {
    if (!std::regex_match(id, id_pattern)) report(id, "invalid-id", "node id '" + id + "' has invalid characters");

    if (n.is_leaf()) {
      if (!n.children.empty()) report(id, "leaf-has-children", "leaf node '" + id + "' has children");
      if (n.decomposition != Decomposition::None) {
        report(id, "leaf-decomposition", "leaf node '" + id + "' declares a decomposition");
      }
    } else {
      if (n.children.empty()) {
        report(id, "empty-refinement", "non-leaf node '" + id + "' has no children");
      } else if (n.decomposition == Decomposition::None) {
        report(id, "missing-decomposition", "node '" + id + "' has children but no decomposition");
      }
      if (n.decomposition == Decomposition::MeansEnd && n.children.size() != 1) {
        report(id, "means-end-arity", "means-end node '" + id + "' must have exactly one child");
      }
    }

    std::set<std::string> seen_children;
    for (const auto& c : n.children) {
      if (!model.contains(c)) report(id, "dangling-child", "child '" + c + "' of '" + id + "' does not exist");
      if (!seen_children.insert(c).second) report(id, "duplicate-child", "child '" + c + "' listed twice under '" + id + "'");
    }
    for (const auto& ctx : n.context_refs) {
      if (!model.find_context(ctx)) {
        report(id, "dangling-context", "context '" + ctx + "' referenced by '" + id + "' does not exist");
      }
    }

    if (n.kind == NodeKind::Placeholder && !(id == "X" || id.ends_with(".X"))) {
      report(id, "placeholder-suffix", "placeholder id '" + id + "' must end with '.X'");
    }

    if (auto p = parents.find(id); p != parents.end() && p->second.size() > 1) {
      report(id, "multiple-parents", "node '" + id + "' has more than one parent");
    }
    if (id == model.root_id() && parents.count(id)) {
      report(id, "root-has-parent", "root '" + id + "' appears as a child");
    }

    if (n.dm_annotation) {
      const auto& dm = *n.dm_annotation;
      if (n.is_leaf()) {
        report(id, "dm-on-leaf", "DM on leaf node '" + id + "'");
      } else if (n.decomposition != Decomposition::Or) {
        report(id, "dm-requires-or", "DM node '" + id + "' must be OR-decomposed");
      }
      if (dm.empty()) report(id, "dm-empty", "DM annotation on '" + id + "' lists no children");
      std::set<std::string> listed;
      for (const auto& d : dm) {
        if (!listed.insert(d).second) report(id, "dm-duplicate", "'" + d + "' listed twice in DM of '" + id + "'");
        const Node* child = model.find(d);
        if (!child) {
          report(id, "dangling-dm", "DM entry '" + d + "' of '" + id + "' does not exist");
          continue;
        }
        if (std::find(n.children.begin(), n.children.end(), d) == n.children.end()) {
          report(id, "dm-not-child", "DM entry '" + d + "' is not a child of '" + id + "'");
        }
        if (child->context_refs.empty()) {
          report(d, "dm-child-needs-context", "DM child '" + d + "' carries no context");
        }
      }
      if (!n.is_leaf()) {
        for (const auto& c : n.children) {
          if (!listed.count(c)) {
            report(id, "dm-missing-child", "child '" + c + "' of DM node '" + id + "' is not in the DM annotation");
          }
        }
      }
    }
  }

  // Reachability from the root (also catches cycles that avoid the root).
  if (model.contains(model.root_id())) {
    std::set<std::string> reached;
    std::vector<std::string> stack{model.root_id()};
    while (!stack.empty()) {
      std::string id = stack.back();
      stack.pop_back();
      if (!reached.insert(id).second) continue;
      for (const auto& c : model.node(id).children)
        if (model.contains(c)) stack.push_back(c);
    }
    for (const auto& [id, _] : model.nodes()) {
      if (!reached.count(id)) report(id, "unreachable", "node '" + id + "' is not reachable from the root");
    }
  }

  for (const auto& [id, c] : model.contexts()) {
    if (c.value_kind == ValueKind::Boolean && c.condition) {
      report(id, "context-condition", "boolean context '" + id + "' must not carry a condition");
    }
    if (c.value_kind != ValueKind::Boolean && !c.condition) {
      report(id, "context-condition", "numeric context '" + id + "' needs a condition");
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.node_id, a.rule) < std::tie(b.node_id, b.rule);
  });
  return out;
}

std::vector<Advisory> check_sensor_guideline(const GoalModel& model) {
  std::vector<Advisory> out;
  std::set<std::string> collection_tasks;
  for (const auto& [id, n] : model.nodes()) {
    if (!n.dm_annotation) continue;
    for (const auto& d : *n.dm_annotation) {
      const Node* c = model.find(d);
      if (c && c->kind != NodeKind::Placeholder && !c->context_refs.empty()) collection_tasks.insert(d);
    }
  }
  for (const auto& id : collection_tasks) {
    const Node& n = model.node(id);
    bool follows = n.kind == NodeKind::Task && n.decomposition == Decomposition::And &&
                   n.children.size() == 3 &&
                   std::all_of(n.children.begin(), n.children.end(), [&](const std::string& c) {
                     const Node* leaf = model.find(c);
                     return leaf && leaf->kind == NodeKind::LeafTask;
                   });
    if (!follows) {
      out.push_back(Advisory{id, "data-collection task '" + id +
                                     "' should be AND-refined into read, filter and transfer leaf tasks"});
    }
  }
  return out;
}

}  // namespace goalc::cgm
