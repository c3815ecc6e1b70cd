#include "goalc/randgen.hpp"

#include <set>
#include <string>
#include <vector>

#include "goalc/naming.hpp"

namespace goalc::randgen {

namespace {

class Builder {
 public:
  Builder(Rng& rng, const ModelShape& shape) : rng_(rng), shape_(shape) {}

  cgm::GoalModel run() {
    std::size_t budget = 1 + below(rng_, shape_.max_leaves);
    build("G", budget, 0, false);
    std::vector<cgm::ContextDef> contexts;
    for (const auto& c : used_contexts_) contexts.push_back(cgm::ContextDef{c, "", cgm::ValueKind::Boolean, {}});
    return cgm::GoalModel("random", "G", std::move(nodes_), std::move(contexts));
  }

 private:
  std::string pick_context() {
    std::string c = "C" + std::to_string(1 + below(rng_, shape_.context_pool));
    used_contexts_.insert(c);
    return c;
  }

  void build(const std::string& id, std::size_t budget, int depth, bool needs_context) {
    std::size_t idx = nodes_.size();
    nodes_.push_back(cgm::Node{});
    nodes_[idx].id = id;
    if (needs_context || chance(rng_, shape_.context_prob)) nodes_[idx].context_refs.push_back(pick_context());

    if (budget <= 1 || depth >= 4) {
      nodes_[idx].kind = cgm::NodeKind::LeafTask;
      return;
    }
    nodes_[idx].kind = depth < 2 ? cgm::NodeKind::Goal : cgm::NodeKind::Task;

    std::size_t k = 1 + below(rng_, std::min(budget, shape_.max_children));
    // Split the leaf budget so every child gets at least one.
    std::vector<std::size_t> shares(k, 1);
    for (std::size_t extra = budget - k; extra > 0; --extra) shares[below(rng_, k)]++;

    bool dm = k >= 1 && chance(rng_, shape_.dm_prob);
    if (k == 1 && !dm) {
      nodes_[idx].decomposition = chance(rng_, 0.5) ? cgm::Decomposition::MeansEnd
                                                    : (chance(rng_, 0.5) ? cgm::Decomposition::And
                                                                         : cgm::Decomposition::Or);
    } else if (dm) {
      nodes_[idx].decomposition = cgm::Decomposition::Or;
    } else {
      nodes_[idx].decomposition = chance(rng_, 0.5) ? cgm::Decomposition::And : cgm::Decomposition::Or;
    }

    std::vector<std::string> children;
    for (std::size_t i = 0; i < k; ++i) {
      std::string child = id + "." + std::to_string(i + 1);
      children.push_back(child);
      build(child, shares[i], depth + 1, dm);
    }
    if (chance(rng_, shape_.placeholder_prob)) {
      std::string x = id + ".X";
      cgm::Node ph;
      ph.id = x;
      ph.kind = cgm::NodeKind::Placeholder;
      if (dm || chance(rng_, shape_.context_prob)) ph.context_refs.push_back(pick_context());
      nodes_.push_back(std::move(ph));
      children.push_back(x);
      if (nodes_[idx].decomposition == cgm::Decomposition::MeansEnd) {
        nodes_[idx].decomposition = cgm::Decomposition::And;
      }
    }
    nodes_[idx].children = children;
    if (dm) nodes_[idx].dm_annotation = children;
  }

  Rng& rng_;
  const ModelShape& shape_;
  std::vector<cgm::Node> nodes_;
  std::set<std::string> used_contexts_;
};

}  // namespace

cgm::GoalModel random_model(Rng& rng, const ModelShape& shape) { return Builder(rng, shape).run(); }

sym::Bindings random_binding(const cgm::GoalModel& model, Rng& rng, double corner_prob) {
  sym::Bindings b;
  for (const auto& name : model.parameter_names()) {
    switch (naming::infer_kind(name)) {
      case ParamKind::Reliability:
      case ParamKind::Frequency:
        b[name] = chance(rng, corner_prob) ? static_cast<double>(below(rng, 2)) : unit(rng);
        break;
      case ParamKind::Cost:
        b[name] = 5.0 * unit(rng);
        break;
      default:
        b[name] = static_cast<double>(below(rng, 2));
        break;
    }
  }
  return b;
}

}  // namespace goalc::randgen
