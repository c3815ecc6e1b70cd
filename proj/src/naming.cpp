#include "goalc/naming.hpp"

namespace goalc {

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::Reliability: return "reliability";
    case ParamKind::Frequency: return "frequency";
    case ParamKind::Cost: return "cost";
    case ParamKind::Context: return "context";
    case ParamKind::Opt: return "opt";
    case ParamKind::Free: return "free";
  }
  return "free";
}

namespace naming {

std::string sanitize(std::string_view id) {
  std::string out(id);
  for (char& c : out) {
    if (c == '.') c = '_';
  }
  return out;
}

ParamKind infer_kind(std::string_view name) {
  if (name.starts_with("r_")) return ParamKind::Reliability;
  if (name.starts_with("f_")) return ParamKind::Frequency;
  if (name.starts_with("w_")) return ParamKind::Cost;
  if (name.starts_with("C_")) return ParamKind::Context;
  if (name.starts_with("OPT_")) return ParamKind::Opt;
  return ParamKind::Free;
}

}  // namespace naming
}  // namespace goalc
