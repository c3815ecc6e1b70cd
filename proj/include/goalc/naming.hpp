#pragma once

// Textual encoding of uncertainty parameters. Every leaf owns r_<id>, f_<id>
// and w_<id>; every context owns C_<ctx>; every placeholder owns OPT_<id>.
// Dots in ids become underscores so the names are valid identifiers.

#include <string>
#include <string_view>

namespace goalc {

enum class ParamKind { Reliability, Frequency, Cost, Context, Opt, Free };

std::string_view to_string(ParamKind kind);

/// True for kinds restricted to {0, 1}.
constexpr bool is_binary(ParamKind kind) {
  return kind == ParamKind::Context || kind == ParamKind::Opt;
}

namespace naming {

std::string sanitize(std::string_view id);

inline std::string reliability(std::string_view node_id) { return "r_" + sanitize(node_id); }
inline std::string frequency(std::string_view node_id) { return "f_" + sanitize(node_id); }
inline std::string cost(std::string_view node_id) { return "w_" + sanitize(node_id); }
inline std::string context(std::string_view context_id) { return "C_" + sanitize(context_id); }
inline std::string opt(std::string_view node_id) { return "OPT_" + sanitize(node_id); }

/// Kind implied by the prefix of a generated name; Free for anything else.
ParamKind infer_kind(std::string_view name);

}  // namespace naming
}  // namespace goalc
