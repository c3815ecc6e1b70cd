#pragma once

#include <string>

#include "goalc/cgm.hpp"
#include "goalc/symexpr.hpp"

namespace testing {

inline std::string data_path(const std::string& rel) { return std::string(GOALC_DATA_DIR) + "/" + rel; }

inline const goalc::cgm::GoalModel& bsn() {
  static const goalc::cgm::GoalModel m = goalc::cgm::load_model(data_path("bsn.json"));
  return m;
}

/// Rational substitution map from name/value pairs.
inline std::map<std::string, goalc::sym::Rational> fix(
    std::initializer_list<std::pair<const char*, int>> values) {
  std::map<std::string, goalc::sym::Rational> out;
  for (const auto& [k, v] : values) out[k] = v;
  return out;
}

}  // namespace testing
