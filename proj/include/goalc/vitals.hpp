#pragma once

// Patient vital signs: risk bands per signal and a bounded random-walk
// generator used to drive the data-validity context.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace goalc::vitals {

enum class Risk { Low, Medium, High };

std::string_view to_string(Risk r);

/// Band i covers [thresholds[i], thresholds[i+1]); the last band also
/// includes its upper threshold. Values outside the outer thresholds are
/// clamped to the nearest band and reported invalid by valid().
struct VitalRange {
  std::string signal;
  std::vector<double> thresholds;  // strictly ascending, size = bands + 1
  std::vector<Risk> bands;

  Risk classify(double value) const;
  bool valid(double value) const;
};

/// Oxygen saturation, heart rate, temperature, systolic and diastolic pressure.
const std::vector<VitalRange>& standard_ranges();

class Generator {
 public:
  explicit Generator(std::uint64_t seed);

  /// Advances every signal one step; values stay inside their walk bounds.
  const std::vector<double>& step();
  const std::vector<double>& values() const { return values_; }

  /// True while every signal lies inside its published range.
  bool all_valid() const;

 private:
  std::mt19937_64 rng_;
  std::vector<double> values_;
};

}  // namespace goalc::vitals
