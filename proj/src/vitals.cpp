#include "goalc/vitals.hpp"

#include <algorithm>

namespace goalc::vitals {

std::string_view to_string(Risk r) {
  switch (r) {
    case Risk::Low: return "low";
    case Risk::Medium: return "medium";
    case Risk::High: return "high";
  }
  return "low";
}

Risk VitalRange::classify(double value) const {
  std::size_t n = bands.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (value < thresholds[i + 1]) return bands[i];
  return bands[n - 1];
}

bool VitalRange::valid(double value) const {
  return value >= thresholds.front() && value <= thresholds.back();
}

const std::vector<VitalRange>& standard_ranges() {
  using R = Risk;
  static const std::vector<VitalRange> ranges = {
      {"oxygen_saturation", {0, 55, 65, 100}, {R::High, R::Medium, R::Low}},
      {"heart_rate", {0, 70, 85, 97, 115, 300}, {R::High, R::Medium, R::Low, R::Medium, R::High}},
      {"temperature", {0, 32, 36, 38, 41, 50}, {R::High, R::Medium, R::Low, R::Medium, R::High}},
      {"systolic", {0, 120, 140, 300}, {R::Low, R::Medium, R::High}},
      {"diastolic", {0, 80, 90, 300}, {R::Low, R::Medium, R::High}},
  };
  return ranges;
}

namespace {

struct Walk {
  double start, lo, hi, step;
};

// Start values sit in the low-risk band; walks stay well inside the ranges.
constexpr Walk kWalks[] = {
    {97, 80, 100, 0.5},
    {90, 55, 150, 2.0},
    {37, 34, 40, 0.1},
    {110, 90, 160, 2.0},
    {75, 60, 100, 1.5},
};

}  // namespace

Generator::Generator(std::uint64_t seed) : rng_(seed) {
  for (const auto& w : kWalks) values_.push_back(w.start);
}

const std::vector<double>& Generator::step() {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const Walk& w = kWalks[i];
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    double v = values_[i] + (2 * u - 1) * w.step;
    // Reflect at the walk bounds.
    if (v < w.lo) v = 2 * w.lo - v;
    if (v > w.hi) v = 2 * w.hi - v;
    values_[i] = std::clamp(v, w.lo, w.hi);
  }
  return values_;
}

bool Generator::all_valid() const {
  const auto& ranges = standard_ranges();
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!ranges[i].valid(values_[i])) return false;
  return true;
}

}  // namespace goalc::vitals
