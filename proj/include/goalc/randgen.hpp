#pragma once

// Seeded random goal models and bindings for property tests and `verify`.

#include <cstdint>
#include <random>

#include "goalc/cgm.hpp"
#include "goalc/symexpr.hpp"

namespace goalc::randgen {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; portable across libraries.
inline double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n).
inline std::uint64_t below(Rng& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

inline bool chance(Rng& rng, double p) { return unit(rng) < p; }

struct ModelShape {
  std::size_t max_leaves = 6;
  std::size_t max_children = 4;
  std::size_t context_pool = 4;
  double context_prob = 0.35;
  double placeholder_prob = 0.15;
  double dm_prob = 0.3;
};

/// A valid model with between 1 and shape.max_leaves leaf tasks.
cgm::GoalModel random_model(Rng& rng, const ModelShape& shape = {});

/// Complete binding for every parameter of `model`. Reliabilities and
/// frequencies sometimes land exactly on 0 or 1.
sym::Bindings random_binding(const cgm::GoalModel& model, Rng& rng, double corner_prob = 0.15);

}  // namespace goalc::randgen
