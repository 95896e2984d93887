#pragma once

#include <cstdint>
#include <optional>

#include "minsurprise/controllers.hpp"
#include "minsurprise/metrics.hpp"
#include "minsurprise/world.hpp"

namespace minsurprise {

struct SimulationOptions {
  /// Record positions of the last `window` transitions (window + 1 states). 0 disables.
  std::size_t window = 0;
  bool record_predictions = false;
  /// Called with every state 0..T.
  StateObserver observer;
};

struct SimulationResult {
  double fitness = 0.0;
  RunTrace trace;
  World start;
  World end;
};

/// One run of a homogeneous swarm from a fresh random world drawn from `seed`.
///
/// Emergent: the prediction made at step t is scored against the sensors of
/// step t + 1, giving T - 1 comparisons. Predefined scenarios score their fixed
/// prediction against the sensors of every step 0..T-1.
SimulationResult simulate(const Controller& controller, const SimConfig& config, Scenario scenario,
                          std::uint64_t seed, const SimulationOptions& options = {});

/// Fitness-only fast path; equal to simulate(...).fitness.
double simulate_fitness(const Controller& controller, const SimConfig& config, Scenario scenario,
                        std::uint64_t seed);

}  // namespace minsurprise
