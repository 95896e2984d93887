#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "minsurprise/controllers.hpp"
#include "minsurprise/rng.hpp"
#include "minsurprise/world.hpp"

namespace minsurprise {

struct EvolutionConfig {
  std::size_t population_size = 50;
  std::size_t generations = 100;
  std::size_t eval_runs = 10;
  double mutation_rate = 0.1;
  std::size_t elitism = 1;
  SimConfig sim;
  Scenario scenario = Scenario::Emergent;
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;
  /// Evaluate every genome of every generation on the same worlds.
  bool frozen_seeds = false;
  /// Worker threads for genome evaluation; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const;

  friend bool operator==(const EvolutionConfig&, const EvolutionConfig&) = default;
};

// Seed derivation. All streams are mix64(master, run, generation, slot, index)
// where slot is the genome index for evaluation seeds and one of the reserved
// slots below for everything else.
inline constexpr std::uint64_t kSelectionSlot = ~0ULL;
inline constexpr std::uint64_t kInitSlot = ~0ULL - 1;
inline constexpr std::uint64_t kPostEvalSlot = ~0ULL - 2;

std::vector<std::uint64_t> evaluation_seeds(const EvolutionConfig& config, std::size_t generation,
                                            std::size_t genome_index);
std::uint64_t posteval_seed(std::uint64_t master_seed, std::uint64_t run_index);

struct EvaluatedGenome {
  Genome genome;
  double fitness = 0.0;
  std::vector<double> per_evaluation;

  friend bool operator==(const EvaluatedGenome&, const EvaluatedGenome&) = default;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best = 0.0;
  double median = 0.0;
  double mean = 0.0;

  friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

using FitnessHistory = std::vector<GenerationStats>;

/// One simulation per seed; the fitness is the worst of them.
EvaluatedGenome evaluate(const Genome& genome, const EvolutionConfig& config,
                         std::span<const std::uint64_t> eval_seeds);

/// Fitness-proportionate parent choice; uniform when all fitnesses are zero.
std::size_t select_proportionate(std::span<const double> fitnesses, Rng& rng);

/// Per weight with probability `rate`: add U(-0.5, 0.5), then clamp to the weight limit.
Genome mutate(const Genome& genome, double rate, Rng& rng);

Genome random_genome(Rng& rng);

struct EvolutionResult {
  /// Highest evaluated fitness over all generations.
  EvaluatedGenome best;
  /// Best individual of the final generation.
  EvaluatedGenome final_best;
  FitnessHistory history;
};

using ProgressSink = std::function<void(const GenerationStats&)>;

EvolutionResult evolve(const EvolutionConfig& config, const ProgressSink& progress = {});

double median_of(std::vector<double> values);

}  // namespace minsurprise
