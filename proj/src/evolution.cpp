#include "minsurprise/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "minsurprise/simulation.hpp"

namespace minsurprise {

void EvolutionConfig::validate() const {
  if (population_size < 1) throw ConfigError("population must be at least 1");
  if (generations < 1) throw ConfigError("generations must be at least 1");
  if (eval_runs < 1) throw ConfigError("eval_runs must be at least 1");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("mutation_rate must be in [0, 1]");
  if (elitism > population_size) throw ConfigError("elitism exceeds the population size");
  sim.validate();
  if (scenario == Scenario::Emergent && sim.steps < 2) throw ConfigError("emergent runs need at least 2 steps");
}

std::vector<std::uint64_t> evaluation_seeds(const EvolutionConfig& config, std::size_t generation,
                                            std::size_t genome_index) {
  const std::uint64_t gen = config.frozen_seeds ? 0 : generation;
  const std::uint64_t slot = config.frozen_seeds ? 0 : genome_index;
  std::vector<std::uint64_t> seeds(config.eval_runs);
  for (std::size_t e = 0; e < seeds.size(); ++e) {
    seeds[e] = mix64({config.master_seed, config.run_index, gen, slot, e});
  }
  return seeds;
}

std::uint64_t posteval_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  return mix64({master_seed, run_index, 0, kPostEvalSlot, 0});
}

EvaluatedGenome evaluate(const Genome& genome, const EvolutionConfig& config,
                         std::span<const std::uint64_t> eval_seeds) {
  if (eval_seeds.empty()) throw std::invalid_argument("evaluate: no evaluation seeds");
  const Controller controller = decode(genome);
  EvaluatedGenome out{genome, 0.0, {}};
  out.per_evaluation.reserve(eval_seeds.size());
  for (const std::uint64_t seed : eval_seeds) {
    out.per_evaluation.push_back(simulate_fitness(controller, config.sim, config.scenario, seed));
  }
  out.fitness = *std::min_element(out.per_evaluation.begin(), out.per_evaluation.end());
  return out;
}

std::size_t select_proportionate(std::span<const double> fitnesses, Rng& rng) {
  if (fitnesses.empty()) throw std::invalid_argument("select_proportionate: empty population");
  const double total = std::accumulate(fitnesses.begin(), fitnesses.end(), 0.0);
  if (!(total > 0.0)) return static_cast<std::size_t>(rng.below(fitnesses.size()));
  const double target = rng.uniform01() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    cumulative += fitnesses[i];
    if (target < cumulative) return i;
  }
  // Rounding left target at the very top; take the last individual with weight.
  for (std::size_t i = fitnesses.size(); i-- > 0;) {
    if (fitnesses[i] > 0.0) return i;
  }
  return fitnesses.size() - 1;
}

Genome mutate(const Genome& genome, double rate, Rng& rng) {
  Genome out = genome;
  auto apply = [&](std::vector<double>& ws) {
    for (double& w : ws) {
      if (rng.bernoulli(rate)) w = std::clamp(w + rng.uniform(-0.5, 0.5), -kWeightLimit, kWeightLimit);
    }
  };
  apply(out.action_weights);
  apply(out.prediction_weights);
  return out;
}

Genome random_genome(Rng& rng) {
  Genome g = Genome::zeros();
  for (double& w : g.action_weights) w = rng.uniform(-1.0, 1.0);
  for (double& w : g.prediction_weights) w = rng.uniform(-1.0, 1.0);
  return g;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sequence");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

std::vector<EvaluatedGenome> evaluate_population(const std::vector<Genome>& population,
                                                 const EvolutionConfig& config, std::size_t generation) {
  std::vector<EvaluatedGenome> evaluated(population.size());
  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(population.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < population.size(); i = next++) {
      try {
        evaluated[i] = evaluate(population[i], config, evaluation_seeds(config, generation, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return evaluated;
}

}  // namespace

EvolutionResult evolve(const EvolutionConfig& config, const ProgressSink& progress) {
  config.validate();
  const auto stream = [&](std::uint64_t generation, std::uint64_t slot) {
    return Rng(mix64({config.master_seed, config.run_index, generation, slot, 0}));
  };

  std::vector<Genome> population;
  population.reserve(config.population_size);
  {
    Rng init = stream(0, kInitSlot);
    for (std::size_t i = 0; i < config.population_size; ++i) population.push_back(random_genome(init));
  }

  EvolutionResult result;
  bool have_best = false;
  for (std::size_t generation = 0; generation < config.generations; ++generation) {
    std::vector<EvaluatedGenome> evaluated = evaluate_population(population, config, generation);

    std::vector<double> fitnesses(evaluated.size());
    std::transform(evaluated.begin(), evaluated.end(), fitnesses.begin(),
                   [](const EvaluatedGenome& e) { return e.fitness; });
    // Stable ranking: ties keep population order.
    std::vector<std::size_t> ranking(evaluated.size());
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](std::size_t a, std::size_t b) { return fitnesses[a] > fitnesses[b]; });

    GenerationStats stats;
    stats.generation = generation;
    stats.best = fitnesses[ranking.front()];
    stats.median = median_of(fitnesses);
    stats.mean = std::accumulate(fitnesses.begin(), fitnesses.end(), 0.0) / static_cast<double>(fitnesses.size());
    result.history.push_back(stats);
    if (progress) progress(stats);

    const EvaluatedGenome& champion = evaluated[ranking.front()];
    if (!have_best || champion.fitness > result.best.fitness) {
      result.best = champion;
      have_best = true;
    }
    if (generation + 1 == config.generations) {
      result.final_best = champion;
      break;
    }

    Rng rng = stream(generation, kSelectionSlot);
    std::vector<Genome> next;
    next.reserve(config.population_size);
    for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(evaluated[ranking[e]].genome);
    while (next.size() < config.population_size) {
      const std::size_t parent = select_proportionate(fitnesses, rng);
      next.push_back(mutate(evaluated[parent].genome, config.mutation_rate, rng));
    }
    population = std::move(next);
  }
  return result;
}

}  // namespace minsurprise
