#include "minsurprise/simulation.hpp"

#include <cmath>
#include <stdexcept>

namespace minsurprise {

namespace {

constexpr std::uint32_t kPatternCount = 1u << kNetInputs;
constexpr std::uint32_t kActionBit = 1u << kSensorCount;

// The action network is a pure function of a 13-bit input pattern, so its
// commands are memoized per simulation.
class ActionTable {
 public:
  explicit ActionTable(const ActionNet& net) : net_(net) { table_.fill(kUnknown); }

  ActionCommand operator()(std::uint32_t pattern) {
    auto& slot = table_[pattern];
    if (slot == kUnknown) {
      const ActionCommand cmd = act_pattern(net_, pattern);
      slot = static_cast<std::int8_t>((cmd.action == Action::Move ? 1 : 0) |
                                      (cmd.turn == TurnDirection::Clockwise ? 2 : 0));
    }
    return {(slot & 1) ? Action::Move : Action::Turn,
            (slot & 2) ? TurnDirection::Clockwise : TurnDirection::CounterClockwise};
  }

 private:
  static constexpr std::int8_t kUnknown = -1;
  const ActionNet& net_;
  std::array<std::int8_t, kPatternCount> table_{};
};

std::vector<Cell> robot_cells(const World& world) {
  std::vector<Cell> cells;
  cells.reserve(world.robots().size());
  for (const auto& r : world.robots()) cells.push_back(r.cell);
  return cells;
}

std::vector<Cell> block_cells(const World& world) {
  return {world.blocks().begin(), world.blocks().end()};
}

template <bool Record>
SimulationResult run(const Controller& controller, const SimConfig& config, Scenario scenario,
                     std::uint64_t seed, const SimulationOptions& options) {
  config.validate();
  const bool emergent = scenario == Scenario::Emergent;
  const auto steps = static_cast<std::size_t>(config.steps);
  const auto swarm = static_cast<std::size_t>(config.swarm_size);
  const std::size_t comparisons = emergent ? steps - 1 : steps;
  if (comparisons == 0) throw ConfigError("an emergent run needs at least two steps");

  Rng rng(seed);
  World world = random_world(config, rng);
  SimulationResult result{0.0, {}, world, world};
  RunTrace& trace = result.trace;
  trace.comparisons = comparisons;

  if constexpr (Record) {
    if (options.window > steps) {
      throw ConfigError("movement window of " + std::to_string(options.window) +
                        " steps exceeds the run length " + std::to_string(steps));
    }
    trace.tau = options.window;
    trace.start_blocks = block_cells(world);
    if (options.record_predictions) {
      trace.predictions.comparisons = comparisons;
      trace.predictions.swarm_size = swarm;
      trace.predictions.predicted.reserve(comparisons * swarm * kSensorCount);
      trace.predictions.sensed.reserve(comparisons * swarm * kSensorCount);
    }
  }
  auto record_state = [&](std::size_t t) {
    if constexpr (Record) {
      if (options.observer) options.observer(static_cast<int>(t), world);
      if (options.window > 0 && t + options.window >= steps) {
        trace.robot_window.push_back(robot_cells(world));
        trace.block_window.push_back(block_cells(world));
      }
    }
  };

  const PredictionVector fixed = emergent ? PredictionVector{} : scenario_prediction(scenario);
  const SensorGeometry geometry(config.side_length);
  ActionTable action_table(controller.action);
  std::vector<ControllerState> states(swarm);
  std::vector<PredictionVector> predictions(swarm);
  std::vector<ActionCommand> commands(swarm);
  std::vector<std::uint32_t> order(swarm);
  std::vector<MoveOutcome> outcomes(swarm);

  double error_sum = 0.0;
  record_state(0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t n = 0; n < swarm; ++n) {
      const SensorReading sensors = sense(world, geometry, n);
      const bool compare = !emergent || t > 0;
      if (compare) {
        const PredictionVector& expected = emergent ? predictions[n] : fixed;
        for (std::size_t r = 0; r < kSensorCount; ++r) {
          error_sum += std::abs(expected.p[r] - static_cast<double>(sensors.s[r]));
        }
        if constexpr (Record) {
          if (options.record_predictions) {
            auto& rec = trace.predictions;
            rec.predicted.insert(rec.predicted.end(), expected.p.begin(), expected.p.end());
            rec.sensed.insert(rec.sensed.end(), sensors.s.begin(), sensors.s.end());
          }
        }
      }
      ControllerState& state = states[n];
      const std::uint32_t mask = sensors.mask();
      const ActionCommand cmd = action_table(mask | (state.last_action == Action::Move ? kActionBit : 0u));
      state.last_action = cmd.action;
      commands[n] = cmd;
      if (emergent) {
        predictions[n] = predict_pattern(controller.prediction,
                                         mask | (cmd.action == Action::Move ? kActionBit : 0u), state);
      }
    }
    step(world, commands, rng, order, outcomes);
    record_state(t + 1);
  }

  trace.error_sum = error_sum;
  result.fitness = score_run(error_sum, swarm, kSensorCount, comparisons);
  if constexpr (Record) trace.end_blocks = block_cells(world);
  result.end = std::move(world);
  return result;
}

}  // namespace

SimulationResult simulate(const Controller& controller, const SimConfig& config, Scenario scenario,
                          std::uint64_t seed, const SimulationOptions& options) {
  return run<true>(controller, config, scenario, seed, options);
}

double simulate_fitness(const Controller& controller, const SimConfig& config, Scenario scenario,
                        std::uint64_t seed) {
  return run<false>(controller, config, scenario, seed, {}).fitness;
}

}  // namespace minsurprise
