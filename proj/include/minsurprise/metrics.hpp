#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "minsurprise/controllers.hpp"
#include "minsurprise/world.hpp"

namespace minsurprise {

/// Entity positions for consecutive world states, indexed [state][entity id].
using PositionWindow = std::vector<std::vector<Cell>>;

/// Predictions and the sensor values they were scored against, laid out
/// [comparison][robot][sensor].
struct PredictionRecord {
  std::size_t comparisons = 0;
  std::size_t swarm_size = 0;
  std::vector<double> predicted;
  std::vector<std::uint8_t> sensed;
};

struct RunTrace {
  std::vector<Cell> start_blocks;
  std::vector<Cell> end_blocks;
  /// States T - tau .. T, i.e. tau + 1 entries when recorded.
  PositionWindow robot_window;
  PositionWindow block_window;
  std::size_t tau = 0;
  double error_sum = 0.0;
  std::size_t comparisons = 0;
  PredictionRecord predictions;
};

/// Movement window length for a side length L: L * L / 2.
inline std::size_t movement_window(int side) noexcept {
  return static_cast<std::size_t>(side) * static_cast<std::size_t>(side) / 2;
}

/// 1 - error_sum / (swarm * comparisons * sensors). Throws on zero comparisons.
double score_run(double abs_error_sum, std::size_t swarm, std::size_t sensors, std::size_t comparisons);

/// Fraction of start block cells that hold a block at the end.
double similarity(std::span<const Cell> start_blocks, std::span<const Cell> end_blocks,
                  std::size_t block_count);

struct Movement {
  double x = 0.0;
  double y = 0.0;
  double total = 0.0;

  friend bool operator==(const Movement&, const Movement&) = default;
};

/// Mean per-step torus displacement over the last tau transitions of the window.
Movement movement(const PositionWindow& window, std::size_t entity_count, std::size_t tau, int side);

enum class StructureLabel : std::uint8_t { Line, Pair, Cluster, Dispersed, Other };
inline constexpr std::size_t kStructureLabelCount = 5;

std::string_view to_string(StructureLabel label) noexcept;

/// One label per block, index-aligned with `blocks`. Requires side >= 3.
std::vector<StructureLabel> classify_blocks(std::span<const Cell> blocks, int side);

struct StructureReport {
  std::array<std::size_t, kStructureLabelCount> counts{};
  /// Largest count among Line, Pair, Cluster, Dispersed, ties to the earlier
  /// one; Other only when all four are zero.
  StructureLabel scene = StructureLabel::Other;

  std::size_t count(StructureLabel label) const { return counts[static_cast<std::size_t>(label)]; }

  friend bool operator==(const StructureReport&, const StructureReport&) = default;
};

StructureReport summarize(std::span<const StructureLabel> labels);
StructureReport structure_report(std::span<const Cell> blocks, int side);

struct MetricsRow {
  double fitness = 0.0;
  double similarity = 0.0;
  Movement block_movement;
  Movement robot_movement;
  StructureReport start;
  StructureReport end;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

using StateObserver = std::function<void(int step, const World& world)>;

/// Single recorded simulation of a genome with all post-run metrics.
/// Requires steps >= side * side / 2.
MetricsRow post_evaluate(const Genome& genome, const SimConfig& config, Scenario scenario,
                         std::uint64_t seed, const StateObserver& observer = {});

}  // namespace minsurprise
