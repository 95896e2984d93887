#include "minsurprise/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>

#include "minsurprise/simulation.hpp"

namespace minsurprise {

double score_run(double abs_error_sum, std::size_t swarm, std::size_t sensors, std::size_t comparisons) {
  if (comparisons == 0 || swarm == 0 || sensors == 0) {
    throw std::invalid_argument("score_run: nothing was compared");
  }
  const double denom = static_cast<double>(swarm) * static_cast<double>(comparisons) *
                       static_cast<double>(sensors);
  return 1.0 - abs_error_sum / denom;
}

double similarity(std::span<const Cell> start_blocks, std::span<const Cell> end_blocks,
                  std::size_t block_count) {
  if (block_count == 0) throw std::invalid_argument("similarity: no blocks");
  const std::set<Cell> end(end_blocks.begin(), end_blocks.end());
  std::size_t kept = 0;
  for (const Cell& c : std::set<Cell>(start_blocks.begin(), start_blocks.end())) kept += end.count(c);
  return static_cast<double>(kept) / static_cast<double>(block_count);
}

Movement movement(const PositionWindow& window, std::size_t entity_count, std::size_t tau, int side) {
  if (window.size() < tau + 1) {
    throw std::invalid_argument("movement: window holds " + std::to_string(window.size()) +
                                " states, need " + std::to_string(tau + 1));
  }
  if (entity_count == 0 || tau == 0) return {};
  auto axis_distance = [side](int a, int b) {
    const int d = std::abs(a - b);
    return std::min(d, side - d);
  };
  const std::size_t first = window.size() - (tau + 1);
  long long dx = 0;
  long long dy = 0;
  for (std::size_t t = first; t + 1 < window.size(); ++t) {
    const auto& now = window[t];
    const auto& next = window[t + 1];
    for (std::size_t p = 0; p < entity_count; ++p) {
      dx += axis_distance(now[p].x, next[p].x);
      dy += axis_distance(now[p].y, next[p].y);
    }
  }
  const double norm = static_cast<double>(entity_count) * static_cast<double>(tau);
  Movement m;
  m.x = static_cast<double>(dx) / norm;
  m.y = static_cast<double>(dy) / norm;
  m.total = m.x + m.y;
  return m;
}

std::string_view to_string(StructureLabel label) noexcept {
  switch (label) {
    case StructureLabel::Line: return "line";
    case StructureLabel::Pair: return "pair";
    case StructureLabel::Cluster: return "cluster";
    case StructureLabel::Dispersed: return "dispersed";
    case StructureLabel::Other: return "other";
  }
  return "unknown";
}

namespace {

class Occupancy {
 public:
  Occupancy(std::span<const Cell> blocks, int side)
      : side_(side), cells_(static_cast<std::size_t>(side) * side, 0) {
    for (const Cell& b : blocks) cells_[index(wrap(b, side))] = 1;
  }

  bool at(int x, int y) const { return cells_[index(wrap({x, y}, side_))] != 0; }
  int side() const { return side_; }

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * side_ + c.x; }
  int side_;
  std::vector<std::uint8_t> cells_;
};

// A maximal straight run through a block, in run-local coordinates: `along`
// is the unit step of the run, `across` the unit step to a parallel row.
struct Run {
  Cell start;
  int length = 0;
  bool ring = false;
  Cell along;
  Cell across;
};

Run run_through(const Occupancy& occ, Cell b, Cell along, Cell across) {
  const int side = occ.side();
  int back = 0;
  while (back < side - 1 && occ.at(b.x - (back + 1) * along.x, b.y - (back + 1) * along.y)) ++back;
  if (back == side - 1) return {b, side, true, along, across};
  int ahead = 0;
  while (occ.at(b.x + (ahead + 1) * along.x, b.y + (ahead + 1) * along.y)) ++ahead;
  return {{b.x - back * along.x, b.y - back * along.y}, back + ahead + 1, false, along, across};
}

// Each parallel row may hold at most ceil(len / 2) blocks next to the run and
// never two adjacent ones.
bool flanks_ok(const Occupancy& occ, const Run& run) {
  const int limit = (run.length + 1) / 2;
  for (int sign : {-1, 1}) {
    int count = 0;
    bool previous = false;
    for (int i = 0; i < run.length; ++i) {
      const bool occupied = occ.at(run.start.x + i * run.along.x + sign * run.across.x,
                                   run.start.y + i * run.along.y + sign * run.across.y);
      if (occupied && previous) return false;
      count += occupied ? 1 : 0;
      previous = occupied;
    }
    if (count > limit) return false;
  }
  return true;
}

}  // namespace

std::vector<StructureLabel> classify_blocks(std::span<const Cell> blocks, int side) {
  if (side < 3) throw std::invalid_argument("classify_blocks: side length must be at least 3");
  const Occupancy occ(blocks, side);
  std::vector<StructureLabel> labels;
  labels.reserve(blocks.size());
  for (const Cell& raw : blocks) {
    const Cell b = wrap(raw, side);
    const Run horizontal = run_through(occ, b, {1, 0}, {0, 1});
    const Run vertical = run_through(occ, b, {0, 1}, {1, 0});

    auto forms = [&](const Run& run, bool line) {
      if (run.ring) return false;
      const bool size_ok = line ? run.length >= 3 : run.length == 2;
      return size_ok && flanks_ok(occ, run);
    };

    int orthogonal = 0;
    int diagonal = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || !occ.at(b.x + dx, b.y + dy)) continue;
        if (dx == 0 || dy == 0) {
          ++orthogonal;
        } else {
          ++diagonal;
        }
      }
    }
    const int moore = orthogonal + diagonal;

    StructureLabel label = StructureLabel::Other;
    if (forms(horizontal, true) || forms(vertical, true)) {
      label = StructureLabel::Line;
    } else if (moore >= 4 && orthogonal >= 3) {
      label = StructureLabel::Cluster;
    } else if (forms(horizontal, false) || forms(vertical, false)) {
      label = StructureLabel::Pair;
    } else if (orthogonal == 0 && diagonal <= 1) {
      label = StructureLabel::Dispersed;
    }
    labels.push_back(label);
  }
  return labels;
}

StructureReport summarize(std::span<const StructureLabel> labels) {
  StructureReport report;
  for (auto l : labels) ++report.counts[static_cast<std::size_t>(l)];
  std::size_t best = 0;
  for (auto l : {StructureLabel::Line, StructureLabel::Pair, StructureLabel::Cluster,
                 StructureLabel::Dispersed}) {
    if (report.count(l) > best) {
      best = report.count(l);
      report.scene = l;
    }
  }
  return report;
}

StructureReport structure_report(std::span<const Cell> blocks, int side) {
  const auto labels = classify_blocks(blocks, side);
  return summarize(labels);
}

MetricsRow post_evaluate(const Genome& genome, const SimConfig& config, Scenario scenario,
                         std::uint64_t seed, const StateObserver& observer) {
  const Controller controller = decode(genome);
  const std::size_t tau = movement_window(config.side_length);
  if (static_cast<std::size_t>(config.steps) < tau) {
    throw ConfigError("post-evaluation needs at least " + std::to_string(tau) + " steps on a " +
                      std::to_string(config.side_length) + " grid");
  }
  SimulationOptions options;
  options.window = tau;
  options.observer = observer;
  const SimulationResult sim = simulate(controller, config, scenario, seed, options);
  const RunTrace& trace = sim.trace;

  MetricsRow row;
  row.fitness = sim.fitness;
  row.similarity = config.block_count == 0
                       ? 1.0
                       : similarity(trace.start_blocks, trace.end_blocks,
                                    static_cast<std::size_t>(config.block_count));
  row.block_movement = movement(trace.block_window, trace.end_blocks.size(), tau, config.side_length);
  row.robot_movement = movement(trace.robot_window, static_cast<std::size_t>(config.swarm_size), tau,
                                config.side_length);
  row.start = structure_report(trace.start_blocks, config.side_length);
  row.end = structure_report(trace.end_blocks, config.side_length);
  return row;
}

}  // namespace minsurprise
