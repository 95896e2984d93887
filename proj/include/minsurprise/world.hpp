#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "minsurprise/rng.hpp"

namespace minsurprise {

/// Grid coordinate. x grows East, y grows South.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline int wrap_coord(int v, int side) noexcept {
  const int r = v % side;
  return r < 0 ? r + side : r;
}

inline Cell wrap(Cell c, int side) noexcept { return {wrap_coord(c.x, side), wrap_coord(c.y, side)}; }

enum class Heading : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

/// Clockwise is +90 degrees (North -> East).
enum class TurnDirection : std::uint8_t { Clockwise, CounterClockwise };

Heading turned(Heading h, TurnDirection dir) noexcept;
Cell forward_offset(Heading h) noexcept;
char heading_letter(Heading h) noexcept;
std::optional<Heading> heading_from_letter(char c) noexcept;

struct RobotPose {
  Cell cell;
  Heading heading = Heading::North;

  friend bool operator==(const RobotPose&, const RobotPose&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimConfig {
  int side_length = 16;
  int swarm_size = 10;
  int block_count = 32;
  int steps = 1000;
  std::uint64_t seed = 0;

  /// Throws ConfigError when the configuration cannot be simulated.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline constexpr std::size_t kSensorCount = 12;
inline constexpr std::size_t kSensedCells = 6;

/// s0..s5 report robots, s6..s11 report blocks. Within each bank the cell
/// order is (C1, L1, R1, C2, L2, R2): ahead, ahead-left, ahead-right, then the
/// same three one row further out.
struct SensorReading {
  std::array<std::uint8_t, kSensorCount> s{};

  /// Bit r set iff s[r] == 1.
  std::uint32_t mask() const noexcept {
    std::uint32_t m = 0;
    for (std::size_t r = 0; r < kSensorCount; ++r) m |= static_cast<std::uint32_t>(s[r]) << r;
    return m;
  }

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

enum class Action : std::uint8_t { Turn = 0, Move = 1 };

struct ActionCommand {
  Action action = Action::Turn;
  TurnDirection turn = TurnDirection::Clockwise;

  friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

enum class MoveOutcome : std::uint8_t { Moved, Pushed, Turned, Blocked };

/// Torus grid holding robots and blocks, one entity per cell at most.
class World {
 public:
  explicit World(const SimConfig& config);

  const SimConfig& config() const noexcept { return config_; }
  int side() const noexcept { return config_.side_length; }

  std::span<const RobotPose> robots() const noexcept { return robots_; }
  std::span<const Cell> blocks() const noexcept { return blocks_; }

  std::size_t cell_index(Cell c) const noexcept { return index(c); }
  /// Raw occupancy code of a cell index: 0 empty, > 0 robot, < 0 block.
  std::int32_t occupancy(std::size_t cell_index) const noexcept { return cells_[cell_index]; }

  bool is_empty(Cell c) const noexcept { return cells_[index(c)] == 0; }
  bool has_robot(Cell c) const noexcept { return cells_[index(c)] > 0; }
  bool has_block(Cell c) const noexcept { return cells_[index(c)] < 0; }
  std::optional<std::size_t> robot_at(Cell c) const noexcept;
  std::optional<std::size_t> block_at(Cell c) const noexcept;

  /// Placement helpers; the target cell must be empty. Coordinates are wrapped.
  std::size_t add_robot(Cell c, Heading h);
  std::size_t add_block(Cell c);

  /// Relocate an entity to an empty cell.
  void move_robot(std::size_t id, Cell to);
  void move_block(std::size_t id, Cell to);
  void set_heading(std::size_t id, Heading h) { robots_.at(id).heading = h; }

  /// Full consistency check of occupancy against the entity lists.
  bool consistent() const;

  /// Same layout: equal robot poses and block cells as sets, ignoring ids.
  bool same_layout(const World& other) const;

  friend bool operator==(const World&, const World&) = default;

 private:
  std::size_t index(Cell c) const noexcept {
    const Cell w = wrap(c, config_.side_length);
    return static_cast<std::size_t>(w.y) * static_cast<std::size_t>(config_.side_length) +
           static_cast<std::size_t>(w.x);
  }

  SimConfig config_;
  std::vector<RobotPose> robots_;
  std::vector<Cell> blocks_;
  // 0 empty, id+1 for robots, -(id+1) for blocks.
  std::vector<std::int32_t> cells_;
};

/// Uniformly random placement of swarm_size robots and block_count blocks on
/// distinct cells, headings uniform.
World random_world(const SimConfig& config, Rng& rng);

/// The six sensed cells of a robot, in sensor order.
std::array<Cell, kSensedCells> sensed_cells(const RobotPose& pose, int side) noexcept;

SensorReading sense(const World& world, std::size_t robot_id);

/// Precomputed sensed-cell indices for every (cell, heading) of one side length.
class SensorGeometry {
 public:
  explicit SensorGeometry(int side);

  int side() const noexcept { return side_; }
  std::span<const std::uint32_t, kSensedCells> cells(std::size_t cell_index, Heading h) const noexcept {
    return std::span<const std::uint32_t, kSensedCells>(
        table_.data() + (cell_index * 4 + static_cast<std::size_t>(h)) * kSensedCells, kSensedCells);
  }

 private:
  int side_;
  std::vector<std::uint32_t> table_;
};

/// Same as sense(world, robot_id) using a geometry built for world.side().
SensorReading sense(const World& world, const SensorGeometry& geometry, std::size_t robot_id) noexcept;

MoveOutcome attempt_actuate(World& world, std::size_t robot_id, ActionCommand cmd);

/// Applies one synchronous time step: commands were computed from the world
/// as it is now; actuation happens in a fresh random robot order.
/// Returns the outcome per robot id.
std::vector<MoveOutcome> step(World& world, std::span<const ActionCommand> commands, Rng& rng);

/// Allocation-free variant; order must have size swarm_size.
void step(World& world, std::span<const ActionCommand> commands, Rng& rng,
          std::span<std::uint32_t> order, std::span<MoveOutcome> outcomes);

}  // namespace minsurprise
