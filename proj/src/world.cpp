#include "minsurprise/world.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <string>

namespace minsurprise {

Heading turned(Heading h, TurnDirection dir) noexcept {
  const int step = dir == TurnDirection::Clockwise ? 1 : 3;
  return static_cast<Heading>((static_cast<int>(h) + step) % 4);
}

Cell forward_offset(Heading h) noexcept {
  switch (h) {
    case Heading::North: return {0, -1};
    case Heading::East: return {1, 0};
    case Heading::South: return {0, 1};
    case Heading::West: return {-1, 0};
  }
  return {0, 0};
}

char heading_letter(Heading h) noexcept {
  constexpr std::array<char, 4> letters{'N', 'E', 'S', 'W'};
  return letters[static_cast<std::size_t>(h)];
}

std::optional<Heading> heading_from_letter(char c) noexcept {
  switch (c) {
    case 'N': return Heading::North;
    case 'E': return Heading::East;
    case 'S': return Heading::South;
    case 'W': return Heading::West;
    default: return std::nullopt;
  }
}

void SimConfig::validate() const {
  // L = 2 is simulable; the structure metrics require L >= 3 and enforce it themselves.
  if (side_length < 2) throw ConfigError("side_length must be at least 2");
  if (swarm_size < 1) throw ConfigError("swarm_size must be at least 1");
  if (block_count < 0) throw ConfigError("block_count must be non-negative");
  if (steps < 1) throw ConfigError("steps must be at least 1");
  const long long cells = static_cast<long long>(side_length) * side_length;
  if (static_cast<long long>(swarm_size) + block_count > cells) {
    throw ConfigError("cannot place " + std::to_string(swarm_size) + " robots and " +
                      std::to_string(block_count) + " blocks on " + std::to_string(cells) + " cells");
  }
}

World::World(const SimConfig& config) : config_(config) {
  if (config_.side_length < 1) throw ConfigError("side_length must be positive");
  cells_.assign(static_cast<std::size_t>(config_.side_length) * config_.side_length, 0);
}

std::optional<std::size_t> World::robot_at(Cell c) const noexcept {
  const auto v = cells_[index(c)];
  if (v > 0) return static_cast<std::size_t>(v - 1);
  return std::nullopt;
}

std::optional<std::size_t> World::block_at(Cell c) const noexcept {
  const auto v = cells_[index(c)];
  if (v < 0) return static_cast<std::size_t>(-v - 1);
  return std::nullopt;
}

std::size_t World::add_robot(Cell c, Heading h) {
  if (!is_empty(c)) throw std::logic_error("add_robot: cell occupied");
  robots_.push_back({wrap(c, side()), h});
  cells_[index(c)] = static_cast<std::int32_t>(robots_.size());
  return robots_.size() - 1;
}

std::size_t World::add_block(Cell c) {
  if (!is_empty(c)) throw std::logic_error("add_block: cell occupied");
  blocks_.push_back(wrap(c, side()));
  cells_[index(c)] = -static_cast<std::int32_t>(blocks_.size());
  return blocks_.size() - 1;
}

void World::move_robot(std::size_t id, Cell to) {
  auto& pose = robots_.at(id);
  cells_[index(pose.cell)] = 0;
  pose.cell = wrap(to, side());
  cells_[index(pose.cell)] = static_cast<std::int32_t>(id + 1);
}

void World::move_block(std::size_t id, Cell to) {
  auto& cell = blocks_.at(id);
  cells_[index(cell)] = 0;
  cell = wrap(to, side());
  cells_[index(cell)] = -static_cast<std::int32_t>(id + 1);
}

bool World::consistent() const {
  const int n = side();
  std::vector<std::int32_t> expected(cells_.size(), 0);
  auto in_range = [n](Cell c) { return c.x >= 0 && c.x < n && c.y >= 0 && c.y < n; };
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    const Cell c = robots_[i].cell;
    if (!in_range(c)) return false;
    auto& slot = expected[index(c)];
    if (slot != 0) return false;
    slot = static_cast<std::int32_t>(i + 1);
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Cell c = blocks_[i];
    if (!in_range(c)) return false;
    auto& slot = expected[index(c)];
    if (slot != 0) return false;
    slot = -static_cast<std::int32_t>(i + 1);
  }
  return expected == cells_;
}

bool World::same_layout(const World& other) const {
  if (side() != other.side()) return false;
  auto key = [](const RobotPose& p) { return std::tuple(p.cell, static_cast<int>(p.heading)); };
  auto robots_a = robots_;
  auto robots_b = other.robots_;
  auto by_key = [&](const RobotPose& a, const RobotPose& b) { return key(a) < key(b); };
  std::sort(robots_a.begin(), robots_a.end(), by_key);
  std::sort(robots_b.begin(), robots_b.end(), by_key);
  auto blocks_a = blocks_;
  auto blocks_b = other.blocks_;
  std::sort(blocks_a.begin(), blocks_a.end());
  std::sort(blocks_b.begin(), blocks_b.end());
  return robots_a == robots_b && blocks_a == blocks_b;
}

World random_world(const SimConfig& config, Rng& rng) {
  config.validate();
  const auto side = static_cast<std::uint32_t>(config.side_length);
  std::vector<std::uint32_t> cells(static_cast<std::size_t>(side) * side);
  std::iota(cells.begin(), cells.end(), 0u);
  const auto needed = static_cast<std::size_t>(config.swarm_size + config.block_count);
  // Partial Fisher-Yates: the first `needed` slots are a uniform sample.
  for (std::size_t k = 0; k < needed; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(cells.size() - k));
    std::swap(cells[k], cells[j]);
  }
  World world(config);
  auto to_cell = [side](std::uint32_t i) {
    return Cell{static_cast<int>(i % side), static_cast<int>(i / side)};
  };
  for (int i = 0; i < config.swarm_size; ++i) {
    const auto h = static_cast<Heading>(rng.below(4));
    world.add_robot(to_cell(cells[static_cast<std::size_t>(i)]), h);
  }
  for (int i = 0; i < config.block_count; ++i) {
    world.add_block(to_cell(cells[static_cast<std::size_t>(config.swarm_size + i)]));
  }
  return world;
}

std::array<Cell, kSensedCells> sensed_cells(const RobotPose& pose, int side) noexcept {
  const Cell f = forward_offset(pose.heading);
  const Cell l = forward_offset(turned(pose.heading, TurnDirection::CounterClockwise));
  const Cell r = forward_offset(turned(pose.heading, TurnDirection::Clockwise));
  const Cell p = pose.cell;
  auto at = [&](int ahead, Cell lateral) {
    return wrap({p.x + ahead * f.x + lateral.x, p.y + ahead * f.y + lateral.y}, side);
  };
  constexpr Cell none{0, 0};
  return {at(1, none), at(1, l), at(1, r), at(2, none), at(2, l), at(2, r)};
}

SensorReading sense(const World& world, std::size_t robot_id) {
  const auto cells = sensed_cells(world.robots()[robot_id], world.side());
  SensorReading reading;
  for (std::size_t i = 0; i < kSensedCells; ++i) {
    reading.s[i] = world.has_robot(cells[i]) ? 1 : 0;
    reading.s[kSensedCells + i] = world.has_block(cells[i]) ? 1 : 0;
  }
  return reading;
}

SensorGeometry::SensorGeometry(int side) : side_(side) {
  const auto cells = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  table_.resize(cells * 4 * kSensedCells);
  auto out = table_.begin();
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int h = 0; h < 4; ++h) {
        for (const Cell c : sensed_cells({{x, y}, static_cast<Heading>(h)}, side)) {
          *out++ = static_cast<std::uint32_t>(c.y * side + c.x);
        }
      }
    }
  }
}

SensorReading sense(const World& world, const SensorGeometry& geometry, std::size_t robot_id) noexcept {
  const RobotPose& pose = world.robots()[robot_id];
  const auto cells = geometry.cells(world.cell_index(pose.cell), pose.heading);
  SensorReading reading;
  for (std::size_t i = 0; i < kSensedCells; ++i) {
    const std::int32_t v = world.occupancy(cells[i]);
    reading.s[i] = v > 0 ? 1 : 0;
    reading.s[kSensedCells + i] = v < 0 ? 1 : 0;
  }
  return reading;
}

MoveOutcome attempt_actuate(World& world, std::size_t robot_id, ActionCommand cmd) {
  const RobotPose pose = world.robots()[robot_id];
  if (cmd.action == Action::Turn) {
    world.set_heading(robot_id, turned(pose.heading, cmd.turn));
    return MoveOutcome::Turned;
  }
  const Cell f = forward_offset(pose.heading);
  const Cell c1 = wrap({pose.cell.x + f.x, pose.cell.y + f.y}, world.side());
  if (world.is_empty(c1)) {
    world.move_robot(robot_id, c1);
    return MoveOutcome::Moved;
  }
  if (const auto block = world.block_at(c1)) {
    const Cell c2 = wrap({c1.x + f.x, c1.y + f.y}, world.side());
    if (!world.is_empty(c2)) return MoveOutcome::Blocked;
    world.move_block(*block, c2);
    world.move_robot(robot_id, c1);
    return MoveOutcome::Pushed;
  }
  return MoveOutcome::Blocked;
}

void step(World& world, std::span<const ActionCommand> commands, Rng& rng,
          std::span<std::uint32_t> order, std::span<MoveOutcome> outcomes) {
  const std::size_t n = world.robots().size();
  if (commands.size() != n || order.size() != n || outcomes.size() != n) {
    throw std::invalid_argument("step: need exactly one command per robot");
  }
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order);
  for (const std::uint32_t id : order) outcomes[id] = attempt_actuate(world, id, commands[id]);
}

std::vector<MoveOutcome> step(World& world, std::span<const ActionCommand> commands, Rng& rng) {
  std::vector<std::uint32_t> order(world.robots().size());
  std::vector<MoveOutcome> outcomes(world.robots().size());
  step(world, commands, rng, order, outcomes);
  return outcomes;
}

}  // namespace minsurprise
