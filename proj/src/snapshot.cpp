#include "minsurprise/snapshot.hpp"

#include <vector>

namespace minsurprise {

std::string render(const World& world) {
  const int side = world.side();
  std::string out;
  out.reserve(static_cast<std::size_t>(side) * (side + 1));
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const Cell c{x, y};
      if (const auto robot = world.robot_at(c)) {
        out.push_back(heading_letter(world.robots()[*robot].heading));
      } else if (world.has_block(c)) {
        out.push_back('B');
      } else {
        out.push_back('.');
      }
    }
    out.push_back('\n');
  }
  return out;
}

World parse_snapshot(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) {
      lines.push_back(text);
      break;
    }
    lines.push_back(text.substr(0, nl));
    text.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw SnapshotError("snapshot is empty");
  const std::size_t side = lines.size();
  for (std::size_t y = 0; y < side; ++y) {
    if (lines[y].size() != side) {
      throw SnapshotError("snapshot line " + std::to_string(y + 1) + " has " +
                          std::to_string(lines[y].size()) + " characters, expected " +
                          std::to_string(side));
    }
  }

  SimConfig config;
  config.side_length = static_cast<int>(side);
  config.swarm_size = 0;
  config.block_count = 0;
  World world(config);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const char ch = lines[y][x];
      const Cell c{static_cast<int>(x), static_cast<int>(y)};
      if (ch == '.') continue;
      if (ch == 'B') {
        world.add_block(c);
      } else if (const auto h = heading_from_letter(ch)) {
        world.add_robot(c, *h);
      } else {
        throw SnapshotError("snapshot line " + std::to_string(y + 1) + " column " +
                            std::to_string(x + 1) + ": unexpected character '" + std::string(1, ch) + "'");
      }
    }
  }
  config.swarm_size = static_cast<int>(world.robots().size());
  config.block_count = static_cast<int>(world.blocks().size());
  World result(config);
  for (const auto& r : world.robots()) result.add_robot(r.cell, r.heading);
  for (const auto& b : world.blocks()) result.add_block(b);
  return result;
}

}  // namespace minsurprise
