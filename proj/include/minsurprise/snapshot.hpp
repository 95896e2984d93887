#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "minsurprise/world.hpp"

namespace minsurprise {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// L lines of L characters: '.' empty, 'B' block, 'N'/'E'/'S'/'W' a robot
/// with that heading. Every line ends in '\n'.
std::string render(const World& world);

/// Inverse of render. Robot and block ids are assigned in row-major order.
/// The returned world's config carries L, N and B; steps and seed keep their
/// defaults.
World parse_snapshot(std::string_view text);

}  // namespace minsurprise
