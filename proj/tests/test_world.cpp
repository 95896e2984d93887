#include <doctest.h>

#include <set>

#include "minsurprise/snapshot.hpp"
#include "minsurprise/world.hpp"

using namespace minsurprise;

namespace {

SimConfig config(int side, int robots = 1, int blocks = 0) {
  SimConfig c;
  c.side_length = side;
  c.swarm_size = robots;
  c.block_count = blocks;
  return c;
}

ActionCommand move() { return {Action::Move, TurnDirection::Clockwise}; }
ActionCommand turn(TurnDirection d) { return {Action::Turn, d}; }

}  // namespace

TEST_CASE("headings cycle clockwise and counter-clockwise") {
  CHECK(turned(Heading::North, TurnDirection::Clockwise) == Heading::East);
  CHECK(turned(Heading::East, TurnDirection::Clockwise) == Heading::South);
  CHECK(turned(Heading::South, TurnDirection::Clockwise) == Heading::West);
  CHECK(turned(Heading::West, TurnDirection::Clockwise) == Heading::North);
  for (auto h : {Heading::North, Heading::East, Heading::South, Heading::West}) {
    CHECK(turned(turned(h, TurnDirection::Clockwise), TurnDirection::CounterClockwise) == h);
    CHECK(heading_from_letter(heading_letter(h)) == h);
  }
  CHECK(forward_offset(Heading::North) == Cell{0, -1});
  CHECK(forward_offset(Heading::East) == Cell{1, 0});
  CHECK(!heading_from_letter('x'));
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(config(16, 10, 32).validate());
  CHECK_THROWS_AS(config(16, 300, 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(16, 0, 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(16, 1, -1).validate(), ConfigError);
  auto c = config(16);
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("random_world places every entity on a distinct cell") {
  const auto cfg = config(16, 10, 32);
  Rng rng(1);
  const World w = random_world(cfg, rng);
  int occupied = 0;
  for (std::size_t i = 0; i < 256; ++i) occupied += w.occupancy(i) != 0 ? 1 : 0;
  CHECK(occupied == 42);
  CHECK(256 - occupied == 214);
  CHECK(w.robots().size() == 10);
  CHECK(w.blocks().size() == 32);
  CHECK(w.consistent());
}

TEST_CASE("random_world is deterministic per seed") {
  const auto cfg = config(16, 10, 32);
  Rng a(42), b(42), c(43);
  const World wa = random_world(cfg, a);
  CHECK(wa == random_world(cfg, b));
  CHECK_FALSE(wa == random_world(cfg, c));
}

TEST_CASE("random_world fills a 2x2 grid with four robots") {
  Rng rng(5);
  World w = random_world(config(2, 4, 0), rng);
  for (std::size_t i = 0; i < 4; ++i) CHECK(w.occupancy(i) > 0);
  CHECK_THROWS(w.add_block({0, 0}));
  CHECK_THROWS_AS(random_world(config(2, 4, 1), rng), ConfigError);
}

TEST_CASE("random_world headings are uniform") {
  std::array<int, 4> counts{};
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const World w = random_world(config(8, 8, 0), rng);
    for (const auto& r : w.robots()) ++counts[static_cast<int>(r.heading)];
  }
  // 2000 expected each, sigma ~ 38.7.
  for (int c : counts) CHECK(std::abs(c - 2000) < 200);
}

TEST_CASE("sensed cells follow C1 L1 R1 C2 L2 R2 for every heading") {
  // Forward, left and right unit vectors written out per heading.
  struct Frame {
    Heading h;
    Cell f, l, r;
  };
  const Frame frames[] = {{Heading::North, {0, -1}, {-1, 0}, {1, 0}},
                          {Heading::East, {1, 0}, {0, -1}, {0, 1}},
                          {Heading::South, {0, 1}, {1, 0}, {-1, 0}},
                          {Heading::West, {-1, 0}, {0, 1}, {0, -1}}};
  const int side = 7;
  const Cell p{3, 3};
  for (const auto& fr : frames) {
    const auto cells = sensed_cells({p, fr.h}, side);
    const Cell expected[6] = {{p.x + fr.f.x, p.y + fr.f.y},
                              {p.x + fr.f.x + fr.l.x, p.y + fr.f.y + fr.l.y},
                              {p.x + fr.f.x + fr.r.x, p.y + fr.f.y + fr.r.y},
                              {p.x + 2 * fr.f.x, p.y + 2 * fr.f.y},
                              {p.x + 2 * fr.f.x + fr.l.x, p.y + 2 * fr.f.y + fr.l.y},
                              {p.x + 2 * fr.f.x + fr.r.x, p.y + 2 * fr.f.y + fr.r.y}};
    for (int i = 0; i < 6; ++i) CHECK(cells[i] == expected[i]);
  }
}

TEST_CASE("sense: empty surroundings read all zero") {
  World w(config(8));
  w.add_robot({4, 4}, Heading::East);
  CHECK(sense(w, 0) == SensorReading{});
}

TEST_CASE("sense: a block directly ahead sets s6 only") {
  World w(config(8, 1, 1));
  w.add_robot({4, 4}, Heading::North);
  w.add_block({4, 3});
  SensorReading expected;
  expected.s[6] = 1;
  CHECK(sense(w, 0) == expected);
}

TEST_CASE("sense: a block two ahead sets s9 and near cells do not occlude") {
  World w(config(8, 2, 1));
  w.add_robot({4, 4}, Heading::West);
  w.add_robot({3, 4}, Heading::North);
  w.add_block({2, 4});
  const auto s = sense(w, 0);
  CHECK(s.s[0] == 1);
  CHECK(s.s[9] == 1);
  CHECK(s.mask() == ((1u << 0) | (1u << 9)));
}

TEST_CASE("sense wraps around the torus") {
  const int side = 8;
  World w(config(side, 2));
  w.add_robot({5, 0}, Heading::North);
  w.add_robot({5, side - 1}, Heading::South);
  CHECK(sense(w, 0).s[0] == 1);
  CHECK(sense(w, 1).s[0] == 1);
}

TEST_CASE("geometry-based sensing agrees with direct sensing") {
  Rng rng(17);
  for (int side : {3, 5, 8, 16}) {
    const SensorGeometry geometry(side);
    for (int trial = 0; trial < 20; ++trial) {
      const World w = random_world(config(side, 3, side), rng);
      for (std::size_t id = 0; id < 3; ++id) {
        CHECK(sense(w, geometry, id) == sense(w, id));
        CHECK(sense(w, id) == sense(w, id));
      }
    }
  }
}

TEST_CASE("attempt_actuate rules") {
  SUBCASE("move into empty cell") {
    World w(config(5));
    w.add_robot({2, 2}, Heading::East);
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Moved);
    CHECK(w.robots()[0].cell == Cell{3, 2});
  }
  SUBCASE("move wraps") {
    World w(config(5));
    w.add_robot({4, 0}, Heading::East);
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Moved);
    CHECK(w.robots()[0].cell == Cell{0, 0});
  }
  SUBCASE("push a single block") {
    World w(config(5, 1, 1));
    w.add_robot({1, 2}, Heading::East);
    w.add_block({2, 2});
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Pushed);
    CHECK(w.robots()[0].cell == Cell{2, 2});
    CHECK(w.blocks()[0] == Cell{3, 2});
    CHECK(w.consistent());
  }
  SUBCASE("no chain push") {
    World w(config(6, 1, 2));
    w.add_robot({1, 2}, Heading::East);
    w.add_block({2, 2});
    w.add_block({3, 2});
    const World before = w;
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Blocked);
    CHECK(w == before);
  }
  SUBCASE("no push into a robot") {
    World w(config(6, 2, 1));
    w.add_robot({1, 2}, Heading::East);
    w.add_block({2, 2});
    w.add_robot({3, 2}, Heading::South);
    const World before = w;
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Blocked);
    CHECK(w == before);
  }
  SUBCASE("robot ahead blocks") {
    World w(config(6, 2));
    w.add_robot({1, 2}, Heading::East);
    w.add_robot({2, 2}, Heading::East);
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Blocked);
    CHECK(w.robots()[0].cell == Cell{1, 2});
  }
  SUBCASE("turns") {
    World w(config(6));
    w.add_robot({1, 2}, Heading::North);
    CHECK(attempt_actuate(w, 0, turn(TurnDirection::Clockwise)) == MoveOutcome::Turned);
    CHECK(w.robots()[0] == RobotPose{{1, 2}, Heading::East});
    CHECK(attempt_actuate(w, 0, turn(TurnDirection::CounterClockwise)) == MoveOutcome::Turned);
    CHECK(w.robots()[0].heading == Heading::North);
  }
  SUBCASE("push on a 3-torus lands behind the robot") {
    // On L=3 the cell two ahead is the one behind the robot.
    World w(config(3, 1, 1));
    w.add_robot({0, 0}, Heading::East);
    w.add_block({1, 0});
    CHECK(attempt_actuate(w, 0, move()) == MoveOutcome::Pushed);
    CHECK(w.blocks()[0] == Cell{2, 0});
    CHECK(w.robots()[0].cell == Cell{1, 0});
  }
}

TEST_CASE("step: all turns leave positions untouched") {
  Rng rng(4);
  World w = random_world(config(10, 8, 12), rng);
  const World before = w;
  std::vector<ActionCommand> cmds(8, turn(TurnDirection::Clockwise));
  const auto outcomes = step(w, cmds, rng);
  for (auto o : outcomes) CHECK(o == MoveOutcome::Turned);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(w.robots()[i].cell == before.robots()[i].cell);
    CHECK(w.robots()[i].heading == turned(before.robots()[i].heading, TurnDirection::Clockwise));
  }
  CHECK(std::equal(w.blocks().begin(), w.blocks().end(), before.blocks().begin()));
}

TEST_CASE("step: two robots contend for one cell") {
  // 3x3 torus, robot 0 at (0,1) facing East, robot 1 at (2,1) facing West;
  // both target (1,1). With two robots the shuffle swaps order[1] with
  // order[below(2)], so a draw of 0 lets robot 1 act first.
  int first_zero = 0, first_one = 0;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    World w(config(3, 2));
    w.add_robot({0, 1}, Heading::East);
    w.add_robot({2, 1}, Heading::West);
    Rng rng(seed);
    Rng oracle(seed);
    const std::size_t first = oracle.below(2) == 0 ? 1 : 0;
    const std::vector<ActionCommand> cmds{move(), move()};
    const auto outcomes = step(w, cmds, rng);
    CHECK(outcomes[first] == MoveOutcome::Moved);
    CHECK(outcomes[1 - first] == MoveOutcome::Blocked);
    CHECK(w.robots()[first].cell == Cell{1, 1});
    CHECK(w.robots()[1 - first].cell == (first == 0 ? Cell{2, 1} : Cell{0, 1}));
    (first == 0 ? first_zero : first_one)++;
  }
  CHECK(first_zero > 0);
  CHECK(first_one > 0);
}

TEST_CASE("step: a robot can follow into a cell vacated earlier in the same step") {
  // Whether the follower moves depends only on the order.
  int moved = 0, blocked = 0;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    World w(config(5, 2));
    w.add_robot({1, 2}, Heading::East);
    w.add_robot({2, 2}, Heading::East);
    Rng rng(seed);
    const std::vector<ActionCommand> cmds{move(), move()};
    const auto outcomes = step(w, cmds, rng);
    CHECK(outcomes[1] == MoveOutcome::Moved);
    (outcomes[0] == MoveOutcome::Moved ? moved : blocked)++;
  }
  CHECK(moved > 0);
  CHECK(blocked > 0);
}

TEST_CASE("step rejects a command count mismatch") {
  World w(config(5, 2));
  w.add_robot({1, 2}, Heading::East);
  w.add_robot({3, 2}, Heading::East);
  Rng rng(1);
  const std::vector<ActionCommand> cmds{move()};
  CHECK_THROWS_AS(step(w, cmds, rng), std::invalid_argument);
}

TEST_CASE("step is deterministic") {
  Rng setup(21);
  const World start = random_world(config(12, 10, 20), setup);
  std::vector<ActionCommand> cmds;
  for (int i = 0; i < 10; ++i) cmds.push_back(i % 3 ? move() : turn(TurnDirection::CounterClockwise));
  World a = start, b = start;
  Rng ra(77), rb(77);
  for (int t = 0; t < 50; ++t) {
    step(a, cmds, ra);
    step(b, cmds, rb);
  }
  CHECK(a == b);
}

TEST_CASE("1000 steps conserve entities") {
  Rng rng(2);
  World w = random_world(config(16, 10, 32), rng);
  std::vector<ActionCommand> cmds(10);
  for (int t = 0; t < 1000; ++t) {
    for (auto& c : cmds) {
      c = rng.bernoulli(0.7) ? move()
                             : turn(rng.bernoulli(0.5) ? TurnDirection::Clockwise : TurnDirection::CounterClockwise);
    }
    step(w, cmds, rng);
    REQUIRE(w.consistent());
  }
  CHECK(w.robots().size() == 10);
  CHECK(w.blocks().size() == 32);
}

TEST_CASE("actuation touches only the actor and at most one block") {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    World w = random_world(config(6, 6, 14), rng);
    const World before = w;
    const auto id = static_cast<std::size_t>(rng.below(6));
    attempt_actuate(w, id, move());
    int blocks_changed = 0;
    for (std::size_t b = 0; b < w.blocks().size(); ++b) blocks_changed += w.blocks()[b] != before.blocks()[b];
    for (std::size_t r = 0; r < 6; ++r) {
      if (r != id) CHECK(w.robots()[r] == before.robots()[r]);
    }
    CHECK(blocks_changed <= 1);
    CHECK(w.consistent());
  }
}

TEST_CASE("snapshot format") {
  SUBCASE("2x2 example") {
    World w(config(2, 1, 1));
    w.add_robot({0, 0}, Heading::North);
    w.add_block({1, 1});
    CHECK(render(w) == "N.\n.B\n");
  }
  SUBCASE("empty 3x3") {
    World w(config(3));
    CHECK(render(w) == "...\n...\n...\n");
  }
  SUBCASE("round trip of random worlds") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
      const World w = random_world(config(4 + static_cast<int>(rng.below(14)), 4, 6), rng);
      const World back = parse_snapshot(render(w));
      CHECK(back.same_layout(w));
      CHECK(render(back) == render(w));
    }
  }
  SUBCASE("parse assigns row-major ids") {
    const World w = parse_snapshot("E.B\n.BS\nW..\n");
    REQUIRE(w.robots().size() == 3);
    CHECK(w.robots()[0] == RobotPose{{0, 0}, Heading::East});
    CHECK(w.robots()[1] == RobotPose{{2, 1}, Heading::South});
    CHECK(w.robots()[2] == RobotPose{{0, 2}, Heading::West});
    CHECK(w.blocks()[0] == Cell{2, 0});
    CHECK(w.config().swarm_size == 3);
    CHECK(w.config().block_count == 2);
  }
  SUBCASE("malformed snapshots") {
    CHECK_THROWS_AS(parse_snapshot(""), SnapshotError);
    CHECK_THROWS_AS(parse_snapshot("..\n...\n"), SnapshotError);
    CHECK_THROWS_AS(parse_snapshot("..\n.x\n"), SnapshotError);
    CHECK_THROWS_AS(parse_snapshot("...\n...\n"), SnapshotError);
    CHECK_THROWS_AS(parse_snapshot("N.\n.B\n\n"), SnapshotError);
  }
}
