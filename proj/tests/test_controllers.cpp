#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "minsurprise/controllers.hpp"
#include "minsurprise/evolution.hpp"

using namespace minsurprise;

namespace {

// Genome offsets written out from the documented layout.
constexpr std::size_t kActionOutBias = 13 * 8 + 8 + 8 * 2;        // 128
constexpr std::size_t kPredSelf = 13 * 8 + 8;                      // 112
constexpr std::size_t kPredOut = kPredSelf + 8;                    // 120
constexpr std::size_t kPredOutBias = kPredOut + 8 * 12;            // 216

double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SensorReading reading_from_mask(std::uint32_t mask) {
  SensorReading s;
  for (std::size_t r = 0; r < kSensorCount; ++r) s.s[r] = (mask >> r) & 1u;
  return s;
}

// Straight from the genome vector, without the decoded layout.
std::array<double, 2> ref_action_outputs(const Genome& g, const SensorReading& s, int prev) {
  const auto& w = g.action_weights;
  std::array<double, 8> h{};
  for (int j = 0; j < 8; ++j) {
    double a = w[13 * 8 + j];
    for (int i = 0; i < 12; ++i) a += w[j * 13 + i] * s.s[i];
    a += w[j * 13 + 12] * prev;
    h[j] = std::tanh(a);
  }
  std::array<double, 2> o{};
  for (int k = 0; k < 2; ++k) {
    double a = w[kActionOutBias + k];
    for (int j = 0; j < 8; ++j) a += w[13 * 8 + 8 + k * 8 + j] * h[j];
    o[k] = ref_sigmoid(a);
  }
  return o;
}

std::array<double, 12> ref_predict(const Genome& g, const SensorReading& s, int action,
                                   std::array<double, 8>& hidden) {
  const auto& w = g.prediction_weights;
  std::array<double, 8> h{};
  for (int j = 0; j < 8; ++j) {
    double a = w[13 * 8 + j] + w[kPredSelf + j] * hidden[j];
    for (int i = 0; i < 12; ++i) a += w[j * 13 + i] * s.s[i];
    a += w[j * 13 + 12] * action;
    h[j] = std::tanh(a);
  }
  hidden = h;
  std::array<double, 12> p{};
  for (int k = 0; k < 12; ++k) {
    double a = w[kPredOutBias + k];
    for (int j = 0; j < 8; ++j) a += w[kPredOut + k * 8 + j] * h[j];
    p[k] = ref_sigmoid(a);
  }
  return p;
}

}  // namespace

TEST_CASE("weight counts follow the topology") {
  CHECK(kActionWeightCount == 130);
  CHECK(kPredictionWeightCount == 228);
  CHECK(kActionWeightCount + kPredictionWeightCount == 358);
}

TEST_CASE("genome validation") {
  Genome g = Genome::zeros();
  CHECK_NOTHROW(g.validate());
  g.prediction_weights.pop_back();  // 357 weights in total
  CHECK_THROWS_AS(g.validate(), MalformedGenome);
  CHECK_THROWS_AS(decode(g), MalformedGenome);
  g = Genome::zeros();
  g.action_weights[3] = 5.5;
  CHECK_THROWS_AS(g.validate(), MalformedGenome);
  g.action_weights[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(g.validate(), MalformedGenome);
  g.action_weights[3] = -5.0;
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("zero genome decodes to zero networks") {
  const Controller c = decode(Genome::zeros());
  CHECK(c == Controller{});
}

TEST_CASE("decode and encode are inverse") {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const Genome g = random_genome(rng);
    CHECK(encode(decode(g)) == g);
  }
}

TEST_CASE("decode maps the documented positions") {
  Genome g = Genome::zeros();
  g.action_weights[2 * 13 + 5] = 0.25;  // hidden 2, input 5
  g.action_weights[13 * 8 + 7] = 0.5;   // hidden bias 7
  g.action_weights[13 * 8 + 8 + 8 + 3] = 0.75;  // output 1, hidden 3
  g.action_weights[kActionOutBias + 1] = 1.0;
  g.prediction_weights[kPredSelf + 4] = -0.5;
  g.prediction_weights[kPredOut + 11 * 8 + 6] = 2.0;
  g.prediction_weights[kPredOutBias + 9] = -2.0;
  const Controller c = decode(g);
  CHECK(c.action.w_in[5][2] == 0.25);
  CHECK(c.action.b_hidden[7] == 0.5);
  CHECK(c.action.w_out[1][3] == 0.75);
  CHECK(c.action.b_out[1] == 1.0);
  CHECK(c.prediction.w_self[4] == -0.5);
  CHECK(c.prediction.w_out[11][6] == 2.0);
  CHECK(c.prediction.b_out[9] == -2.0);
}

TEST_CASE("zero action net moves and turns clockwise") {
  const Controller c = decode(Genome::zeros());
  ControllerState state;
  const auto cmd = act(c.action, SensorReading{}, state);
  CHECK(cmd.action == Action::Move);
  CHECK(cmd.turn == TurnDirection::Clockwise);
  CHECK(state.last_action == Action::Move);
}

TEST_CASE("large move bias always moves") {
  Genome g = Genome::zeros();
  g.action_weights[kActionOutBias] = 5.0;
  g.action_weights[kActionOutBias + 1] = -5.0;
  const Controller c = decode(g);
  for (std::uint32_t p = 0; p < (1u << 13); ++p) {
    const auto cmd = act_pattern(c.action, p);
    REQUIRE(cmd.action == Action::Move);
    REQUIRE(cmd.turn == TurnDirection::CounterClockwise);
  }
}

TEST_CASE("act matches a manual forward pass") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Genome g = random_genome(rng);
    const Controller c = decode(g);
    for (int k = 0; k < 40; ++k) {
      const auto mask = static_cast<std::uint32_t>(rng.below(1u << 12));
      const int prev = static_cast<int>(rng.below(2));
      const SensorReading s = reading_from_mask(mask);
      const auto o = ref_action_outputs(g, s, prev);
      ControllerState state;
      state.last_action = prev ? Action::Move : Action::Turn;
      const auto cmd = act(c.action, s, state);
      // Skip the measure-zero cases sitting on the threshold within rounding.
      if (std::abs(o[0] - 0.5) > 1e-9) CHECK((cmd.action == Action::Move) == (o[0] >= 0.5));
      if (std::abs(o[1] - 0.5) > 1e-9) CHECK((cmd.turn == TurnDirection::Clockwise) == (o[1] >= 0.5));
      CHECK(act_pattern(c.action, mask | (prev ? 1u << 12 : 0u)) == cmd);
    }
  }
}

TEST_CASE("act is pure") {
  Rng rng(14);
  const Controller c = decode(random_genome(rng));
  const SensorReading s = reading_from_mask(0b101000100001);
  ControllerState a, b;
  CHECK(act(c.action, s, a) == act(c.action, s, b));
}

TEST_CASE("zero prediction net predicts one half") {
  const Controller c = decode(Genome::zeros());
  ControllerState state;
  for (std::uint32_t mask : {0u, 0xFFFu, 0x0A5u}) {
    const auto p = predict(c.prediction, reading_from_mask(mask), Action::Move, state);
    for (double v : p.p) CHECK(v == 0.5);
  }
}

TEST_CASE("predict matches a manual forward pass over a sequence") {
  Rng rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const Genome g = random_genome(rng);
    const Controller c = decode(g);
    ControllerState state;
    std::array<double, 8> ref_hidden{};
    for (int t = 0; t < 30; ++t) {
      const SensorReading s = reading_from_mask(static_cast<std::uint32_t>(rng.below(1u << 12)));
      const int a = static_cast<int>(rng.below(2));
      const auto expected = ref_predict(g, s, a, ref_hidden);
      const auto got = predict(c.prediction, s, a ? Action::Move : Action::Turn, state);
      for (int r = 0; r < 12; ++r) CHECK(got.p[r] == doctest::Approx(expected[r]).epsilon(1e-12));
      for (int j = 0; j < 8; ++j) CHECK(state.hidden[j] == doctest::Approx(ref_hidden[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("without self-loops the stored hidden state is irrelevant") {
  Rng rng(16);
  Genome g = random_genome(rng);
  for (std::size_t j = 0; j < 8; ++j) g.prediction_weights[kPredSelf + j] = 0.0;
  const Controller c = decode(g);
  const SensorReading s = reading_from_mask(0b000001000001);
  ControllerState a, b;
  for (auto& h : b.hidden) h = rng.uniform(-1, 1);
  CHECK(predict(c.prediction, s, Action::Turn, a) == predict(c.prediction, s, Action::Turn, b));
}

TEST_CASE("a saturated output unit predicts near one") {
  Genome g = Genome::zeros();
  g.prediction_weights[kPredOutBias + 6] = 5.0;
  const Controller c = decode(g);
  ControllerState state;
  const auto p = predict(c.prediction, SensorReading{}, Action::Turn, state);
  CHECK(p.p[6] >= 0.99);
  CHECK(p.p[6] == doctest::Approx(ref_sigmoid(5.0)));
  CHECK(p.p[0] == 0.5);
}

TEST_CASE("prediction outputs stay in [0, 1] for extreme weights") {
  Rng rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    Genome g = random_genome(rng);
    for (auto& w : g.prediction_weights) w = rng.bernoulli(0.5) ? 5.0 : -5.0;
    const Controller c = decode(g);
    ControllerState state;
    for (int t = 0; t < 10; ++t) {
      const auto p =
          predict(c.prediction, reading_from_mask(static_cast<std::uint32_t>(rng.below(4096))), Action::Move, state);
      for (double v : p.p) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
}

TEST_CASE("scenario predictions") {
  const auto pairs = scenario_prediction(Scenario::Pairs);
  const auto clusters = scenario_prediction(Scenario::Clusters);
  const auto empty = scenario_prediction(Scenario::Empty);
  for (std::size_t r = 0; r < 12; ++r) {
    CHECK(pairs.p[r] == ((r == 6 || r == 9) ? 1.0 : 0.0));
    CHECK(clusters.p[r] == (r >= 6 ? 1.0 : 0.0));
    CHECK(empty.p[r] == 0.0);
  }
  CHECK_THROWS_AS(scenario_prediction(Scenario::Emergent), std::invalid_argument);
  CHECK(parse_scenario("clusters") == Scenario::Clusters);
  CHECK(to_string(Scenario::Empty) == "empty");
  CHECK_THROWS_AS(parse_scenario("lines"), ConfigError);
}

TEST_CASE("genome text round-trips bit-exactly") {
  Rng rng(19);
  Genome g = random_genome(rng);
  g.action_weights[0] = 0.1;
  g.action_weights[1] = -5.0;
  g.action_weights[2] = 1e-300;
  g.prediction_weights[0] = std::nextafter(1.0, 2.0);
  std::stringstream ss;
  write_genome(ss, g);
  const std::string text = ss.str();
  CHECK(text.rfind("minsurprise-genome v1 130 228\n", 0) == 0);
  CHECK(read_genome(ss) == g);
}

TEST_CASE("malformed genome files are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_genome(empty), MalformedGenome);
  std::istringstream bad_header("genome v2 130 228\n");
  CHECK_THROWS_AS(read_genome(bad_header), MalformedGenome);
  std::istringstream wrong_topology("minsurprise-genome v1 130 227\n");
  CHECK_THROWS_AS(read_genome(wrong_topology), MalformedGenome);
  std::stringstream short_body;
  short_body << "minsurprise-genome v1 130 228\n";
  for (int i = 0; i < 357; ++i) short_body << "0 ";
  CHECK_THROWS_AS(read_genome(short_body), MalformedGenome);
  std::stringstream junk;
  junk << "minsurprise-genome v1 130 228\n";
  for (int i = 0; i < 357; ++i) junk << "0 ";
  junk << "zero";
  CHECK_THROWS_AS(read_genome(junk), MalformedGenome);
}
