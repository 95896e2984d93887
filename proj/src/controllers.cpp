#include "minsurprise/controllers.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace minsurprise {

namespace {

class Reader {
 public:
  explicit Reader(const std::vector<double>& w) : w_(w) {}
  double next() { return w_[pos_++]; }

 private:
  const std::vector<double>& w_;
  std::size_t pos_ = 0;
};

template <std::size_t Rows, std::size_t Cols>
void read_matrix(Reader& r, std::array<std::array<double, Cols>, Rows>& m) {
  for (auto& row : m)
    for (auto& v : row) v = r.next();
}

// Genome order is one row per receiving unit; decoded nets are input-major.
template <std::size_t Inputs, std::size_t Hidden>
void read_transposed(Reader& r, std::array<std::array<double, Hidden>, Inputs>& m) {
  for (std::size_t h = 0; h < Hidden; ++h)
    for (std::size_t i = 0; i < Inputs; ++i) m[i][h] = r.next();
}

template <std::size_t Inputs, std::size_t Hidden>
void append_transposed(std::vector<double>& out, const std::array<std::array<double, Hidden>, Inputs>& m) {
  for (std::size_t h = 0; h < Hidden; ++h)
    for (std::size_t i = 0; i < Inputs; ++i) out.push_back(m[i][h]);
}

template <std::size_t N>
void read_vector(Reader& r, std::array<double, N>& v) {
  for (auto& x : v) x = r.next();
}

template <std::size_t Rows, std::size_t Cols>
void append(std::vector<double>& out, const std::array<std::array<double, Cols>, Rows>& m) {
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
}

template <std::size_t N>
void append(std::vector<double>& out, const std::array<double, N>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

}  // namespace

Genome Genome::zeros() {
  return {std::vector<double>(kActionWeightCount, 0.0),
          std::vector<double>(kPredictionWeightCount, 0.0)};
}

void Genome::validate() const {
  if (action_weights.size() != kActionWeightCount ||
      prediction_weights.size() != kPredictionWeightCount) {
    throw MalformedGenome("genome has " + std::to_string(action_weights.size()) + "+" +
                          std::to_string(prediction_weights.size()) + " weights, expected " +
                          std::to_string(kActionWeightCount) + "+" +
                          std::to_string(kPredictionWeightCount));
  }
  auto check = [](const std::vector<double>& ws) {
    for (double w : ws) {
      if (!std::isfinite(w) || std::abs(w) > kWeightLimit) {
        throw MalformedGenome("genome weight out of range: " + std::to_string(w));
      }
    }
  };
  check(action_weights);
  check(prediction_weights);
}

Controller decode(const Genome& genome) {
  genome.validate();
  Controller c;
  Reader a(genome.action_weights);
  read_transposed(a, c.action.w_in);
  read_vector(a, c.action.b_hidden);
  read_matrix(a, c.action.w_out);
  read_vector(a, c.action.b_out);

  Reader p(genome.prediction_weights);
  read_transposed(p, c.prediction.w_in);
  read_vector(p, c.prediction.b_hidden);
  read_vector(p, c.prediction.w_self);
  read_matrix(p, c.prediction.w_out);
  read_vector(p, c.prediction.b_out);
  return c;
}

Genome encode(const Controller& c) {
  Genome g;
  g.action_weights.reserve(kActionWeightCount);
  append_transposed(g.action_weights, c.action.w_in);
  append(g.action_weights, c.action.b_hidden);
  append(g.action_weights, c.action.w_out);
  append(g.action_weights, c.action.b_out);

  g.prediction_weights.reserve(kPredictionWeightCount);
  append_transposed(g.prediction_weights, c.prediction.w_in);
  append(g.prediction_weights, c.prediction.b_hidden);
  append(g.prediction_weights, c.prediction.w_self);
  append(g.prediction_weights, c.prediction.w_out);
  append(g.prediction_weights, c.prediction.b_out);
  return g;
}

double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

// tanh through exp, which is markedly cheaper than std::tanh here. Saturates
// correctly: exp overflow gives 1, underflow gives -1.
inline double fast_tanh(double x) noexcept { return 1.0 - 2.0 / (std::exp(2.0 * x) + 1.0); }

// hidden[h] = tanh(start[h] + sum of w_in[i][h] over set bits i, in increasing i).
template <std::size_t Hidden>
std::array<double, Hidden> hidden_layer(const std::array<std::array<double, Hidden>, kNetInputs>& w_in,
                                        std::array<double, Hidden> sum, std::uint32_t pattern) noexcept {
  for (std::uint32_t bits = pattern & ((1u << kNetInputs) - 1); bits != 0; bits &= bits - 1) {
    const auto& column = w_in[static_cast<std::size_t>(std::countr_zero(bits))];
    for (std::size_t h = 0; h < Hidden; ++h) sum[h] += column[h];
  }
  for (auto& v : sum) v = fast_tanh(v);
  return sum;
}

}  // namespace

ActionCommand act_pattern(const ActionNet& net, std::uint32_t pattern) noexcept {
  const auto hidden = hidden_layer(net.w_in, net.b_hidden, pattern);
  std::array<double, kActionOutputs> out{};
  for (std::size_t o = 0; o < kActionOutputs; ++o) {
    double sum = net.b_out[o];
    for (std::size_t h = 0; h < kActionHidden; ++h) sum += net.w_out[o][h] * hidden[h];
    out[o] = sigmoid(sum);
  }
  return {out[0] >= 0.5 ? Action::Move : Action::Turn,
          out[1] >= 0.5 ? TurnDirection::Clockwise : TurnDirection::CounterClockwise};
}

ActionCommand act(const ActionNet& net, const SensorReading& sensors, ControllerState& state) {
  const std::uint32_t pattern =
      sensors.mask() | (state.last_action == Action::Move ? 1u << kSensorCount : 0u);
  const ActionCommand cmd = act_pattern(net, pattern);
  state.last_action = cmd.action;
  return cmd;
}

PredictionVector predict_pattern(const PredictionNet& net, std::uint32_t pattern,
                                 ControllerState& state) noexcept {
  std::array<double, kPredictionHidden> start{};
  for (std::size_t h = 0; h < kPredictionHidden; ++h) start[h] = net.b_hidden[h] + net.w_self[h] * state.hidden[h];
  state.hidden = hidden_layer(net.w_in, start, pattern);
  PredictionVector out;
  for (std::size_t o = 0; o < kPredictionOutputs; ++o) {
    double sum = net.b_out[o];
    for (std::size_t h = 0; h < kPredictionHidden; ++h) sum += net.w_out[o][h] * state.hidden[h];
    out.p[o] = sigmoid(sum);
  }
  return out;
}

PredictionVector predict(const PredictionNet& net, const SensorReading& sensors, Action action,
                         ControllerState& state) {
  const std::uint32_t pattern = sensors.mask() | (action == Action::Move ? 1u << kSensorCount : 0u);
  return predict_pattern(net, pattern, state);
}

std::string_view to_string(Scenario scenario) noexcept {
  switch (scenario) {
    case Scenario::Emergent: return "emergent";
    case Scenario::Pairs: return "pairs";
    case Scenario::Clusters: return "clusters";
    case Scenario::Empty: return "empty";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  for (auto s : {Scenario::Emergent, Scenario::Pairs, Scenario::Clusters, Scenario::Empty}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) +
                    "' (expected emergent, pairs, clusters or empty)");
}

PredictionVector scenario_prediction(Scenario scenario) {
  PredictionVector v;
  switch (scenario) {
    case Scenario::Emergent:
      throw std::invalid_argument("the emergent scenario has no fixed prediction");
    case Scenario::Pairs:
      v.p[6] = 1.0;
      v.p[9] = 1.0;
      break;
    case Scenario::Clusters:
      for (std::size_t r = kSensedCells; r < kSensorCount; ++r) v.p[r] = 1.0;
      break;
    case Scenario::Empty:
      break;
  }
  return v;
}

void write_genome(std::ostream& out, const Genome& genome) {
  out << "minsurprise-genome v1 " << genome.action_weights.size() << ' '
      << genome.prediction_weights.size() << '\n';
  std::array<char, 64> buf{};
  auto write_line = [&](const std::vector<double>& ws) {
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), ws[i],
                                     std::chars_format::general, 17);
      if (i) out << ' ';
      out.write(buf.data(), res.ptr - buf.data());
    }
    out << '\n';
  };
  write_line(genome.action_weights);
  write_line(genome.prediction_weights);
}

Genome read_genome(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw MalformedGenome("genome file is empty");
  std::istringstream hs(header);
  std::string magic, version;
  std::size_t action_len = 0, prediction_len = 0;
  if (!(hs >> magic >> version >> action_len >> prediction_len) || magic != "minsurprise-genome" ||
      version != "v1") {
    throw MalformedGenome("bad genome header: '" + header + "'");
  }
  std::vector<double> weights;
  std::string token;
  while (in >> token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
      throw MalformedGenome("bad genome weight '" + token + "'");
    }
    weights.push_back(v);
  }
  if (weights.size() != action_len + prediction_len) {
    throw MalformedGenome("genome header announces " + std::to_string(action_len + prediction_len) +
                          " weights, file holds " + std::to_string(weights.size()));
  }
  const auto split = weights.begin() + static_cast<std::ptrdiff_t>(action_len);
  Genome g{{weights.begin(), split}, {split, weights.end()}};
  g.validate();
  return g;
}

void save_genome(const std::filesystem::path& path, const Genome& genome) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_genome(out, genome);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Genome load_genome(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_genome(in);
}

}  // namespace minsurprise
