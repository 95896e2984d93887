#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "minsurprise/world.hpp"

namespace minsurprise {

// Network topology. Both networks see the 12 sensors plus one action bit.
inline constexpr std::size_t kNetInputs = kSensorCount + 1;
inline constexpr std::size_t kActionHidden = 8;
inline constexpr std::size_t kActionOutputs = 2;
inline constexpr std::size_t kPredictionHidden = 8;
inline constexpr std::size_t kPredictionOutputs = kSensorCount;

inline constexpr std::size_t kActionWeightCount =
    kNetInputs * kActionHidden + kActionHidden + kActionHidden * kActionOutputs + kActionOutputs;
inline constexpr std::size_t kPredictionWeightCount = kNetInputs * kPredictionHidden +
                                                      kPredictionHidden + kPredictionHidden +
                                                      kPredictionHidden * kPredictionOutputs +
                                                      kPredictionOutputs;
static_assert(kActionWeightCount == 130);
static_assert(kPredictionWeightCount == 228);

inline constexpr double kWeightLimit = 5.0;

class MalformedGenome : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat weights for the action and the prediction network.
///
/// Canonical layout of each sequence (all matrices row-major with one row per
/// receiving unit):
///   action:     W_in[8][13], b_hidden[8], W_out[2][8], b_out[2]
///   prediction: W_in[8][13], b_hidden[8], w_self[8], W_out[12][8], b_out[12]
/// Input column 12 is the action bit (A(t-1) for the action net, A(t) for the
/// prediction net).
struct Genome {
  std::vector<double> action_weights;
  std::vector<double> prediction_weights;

  static Genome zeros();

  /// Throws MalformedGenome on wrong lengths, non-finite or out-of-range weights.
  void validate() const;

  friend bool operator==(const Genome&, const Genome&) = default;
};

/// Decoded networks. Input weights are stored input-major (w_in[input][hidden]);
/// output weights are w_out[output][hidden].
struct ActionNet {
  std::array<std::array<double, kActionHidden>, kNetInputs> w_in{};
  std::array<double, kActionHidden> b_hidden{};
  std::array<std::array<double, kActionHidden>, kActionOutputs> w_out{};
  std::array<double, kActionOutputs> b_out{};

  friend bool operator==(const ActionNet&, const ActionNet&) = default;
};

struct PredictionNet {
  std::array<std::array<double, kPredictionHidden>, kNetInputs> w_in{};
  std::array<double, kPredictionHidden> b_hidden{};
  std::array<double, kPredictionHidden> w_self{};
  std::array<std::array<double, kPredictionHidden>, kPredictionOutputs> w_out{};
  std::array<double, kPredictionOutputs> b_out{};

  friend bool operator==(const PredictionNet&, const PredictionNet&) = default;
};

struct Controller {
  ActionNet action;
  PredictionNet prediction;

  friend bool operator==(const Controller&, const Controller&) = default;
};

Controller decode(const Genome& genome);
Genome encode(const Controller& controller);

/// Per-robot recurrent state; a default-constructed state is the t = 0 state.
struct ControllerState {
  Action last_action = Action::Turn;
  std::array<double, kPredictionHidden> hidden{};
};

struct PredictionVector {
  std::array<double, kSensorCount> p{};

  friend bool operator==(const PredictionVector&, const PredictionVector&) = default;
};

/// Feedforward action choice. Updates state.last_action.
ActionCommand act(const ActionNet& net, const SensorReading& sensors, ControllerState& state);

/// Command for a given input pattern without touching any state.
/// pattern = sensor mask | (previous action bit << 12).
ActionCommand act_pattern(const ActionNet& net, std::uint32_t pattern) noexcept;

/// Recurrent prediction of the next step's sensors. Replaces state.hidden.
PredictionVector predict(const PredictionNet& net, const SensorReading& sensors, Action action,
                         ControllerState& state);

/// Pattern form of predict: pattern = sensor mask | (action bit << 12).
PredictionVector predict_pattern(const PredictionNet& net, std::uint32_t pattern,
                                 ControllerState& state) noexcept;

double sigmoid(double x) noexcept;

enum class Scenario { Emergent, Pairs, Clusters, Empty };

std::string_view to_string(Scenario scenario) noexcept;
/// Accepts emergent, pairs, clusters, empty. Throws ConfigError otherwise.
Scenario parse_scenario(std::string_view name);

/// Fixed prediction of a predefined scenario. Throws std::invalid_argument for Emergent.
PredictionVector scenario_prediction(Scenario scenario);

// Genome text file:
//   minsurprise-genome v1 <action_len> <prediction_len>
//   <weights...>   (17 significant digits, action weights first)
void write_genome(std::ostream& out, const Genome& genome);
Genome read_genome(std::istream& in);
void save_genome(const std::filesystem::path& path, const Genome& genome);
Genome load_genome(const std::filesystem::path& path);

}  // namespace minsurprise
