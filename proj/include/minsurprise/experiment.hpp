#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "minsurprise/controllers.hpp"
#include "minsurprise/evolution.hpp"
#include "minsurprise/metrics.hpp"
#include "minsurprise/world.hpp"

namespace minsurprise {

struct ExperimentRow {
  SimConfig sim;
  Scenario scenario = Scenario::Emergent;

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

/// The seven (L, N, B) rows of the robot-to-block ratio study.
std::vector<ExperimentRow> ratio_study_rows(Scenario scenario);

struct ExperimentPlan {
  std::vector<ExperimentRow> rows;
  /// GA parameters shared by all rows; sim and scenario come from the row.
  EvolutionConfig evolution;
  std::size_t runs_per_row = 20;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir;

  /// Run index used for seed derivation of (row, run); independent of runs_per_row.
  static std::uint64_t run_index(std::size_t row, std::size_t run) noexcept {
    return (static_cast<std::uint64_t>(row) << 32) | static_cast<std::uint64_t>(run);
  }
  EvolutionConfig evolution_for(std::size_t row, std::size_t run) const;

  /// Canonical key=value form, accepted by parse_config.
  std::string to_config_text() const;
};

/// Whitespace-separated key=value tokens, '#' comments. Missing keys take the
/// defaults; the output directory defaults to $MINSURPRISE_OUT, then
/// "minsurprise-out". Throws ConfigError with a line number.
///
/// Keys: grid robots blocks steps scenario population generations eval_runs
/// mutation_rate elitism runs seed threads output frozen_seeds
/// matrix (single | ratio-study).
ExperimentPlan parse_config(std::string_view text);
ExperimentPlan load_config(const std::filesystem::path& path);

// CSV schemas.
std::string fitness_history_header();
std::string fitness_history_csv(const FitnessHistory& history);
FitnessHistory parse_fitness_history(std::string_view csv);

struct PostevalRecord {
  std::string run_id;
  Scenario scenario = Scenario::Emergent;
  int side = 0;
  int swarm = 0;
  int blocks = 0;
  MetricsRow metrics;

  friend bool operator==(const PostevalRecord&, const PostevalRecord&) = default;
};

std::string posteval_header();
std::string posteval_line(const PostevalRecord& record);
PostevalRecord parse_posteval_line(std::string_view line);
std::vector<PostevalRecord> parse_posteval_csv(std::string_view csv);

std::string format_double(double v);

/// Evolves, post-evaluates and records every (row, run) of the plan. Runs whose
/// directory already holds a complete record are read back instead of
/// recomputed. Returns 0 when every run succeeded.
int run_experiment(const ExperimentPlan& plan, std::ostream& log);

std::string run_directory_name(std::size_t row, std::size_t run);

/// Re-simulates a genome, writing "# step t" followed by the snapshot for
/// t = 0, k, 2k, ... and the final step T.
MetricsRow replay(const Genome& genome, const SimConfig& config, Scenario scenario, std::uint64_t seed,
                  int every, std::ostream& out);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace minsurprise
