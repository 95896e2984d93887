#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "minsurprise/controllers.hpp"
#include "minsurprise/experiment.hpp"
#include "minsurprise/metrics.hpp"
#include "minsurprise/snapshot.hpp"

using namespace minsurprise;

namespace {

struct RunSelector {
  std::size_t row = 0;
  std::size_t run = 0;
  std::optional<std::uint64_t> seed;
};

void add_selector(CLI::App* cmd, RunSelector& sel) {
  cmd->add_option("--seed", sel.seed, "Simulation seed (default: the posteval seed of --row/--run)");
  cmd->add_option("--row", sel.row, "Plan row whose grid is simulated")->capture_default_str();
  cmd->add_option("--run", sel.run, "Run number used to derive the default seed")->capture_default_str();
}

std::uint64_t simulation_seed(const ExperimentPlan& plan, const RunSelector& sel) {
  if (sel.seed) return *sel.seed;
  return posteval_seed(plan.master_seed, ExperimentPlan::run_index(sel.row, sel.run));
}

const ExperimentRow& selected_row(const ExperimentPlan& plan, const RunSelector& sel) {
  if (sel.row >= plan.rows.size()) {
    throw ConfigError("--row " + std::to_string(sel.row) + " out of range; the plan has " +
                      std::to_string(plan.rows.size()) + " rows");
  }
  return plan.rows[sel.row];
}

PostevalRecord record_for(const ExperimentRow& row, const MetricsRow& metrics) {
  return {"posteval", row.scenario, row.sim.side_length, row.sim.swarm_size, row.sim.block_count, metrics};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-surprise swarm evolution: grid simulator, evolution and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string genome_path;
  std::string snapshot_path;

  std::optional<std::uint64_t> evolve_seed;
  std::optional<std::size_t> evolve_runs;
  std::optional<std::string> evolve_out;
  std::optional<unsigned> evolve_threads;
  auto* evolve_cmd = app.add_subcommand("evolve", "Run every row x run of a config and write all artifacts");
  evolve_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  evolve_cmd->add_option("--seed", evolve_seed, "Master seed, overrides the config");
  evolve_cmd->add_option("--runs", evolve_runs, "Runs per row, overrides the config");
  evolve_cmd->add_option("--out", evolve_out, "Output directory, overrides the config and MINSURPRISE_OUT");
  evolve_cmd->add_option("--threads", evolve_threads, "Worker threads (0 = hardware concurrency)");

  RunSelector posteval_sel;
  auto* posteval_cmd = app.add_subcommand("posteval", "Post-evaluate a genome and print its posteval.csv row");
  posteval_cmd->add_option("genome", genome_path, "Genome file")->required()->check(CLI::ExistingFile);
  posteval_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_selector(posteval_cmd, posteval_sel);

  bool per_block = false;
  auto* classify_cmd = app.add_subcommand("classify", "Label the blocks of a snapshot");
  classify_cmd->add_option("snapshot", snapshot_path, "Snapshot file")->required()->check(CLI::ExistingFile);
  classify_cmd->add_flag("--blocks", per_block, "Also print one x,y,label line per block");

  auto* render_cmd = app.add_subcommand("render", "Parse a snapshot and print it in canonical form");
  render_cmd->add_option("snapshot", snapshot_path, "Snapshot file")->required()->check(CLI::ExistingFile);

  RunSelector replay_sel;
  int every = 0;
  auto* replay_cmd = app.add_subcommand("replay", "Re-simulate a genome, streaming snapshots");
  replay_cmd->add_option("genome", genome_path, "Genome file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--every", every, "Emit a snapshot every K steps (default: only start and end)");
  add_selector(replay_cmd, replay_sel);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evolve_cmd) {
      ExperimentPlan plan = load_config(config_path);
      if (evolve_seed) {
        plan.master_seed = *evolve_seed;
        plan.evolution.master_seed = *evolve_seed;
      }
      if (evolve_runs) plan.runs_per_row = *evolve_runs;
      if (evolve_out) plan.output_dir = *evolve_out;
      if (evolve_threads) plan.evolution.threads = *evolve_threads;
      std::cerr << "writing to " << plan.output_dir.string() << '\n';
      return run_experiment(plan, std::cerr);
    }
    if (*posteval_cmd) {
      const ExperimentPlan plan = load_config(config_path);
      const ExperimentRow& row = selected_row(plan, posteval_sel);
      const MetricsRow m =
          post_evaluate(load_genome(genome_path), row.sim, row.scenario, simulation_seed(plan, posteval_sel));
      std::cout << posteval_header() << '\n' << posteval_line(record_for(row, m)) << '\n';
      return 0;
    }
    if (*classify_cmd) {
      const World world = parse_snapshot(read_text_file(snapshot_path));
      const auto labels = classify_blocks(world.blocks(), world.side());
      if (per_block) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
          std::cout << world.blocks()[i].x << ',' << world.blocks()[i].y << ',' << to_string(labels[i]) << '\n';
        }
      }
      const StructureReport report = summarize(labels);
      for (std::size_t i = 0; i < kStructureLabelCount; ++i) {
        std::cout << to_string(static_cast<StructureLabel>(i)) << ' ' << report.counts[i] << '\n';
      }
      std::cout << "scene " << to_string(report.scene) << '\n';
      return 0;
    }
    if (*render_cmd) {
      std::cout << render(parse_snapshot(read_text_file(snapshot_path)));
      return 0;
    }
    if (*replay_cmd) {
      const ExperimentPlan plan = load_config(config_path);
      const ExperimentRow& row = selected_row(plan, replay_sel);
      const int k = every > 0 ? every : row.sim.steps;
      const MetricsRow m = replay(load_genome(genome_path), row.sim, row.scenario,
                                  simulation_seed(plan, replay_sel), k, std::cout);
      std::cout << "# metrics\n" << posteval_header() << '\n' << posteval_line(record_for(row, m)) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
