#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "minsurprise/evolution.hpp"
#include "minsurprise/experiment.hpp"
#include "minsurprise/metrics.hpp"
#include "minsurprise/simulation.hpp"
#include "minsurprise/snapshot.hpp"

namespace py = pybind11;
using namespace minsurprise;

namespace {

std::pair<int, int> as_pair(Cell c) { return {c.x, c.y}; }

std::vector<Cell> as_cells(const std::vector<std::pair<int, int>>& xs) {
  std::vector<Cell> out;
  out.reserve(xs.size());
  for (auto [x, y] : xs) out.push_back({x, y});
  return out;
}

py::dict movement_dict(const Movement& m) {
  py::dict d;
  d["x"] = m.x;
  d["y"] = m.y;
  d["total"] = m.total;
  return d;
}

py::dict report_dict(const StructureReport& r) {
  py::dict d;
  for (std::size_t i = 0; i < kStructureLabelCount; ++i) {
    d[py::str(std::string(to_string(static_cast<StructureLabel>(i))))] = r.counts[i];
  }
  d["scene"] = std::string(to_string(r.scene));
  return d;
}

py::dict metrics_dict(const MetricsRow& m) {
  py::dict d;
  d["fitness"] = m.fitness;
  d["similarity"] = m.similarity;
  d["block_movement"] = movement_dict(m.block_movement);
  d["robot_movement"] = movement_dict(m.robot_movement);
  d["start"] = report_dict(m.start);
  d["end"] = report_dict(m.end);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grid-world swarm simulator evolved under a prediction-error fitness";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<MalformedGenome>(m, "MalformedGenome", PyExc_ValueError);
  py::register_exception<SnapshotError>(m, "SnapshotError", PyExc_ValueError);

  py::enum_<Scenario>(m, "Scenario")
      .value("Emergent", Scenario::Emergent)
      .value("Pairs", Scenario::Pairs)
      .value("Clusters", Scenario::Clusters)
      .value("Empty", Scenario::Empty);
  m.def("parse_scenario", &parse_scenario);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def(py::init([](int side, int robots, int blocks, int steps) {
             SimConfig c;
             c.side_length = side;
             c.swarm_size = robots;
             c.block_count = blocks;
             c.steps = steps;
             return c;
           }),
           py::arg("side_length") = 16, py::arg("swarm_size") = 10, py::arg("block_count") = 32,
           py::arg("steps") = 1000)
      .def_readwrite("side_length", &SimConfig::side_length)
      .def_readwrite("swarm_size", &SimConfig::swarm_size)
      .def_readwrite("block_count", &SimConfig::block_count)
      .def_readwrite("steps", &SimConfig::steps)
      .def("validate", &SimConfig::validate)
      .def("__repr__", [](const SimConfig& c) {
        return "SimConfig(L=" + std::to_string(c.side_length) + ", N=" + std::to_string(c.swarm_size) +
               ", B=" + std::to_string(c.block_count) + ", T=" + std::to_string(c.steps) + ")";
      });

  py::class_<World>(m, "World")
      .def_property_readonly("side", &World::side)
      .def_property_readonly("robots",
                             [](const World& w) {
                               std::vector<std::tuple<int, int, char>> out;
                               for (const auto& r : w.robots()) out.emplace_back(r.cell.x, r.cell.y, heading_letter(r.heading));
                               return out;
                             })
      .def_property_readonly("blocks",
                             [](const World& w) {
                               std::vector<std::pair<int, int>> out;
                               for (const Cell& b : w.blocks()) out.push_back(as_pair(b));
                               return out;
                             })
      .def("sense", [](const World& w, std::size_t id) {
        if (id >= w.robots().size()) throw py::index_error("robot id out of range");
        const auto s = sense(w, id);
        return std::vector<int>(s.s.begin(), s.s.end());
      })
      .def("consistent", &World::consistent)
      .def("render", [](const World& w) { return render(w); })
      .def("__eq__", [](const World& a, const World& b) { return a == b; });

  m.def("random_world", [](const SimConfig& c, std::uint64_t seed) {
    Rng rng(seed);
    return random_world(c, rng);
  }, py::arg("config"), py::arg("seed"));
  m.def("parse_snapshot", [](const std::string& s) { return parse_snapshot(s); });
  m.def("render", [](const World& w) { return render(w); });

  py::class_<Genome>(m, "Genome")
      .def(py::init<>())
      .def_static("zeros", &Genome::zeros)
      .def_static("random", [](std::uint64_t seed) {
        Rng rng(seed);
        return random_genome(rng);
      })
      .def_readwrite("action_weights", &Genome::action_weights)
      .def_readwrite("prediction_weights", &Genome::prediction_weights)
      .def("validate", &Genome::validate)
      .def("mutate", [](const Genome& g, double rate, std::uint64_t seed) {
        Rng rng(seed);
        return mutate(g, rate, rng);
      })
      .def("to_text", [](const Genome& g) {
        std::ostringstream out;
        write_genome(out, g);
        return out.str();
      })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream in(text);
        return read_genome(in);
      })
      .def("__eq__", [](const Genome& a, const Genome& b) { return a == b; });
  m.def("load_genome", &load_genome);
  m.def("save_genome", &save_genome);

  m.def("mix64", [](const std::vector<std::uint64_t>& words) { return mix64(std::span<const std::uint64_t>(words)); });

  m.def("simulate_fitness", [](const Genome& g, const SimConfig& c, Scenario s, std::uint64_t seed) {
    const Controller controller = decode(g);
    py::gil_scoped_release release;
    return simulate_fitness(controller, c, s, seed);
  }, py::arg("genome"), py::arg("config"), py::arg("scenario"), py::arg("seed"));

  m.def("post_evaluate", [](const Genome& g, const SimConfig& c, Scenario s, std::uint64_t seed) {
    MetricsRow row;
    {
      py::gil_scoped_release release;
      row = post_evaluate(g, c, s, seed);
    }
    return metrics_dict(row);
  }, py::arg("genome"), py::arg("config"), py::arg("scenario"), py::arg("seed"));

  m.def("replay", [](const Genome& g, const SimConfig& c, Scenario s, std::uint64_t seed, int every) {
    std::ostringstream out;
    const MetricsRow row = replay(g, c, s, seed, every, out);
    return py::make_tuple(out.str(), metrics_dict(row));
  }, py::arg("genome"), py::arg("config"), py::arg("scenario"), py::arg("seed"), py::arg("every"));

  m.def("score_run", &score_run, py::arg("abs_error_sum"), py::arg("swarm"), py::arg("sensors"),
        py::arg("comparisons"));
  m.def("similarity", [](const std::vector<std::pair<int, int>>& a, const std::vector<std::pair<int, int>>& b) {
    return similarity(as_cells(a), as_cells(b), a.size());
  });
  m.def("movement", [](const std::vector<std::vector<std::pair<int, int>>>& window, std::size_t tau, int side) {
    PositionWindow w;
    for (const auto& state : window) w.push_back(as_cells(state));
    const std::size_t count = w.empty() ? 0 : w.front().size();
    return movement_dict(movement(w, count, tau, side));
  }, py::arg("window"), py::arg("tau"), py::arg("side"));
  m.def("classify_blocks", [](const std::vector<std::pair<int, int>>& blocks, int side) {
    std::vector<std::string> out;
    for (auto l : classify_blocks(as_cells(blocks), side)) out.emplace_back(to_string(l));
    return out;
  });
  m.def("structure_report", [](const std::vector<std::pair<int, int>>& blocks, int side) {
    return report_dict(structure_report(as_cells(blocks), side));
  });

  py::class_<EvolutionConfig>(m, "EvolutionConfig")
      .def(py::init<>())
      .def_readwrite("population_size", &EvolutionConfig::population_size)
      .def_readwrite("generations", &EvolutionConfig::generations)
      .def_readwrite("eval_runs", &EvolutionConfig::eval_runs)
      .def_readwrite("mutation_rate", &EvolutionConfig::mutation_rate)
      .def_readwrite("elitism", &EvolutionConfig::elitism)
      .def_readwrite("sim", &EvolutionConfig::sim)
      .def_readwrite("scenario", &EvolutionConfig::scenario)
      .def_readwrite("master_seed", &EvolutionConfig::master_seed)
      .def_readwrite("run_index", &EvolutionConfig::run_index)
      .def_readwrite("frozen_seeds", &EvolutionConfig::frozen_seeds)
      .def_readwrite("threads", &EvolutionConfig::threads);

  m.def("evaluate", [](const Genome& g, const EvolutionConfig& c, const std::vector<std::uint64_t>& seeds) {
    EvaluatedGenome e;
    {
      py::gil_scoped_release release;
      e = evaluate(g, c, seeds);
    }
    return py::make_tuple(e.fitness, e.per_evaluation);
  });

  m.def("evolve", [](const EvolutionConfig& c, const std::function<void(std::size_t, double, double, double)>& progress) {
    EvolutionResult r;
    {
      py::gil_scoped_release release;
      ProgressSink sink;
      if (progress) {
        sink = [&](const GenerationStats& g) {
          py::gil_scoped_acquire acquire;
          progress(g.generation, g.best, g.median, g.mean);
        };
      }
      r = evolve(c, sink);
    }
    py::list history;
    for (const auto& g : r.history) history.append(py::make_tuple(g.generation, g.best, g.median, g.mean));
    py::dict d;
    d["best"] = r.best.genome;
    d["best_fitness"] = r.best.fitness;
    d["final_best"] = r.final_best.genome;
    d["final_best_fitness"] = r.final_best.fitness;
    d["history"] = history;
    return d;
  }, py::arg("config"), py::arg("progress") = nullptr);

  m.def("run_experiment", [](const std::string& config_text, const std::filesystem::path& output) {
    ExperimentPlan plan = parse_config(config_text);
    plan.output_dir = output;
    std::ostringstream log;
    int status = 0;
    {
      py::gil_scoped_release release;
      status = run_experiment(plan, log);
    }
    return py::make_tuple(status, log.str());
  }, py::arg("config_text"), py::arg("output"));

  m.def("parse_config", [](const std::string& text) {
    const ExperimentPlan plan = parse_config(text);
    py::dict d;
    py::list rows;
    for (const auto& r : plan.rows) rows.append(py::make_tuple(r.sim, r.scenario));
    d["rows"] = rows;
    d["evolution"] = plan.evolution;
    d["runs_per_row"] = plan.runs_per_row;
    d["master_seed"] = plan.master_seed;
    d["output_dir"] = plan.output_dir;
    return d;
  });
}
