#include "minsurprise/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "minsurprise/snapshot.hpp"

namespace minsurprise {

namespace fs = std::filesystem;

std::vector<ExperimentRow> ratio_study_rows(Scenario scenario) {
  constexpr std::array<std::array<int, 3>, 7> lnb{{
      {16, 10, 32}, {16, 16, 32}, {16, 32, 32}, {20, 20, 50}, {20, 25, 50}, {20, 50, 50}, {20, 25, 75}}};
  std::vector<ExperimentRow> rows;
  for (const auto& [l, n, b] : lnb) {
    ExperimentRow row;
    row.sim.side_length = l;
    row.sim.swarm_size = n;
    row.sim.block_count = b;
    row.scenario = scenario;
    rows.push_back(row);
  }
  return rows;
}

EvolutionConfig ExperimentPlan::evolution_for(std::size_t row, std::size_t run) const {
  EvolutionConfig cfg = evolution;
  cfg.sim = rows.at(row).sim;
  cfg.scenario = rows.at(row).scenario;
  cfg.master_seed = master_seed;
  cfg.run_index = run_index(row, run);
  return cfg;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return {buf.data(), res.ptr};
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ConfigError("line " + std::to_string(line) + ": " + message);
}

const std::vector<std::string_view>& known_keys() {
  static const std::vector<std::string_view> keys{
      "grid", "robots", "blocks", "steps", "scenario", "population", "generations", "eval_runs",
      "mutation_rate", "elitism", "runs", "seed", "threads", "output", "frozen_seeds", "matrix"};
  return keys;
}

template <class T>
T parse_number(const Entry& e, std::string_view key) {
  T v{};
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) fail(e.line, "bad value '" + e.value + "' for " + std::string(key));
  return v;
}

bool parse_bool(const Entry& e, std::string_view key) {
  if (e.value == "1" || e.value == "true" || e.value == "yes") return true;
  if (e.value == "0" || e.value == "false" || e.value == "no") return false;
  fail(e.line, "bad boolean '" + e.value + "' for " + std::string(key));
}

}  // namespace

ExperimentPlan parse_config(std::string_view text) {
  std::map<std::string, Entry, std::less<>> entries;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) fail(line_no, "expected key=value, got '" + token + "'");
      std::string key = token.substr(0, eq);
      if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
        fail(line_no, "unknown key '" + key + "'");
      }
      if (entries.count(key)) fail(line_no, "duplicate key '" + key + "'");
      entries.emplace(std::move(key), Entry{token.substr(eq + 1), line_no});
    }
  }
  auto find = [&](std::string_view key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto integer = [&](std::string_view key, long long fallback, long long min) -> long long {
    const Entry* e = find(key);
    if (!e) return fallback;
    const auto v = parse_number<long long>(*e, key);
    if (v < min) fail(e->line, std::string(key) + " must be at least " + std::to_string(min));
    if (v > 1'000'000'000) fail(e->line, std::string(key) + " is out of range");
    return v;
  };

  ExperimentPlan plan;
  const Scenario scenario = [&] {
    const Entry* e = find("scenario");
    if (!e) return Scenario::Emergent;
    try {
      return parse_scenario(e->value);
    } catch (const ConfigError& err) {
      fail(e->line, err.what());
    }
  }();

  SimConfig sim;
  sim.steps = static_cast<int>(integer("steps", sim.steps, 1));
  std::string matrix = "single";
  if (const Entry* e = find("matrix")) {
    matrix = e->value;
    if (matrix != "single" && matrix != "ratio-study") {
      fail(e->line, "matrix must be 'single' or 'ratio-study', got '" + matrix + "'");
    }
    if (matrix == "ratio-study") {
      for (std::string_view key : {"grid", "robots", "blocks"}) {
        if (const Entry* conflict = find(key)) {
          fail(conflict->line, std::string(key) + " cannot be combined with matrix=ratio-study");
        }
      }
    }
  }
  if (matrix == "single") {
    sim.side_length = static_cast<int>(integer("grid", sim.side_length, 3));
    sim.swarm_size = static_cast<int>(integer("robots", sim.swarm_size, 1));
    sim.block_count = static_cast<int>(integer("blocks", sim.block_count, 0));
    plan.rows.push_back({sim, scenario});
  } else {
    plan.rows = ratio_study_rows(scenario);
    for (auto& row : plan.rows) row.sim.steps = sim.steps;
  }

  auto last_line = [&](std::initializer_list<std::string_view> keys) {
    std::size_t l = 0;
    for (auto k : keys)
      if (const Entry* e = find(k)) l = std::max(l, e->line);
    return l;
  };
  for (const auto& row : plan.rows) {
    const auto cells = static_cast<long long>(row.sim.side_length) * row.sim.side_length;
    if (static_cast<long long>(row.sim.swarm_size) + row.sim.block_count > cells) {
      fail(last_line({"grid", "robots", "blocks"}),
           "cannot place " + std::to_string(row.sim.swarm_size) + " robots and " +
               std::to_string(row.sim.block_count) + " blocks on " + std::to_string(cells) + " cells");
    }
    const auto needed = movement_window(row.sim.side_length);
    if (static_cast<std::size_t>(row.sim.steps) < needed) {
      fail(last_line({"steps", "grid", "matrix"}),
           "steps must be at least " + std::to_string(needed) + " for a " +
               std::to_string(row.sim.side_length) + " grid (movement window)");
    }
    if (row.scenario == Scenario::Emergent && row.sim.steps < 2) {
      fail(last_line({"steps"}), "emergent runs need at least 2 steps");
    }
  }

  EvolutionConfig& evo = plan.evolution;
  evo.population_size = static_cast<std::size_t>(integer("population", 50, 1));
  evo.generations = static_cast<std::size_t>(integer("generations", 100, 1));
  evo.eval_runs = static_cast<std::size_t>(integer("eval_runs", 10, 1));
  evo.elitism = static_cast<std::size_t>(integer("elitism", 1, 0));
  if (evo.elitism > evo.population_size) fail(last_line({"elitism", "population"}), "elitism exceeds population");
  if (const Entry* e = find("mutation_rate")) {
    evo.mutation_rate = parse_number<double>(*e, "mutation_rate");
    if (!(evo.mutation_rate >= 0.0 && evo.mutation_rate <= 1.0)) fail(e->line, "mutation_rate must be in [0, 1]");
  }
  evo.threads = static_cast<unsigned>(integer("threads", 0, 0));
  if (const Entry* e = find("frozen_seeds")) evo.frozen_seeds = parse_bool(*e, "frozen_seeds");
  evo.sim = plan.rows.front().sim;
  evo.scenario = scenario;

  plan.runs_per_row = static_cast<std::size_t>(integer("runs", 20, 1));
  if (const Entry* e = find("seed")) plan.master_seed = parse_number<std::uint64_t>(*e, "seed");
  evo.master_seed = plan.master_seed;
  if (const Entry* e = find("output")) {
    plan.output_dir = e->value;
  } else if (const char* env = std::getenv("MINSURPRISE_OUT"); env && *env) {
    plan.output_dir = env;
  } else {
    plan.output_dir = "minsurprise-out";
  }
  return plan;
}

ExperimentPlan load_config(const fs::path& path) { return parse_config(read_text_file(path)); }

std::string ExperimentPlan::to_config_text() const {
  if (rows.empty()) throw std::logic_error("plan has no rows");
  std::ostringstream out;
  const Scenario scenario = rows.front().scenario;
  if (rows.size() == 1) {
    const SimConfig& s = rows.front().sim;
    out << "grid=" << s.side_length << " robots=" << s.swarm_size << " blocks=" << s.block_count << '\n';
  } else {
    auto expected = ratio_study_rows(scenario);
    for (auto& r : expected) r.sim.steps = rows.front().sim.steps;
    if (expected != rows) throw std::logic_error("plan rows cannot be expressed as a config");
    out << "matrix=ratio-study\n";
  }
  out << "steps=" << rows.front().sim.steps << " scenario=" << to_string(scenario) << '\n';
  out << "population=" << evolution.population_size << " generations=" << evolution.generations
      << " eval_runs=" << evolution.eval_runs << " mutation_rate=" << format_double(evolution.mutation_rate)
      << " elitism=" << evolution.elitism << '\n';
  out << "runs=" << runs_per_row << " seed=" << master_seed
      << " frozen_seeds=" << (evolution.frozen_seeds ? 1 : 0) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) break;
    line.remove_prefix(pos + 1);
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto l : split(text, '\n'))
    if (!l.empty()) out.push_back(l);
  return out;
}

template <class T>
T field(std::string_view s, std::string_view what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad " + std::string(what) + " value '" + std::string(s) + "'");
  }
  return v;
}

StructureLabel parse_label(std::string_view s) {
  for (std::size_t i = 0; i < kStructureLabelCount; ++i) {
    const auto l = static_cast<StructureLabel>(i);
    if (s == to_string(l)) return l;
  }
  throw std::runtime_error("bad structure label '" + std::string(s) + "'");
}

}  // namespace

std::string fitness_history_header() { return "generation,best,median,mean"; }

std::string fitness_history_csv(const FitnessHistory& history) {
  std::string out = fitness_history_header() + "\n";
  for (const auto& row : history) {
    out += std::to_string(row.generation) + "," + format_double(row.best) + "," + format_double(row.median) +
           "," + format_double(row.mean) + "\n";
  }
  return out;
}

FitnessHistory parse_fitness_history(std::string_view csv) {
  const auto lines = lines_of(csv);
  if (lines.empty() || lines.front() != fitness_history_header()) {
    throw std::runtime_error("fitness history: missing header");
  }
  FitnessHistory history;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 4) throw std::runtime_error("fitness history: expected 4 columns");
    history.push_back({field<std::size_t>(f[0], "generation"), field<double>(f[1], "best"),
                       field<double>(f[2], "median"), field<double>(f[3], "mean")});
  }
  return history;
}

std::string posteval_header() {
  return "run_id,scenario,L,N,B,fitness,similarity,block_movement,robot_movement,"
         "lines_start,pairs_start,clusters_start,dispersed_start,other_start,"
         "lines_end,pairs_end,clusters_end,dispersed_end,other_end,scene_start,scene_end";
}

std::string posteval_line(const PostevalRecord& r) {
  std::string out = r.run_id + "," + std::string(to_string(r.scenario)) + "," + std::to_string(r.side) + "," +
                    std::to_string(r.swarm) + "," + std::to_string(r.blocks) + "," +
                    format_double(r.metrics.fitness) + "," + format_double(r.metrics.similarity);
  for (const auto* m : {&r.metrics.block_movement, &r.metrics.robot_movement}) {
    out += "," + format_double(m->total);
  }
  for (const auto* report : {&r.metrics.start, &r.metrics.end}) {
    for (auto c : report->counts) out += "," + std::to_string(c);
  }
  out += "," + std::string(to_string(r.metrics.start.scene)) + "," + std::string(to_string(r.metrics.end.scene));
  return out;
}

PostevalRecord parse_posteval_line(std::string_view line) {
  const auto f = split(line, ',');
  if (f.size() != 21) throw std::runtime_error("posteval: expected 21 columns, got " + std::to_string(f.size()));
  PostevalRecord r;
  r.run_id = std::string(f[0]);
  r.scenario = parse_scenario(f[1]);
  r.side = field<int>(f[2], "L");
  r.swarm = field<int>(f[3], "N");
  r.blocks = field<int>(f[4], "B");
  r.metrics.fitness = field<double>(f[5], "fitness");
  r.metrics.similarity = field<double>(f[6], "similarity");
  std::size_t col = 7;
  // Only the movement totals are part of the schema; x and y stay zero.
  for (auto* m : {&r.metrics.block_movement, &r.metrics.robot_movement}) m->total = field<double>(f[col++], "movement");
  for (auto* report : {&r.metrics.start, &r.metrics.end}) {
    for (auto& c : report->counts) c = field<std::size_t>(f[col++], "count");
  }
  r.metrics.start.scene = parse_label(f[col++]);
  r.metrics.end.scene = parse_label(f[col]);
  return r;
}

std::vector<PostevalRecord> parse_posteval_csv(std::string_view csv) {
  const auto lines = lines_of(csv);
  if (lines.empty() || lines.front() != posteval_header()) throw std::runtime_error("posteval: missing header");
  std::vector<PostevalRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) out.push_back(parse_posteval_line(lines[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string run_directory_name(std::size_t row, std::size_t run) {
  return "row" + std::to_string(row) + "_run" + std::to_string(run);
}

// ---------------------------------------------------------------------------
// Batch runner

namespace {

struct RunRecord {
  std::size_t row = 0;
  PostevalRecord posteval;
  double final_best = 0.0;
};

std::string seed_record(const ExperimentPlan& plan, std::size_t row, std::size_t run) {
  ExperimentPlan single = plan;
  single.rows = {plan.rows.at(row)};
  std::ostringstream out;
  out << "# seed record for " << run_directory_name(row, run) << '\n'
      << "# master_seed=" << plan.master_seed << " run_index=" << ExperimentPlan::run_index(row, run)
      << " posteval_seed=" << posteval_seed(plan.master_seed, ExperimentPlan::run_index(row, run)) << '\n'
      << single.to_config_text();
  return out.str();
}

RunRecord execute_run(const ExperimentPlan& plan, std::size_t row, std::size_t run, std::ostream& log) {
  const fs::path dir = plan.output_dir / run_directory_name(row, run);
  const fs::path posteval_path = dir / "posteval.csv";
  const fs::path history_path = dir / "fitness_history.csv";
  const fs::path genome_path = dir / "best.genome";

  if (fs::exists(posteval_path) && fs::exists(history_path) && fs::exists(genome_path)) {
    const auto records = parse_posteval_csv(read_text_file(posteval_path));
    const auto history = parse_fitness_history(read_text_file(history_path));
    if (records.size() == 1 && !history.empty()) {
      log << run_directory_name(row, run) << ": complete, reusing\n";
      return {row, records.front(), history.back().best};
    }
  }

  fs::create_directories(dir);
  const EvolutionConfig cfg = plan.evolution_for(row, run);
  write_text_file(dir / "seeds.txt", seed_record(plan, row, run));
  const EvolutionResult evo = evolve(cfg, [&](const GenerationStats& g) {
    if ((g.generation + 1) % 10 == 0 || g.generation + 1 == cfg.generations) {
      log << run_directory_name(row, run) << ": generation " << g.generation << " best "
          << format_double(g.best) << '\n';
    }
  });
  write_text_file(history_path, fitness_history_csv(evo.history));

  std::string start_snapshot;
  std::string end_snapshot;
  const int steps = cfg.sim.steps;
  const MetricsRow metrics =
      post_evaluate(evo.best.genome, cfg.sim, cfg.scenario, posteval_seed(plan.master_seed, cfg.run_index),
                    [&](int t, const World& w) {
                      if (t == 0) start_snapshot = render(w);
                      if (t == steps) end_snapshot = render(w);
                    });
  write_text_file(dir / "start.snapshot", start_snapshot);
  write_text_file(dir / "end.snapshot", end_snapshot);

  PostevalRecord record{run_directory_name(row, run), cfg.scenario, cfg.sim.side_length, cfg.sim.swarm_size,
                        cfg.sim.block_count, metrics};
  {
    std::ostringstream genome_text;
    write_genome(genome_text, evo.best.genome);
    write_text_file(genome_path, genome_text.str());
  }
  // Written last: its presence marks the run complete.
  write_text_file(posteval_path, posteval_header() + "\n" + posteval_line(record) + "\n");
  return {row, record, evo.history.back().best};
}

std::string summary_csv(const ExperimentPlan& plan, const std::vector<RunRecord>& runs) {
  std::string out =
      "robots,blocks,ratio,grid,scenario,runs,median_fitness,altered_runs,mean_similarity,median_similarity,"
      "mean_block_movement,median_block_movement,mean_robot_movement,median_robot_movement,"
      "lines_start,pairs_start,clusters_start,dispersed_start,lines_end,pairs_end,clusters_end,dispersed_end\n";
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto median = [](const std::vector<double>& v) { return v.empty() ? std::nan("") : median_of(v); };
  for (std::size_t r = 0; r < plan.rows.size(); ++r) {
    std::vector<const RunRecord*> mine;
    for (const auto& rec : runs)
      if (rec.row == r) mine.push_back(&rec);
    if (mine.empty()) continue;
    const SimConfig& sim = plan.rows[r].sim;
    std::vector<double> best, sim_v, block_v, robot_v;
    std::array<std::size_t, kStructureLabelCount> scene_start{}, scene_end{};
    for (const auto* rec : mine) {
      best.push_back(rec->final_best);
      const MetricsRow& m = rec->posteval.metrics;
      ++scene_start[static_cast<std::size_t>(m.start.scene)];
      ++scene_end[static_cast<std::size_t>(m.end.scene)];
      if (m.similarity < 1.0) {
        sim_v.push_back(m.similarity);
        block_v.push_back(m.block_movement.total);
        robot_v.push_back(m.robot_movement.total);
      }
    }
    const int g = std::gcd(sim.swarm_size, sim.block_count);
    const std::string ratio = g ? std::to_string(sim.swarm_size / g) + ":" + std::to_string(sim.block_count / g)
                                : std::to_string(sim.swarm_size) + ":0";
    out += std::to_string(sim.swarm_size) + "," + std::to_string(sim.block_count) + "," + ratio + "," +
           std::to_string(sim.side_length) + "x" + std::to_string(sim.side_length) + "," +
           std::string(to_string(plan.rows[r].scenario)) + "," + std::to_string(mine.size()) + "," +
           format_double(median_of(best)) + "," + std::to_string(sim_v.size()) + "," + format_double(mean(sim_v)) +
           "," + format_double(median(sim_v)) + "," + format_double(mean(block_v)) + "," +
           format_double(median(block_v)) + "," + format_double(mean(robot_v)) + "," +
           format_double(median(robot_v));
    const double n = static_cast<double>(mine.size());
    for (const auto* scenes : {&scene_start, &scene_end}) {
      for (auto label : {StructureLabel::Line, StructureLabel::Pair, StructureLabel::Cluster,
                         StructureLabel::Dispersed}) {
        out += "," + format_double(100.0 * static_cast<double>((*scenes)[static_cast<std::size_t>(label)]) / n);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace

int run_experiment(const ExperimentPlan& plan, std::ostream& log) {
  if (plan.rows.empty()) throw ConfigError("experiment plan has no rows");
  fs::create_directories(plan.output_dir);
  write_text_file(plan.output_dir / "plan.cfg", plan.to_config_text());

  int status = 0;
  std::vector<RunRecord> runs;
  for (std::size_t row = 0; row < plan.rows.size(); ++row) {
    for (std::size_t run = 0; run < plan.runs_per_row; ++run) {
      try {
        runs.push_back(execute_run(plan, row, run, log));
      } catch (const std::exception& e) {
        log << run_directory_name(row, run) << ": failed: " << e.what() << '\n';
        status = 1;
      }
    }
  }

  std::string posteval = posteval_header() + "\n";
  for (const auto& r : runs) posteval += posteval_line(r.posteval) + "\n";
  write_text_file(plan.output_dir / "posteval.csv", posteval);
  write_text_file(plan.output_dir / "summary.csv", summary_csv(plan, runs));
  return status;
}

MetricsRow replay(const Genome& genome, const SimConfig& config, Scenario scenario, std::uint64_t seed,
                  int every, std::ostream& out) {
  if (every < 1) throw ConfigError("replay: --every must be at least 1");
  return post_evaluate(genome, config, scenario, seed, [&](int t, const World& w) {
    if (t % every == 0 || t == config.steps) out << "# step " << t << '\n' << render(w);
  });
}

}  // namespace minsurprise
