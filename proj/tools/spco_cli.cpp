#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spco/core/error.hpp"
#include "spco/core/record_io.hpp"
#include "spco/engine/config.hpp"
#include "spco/engine/run.hpp"
#include "spco/eval/report.hpp"
#include "spco/eval/scalability.hpp"
#include "spco/sim/spec_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spco;

namespace {

struct Overrides {
  std::string config;
  std::string variant;
  std::optional<int> particles;
  std::optional<int> lag;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

// A cell failure carries the cell name to the exit-code handler.
struct CellFailure : Error {
  using Error::Error;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError("config " + path + ": " + e.what());
  }
}

fs::path resolve(const std::string& config_path, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || config_path.empty() || fs::exists(path)) return path;
  return fs::path(config_path).parent_path() / path;
}

struct Dataset {
  std::vector<StepRecord> records;
  std::vector<eval::PlaceQuery> places;
};

Dataset load_dataset(const json& spec, const Overrides& o) {
  const PhonemeAlphabet& alphabet = PhonemeAlphabet::syllables();
  Dataset d;
  if (spec.contains("dataset")) {
    const fs::path path = resolve(o.config, spec["dataset"].get<std::string>());
    d.records = read_records(path.string(), alphabet);
    const fs::path env = spec.contains("env") ? resolve(o.config, spec["env"].get<std::string>())
                                              : path.parent_path() / "env.json";
    if (fs::exists(env)) d.places = eval::places_from_env_json(engine::read_json(env), alphabet);
    return d;
  }
  if (!spec.contains("generator")) throw SpecError("experiment needs 'dataset' or 'generator'");
  const json& g = spec["generator"];
  const sim::Dataset ds = sim::simulate(sim::dataset_spec_from_json(g), g.value("seed", std::uint64_t{1}));
  d.records = ds.records;
  d.places = eval::truth_from_records(ds.records, &ds.env).places;
  return d;
}

int cmd_gen(const Overrides& o) {
  const json cfg = load_config(o.config);
  const json& g = cfg.contains("generator") ? cfg["generator"] : cfg;
  const sim::DatasetSpec spec = sim::dataset_spec_from_json(g);
  const std::uint64_t seed = o.seed.value_or(g.value("seed", std::uint64_t{1}));
  const fs::path out = o.out.empty() ? fs::path("data") : fs::path(o.out);
  const sim::Dataset ds = sim::simulate(spec, seed);
  fs::create_directories(out);
  const PhonemeAlphabet& alphabet = PhonemeAlphabet::syllables();
  write_records((out / "dataset.jsonl").string(), ds.records, alphabet);
  json env = sim::environment_to_json(ds.env, alphabet);
  env["seed"] = seed;
  env["spec"] = sim::dataset_spec_to_json(spec);
  engine::write_json(out / "env.json", env);
  std::size_t teaching = 0;
  for (const auto& r : ds.records) teaching += r.is_teaching();
  std::cout << "wrote " << ds.records.size() << " records (" << teaching << " teaching) to " << out.string() << '\n';
  return 0;
}

struct Cell {
  engine::AlgorithmConfig cfg;
  std::string name;
};

std::vector<Cell> plan_cells(const json& spec, const Overrides& o) {
  engine::AlgorithmConfig base = engine::config_from_json(spec.value("algorithm", json::object()));
  if (o.particles) base.particles = *o.particles;
  if (o.lag) base.lag = *o.lag;
  std::vector<engine::Variant> variants;
  if (!o.variant.empty())
    variants.push_back(engine::parse_variant(o.variant));
  else if (spec.contains("variants"))
    for (const auto& v : spec["variants"]) variants.push_back(engine::parse_variant(v.get<std::string>()));
  else
    variants.push_back(base.variant);
  std::vector<std::uint64_t> seeds;
  if (o.seed)
    seeds.push_back(*o.seed);
  else if (spec.contains("seeds"))
    seeds = spec["seeds"].get<std::vector<std::uint64_t>>();
  else
    seeds.push_back(base.seed);
  if (variants.empty() || seeds.empty()) throw SpecError("experiment needs at least one variant and one seed");
  std::vector<Cell> cells;
  for (auto v : variants)
    for (auto s : seeds) {
      Cell c{base, engine::cell_name(v, s)};
      c.cfg.variant = v;
      c.cfg.seed = s;
      c.cfg.validate();
      cells.push_back(c);
    }
  return cells;
}

fs::path output_root(const json& spec, const Overrides& o) {
  if (!o.out.empty()) return o.out;
  return spec.value("out", std::string("runs"));
}

// Runs every cell, `jobs` at a time; the first failure is rethrown with its cell name.
template <typename F>
void for_each_cell(const std::vector<Cell>& cells, int jobs, F&& body) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<std::string> failure;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= cells.size()) return;
      try {
        body(cells[i]);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (!failure) failure = "cell " + cells[i].name + ": " + e.what();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) throw CellFailure(*failure);
}

int cmd_run(const Overrides& o, bool bench) {
  const json spec = load_config(o.config);
  const std::vector<Cell> cells = plan_cells(spec, o);
  const Dataset data = load_dataset(spec, o);
  eval::CellTruth truth;
  if (!bench) {
    truth = eval::truth_from_records(data.records, nullptr);
    truth.places = data.places;
  }
  const fs::path root = output_root(spec, o);
  std::mutex mu;
  std::vector<std::pair<std::string, eval::SlopeFit>> fits;
  for_each_cell(cells, o.jobs, [&](const Cell& c) {
    const auto result =
        engine::run_records(data.records, c.cfg, root / c.name, bench ? nullptr : &truth, !bench);
    if (!bench) {
      std::lock_guard lock(mu);
      std::cout << "finished " << c.name << '\n';
      return;
    }
    eval::TimingSeries s;
    s.label = c.name;
    for (const auto& out : result.outputs)
      if (out.teaching) {
        s.step.push_back(static_cast<double>(out.teach_index));
        s.ms.push_back(out.phase_ms("total"));
      }
    std::lock_guard lock(mu);
    if (s.step.size() >= 3) fits.emplace_back(c.name, eval::fit_slope(s.step, s.ms));
  });
  if (bench) {
    std::sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ofstream csv(root / "bench.csv");
    csv << "cell,n,slope_ms_per_step,ci_low,ci_high,intercept_ms\n";
    for (const auto& [name, f] : fits) {
      csv << name << ',' << f.n << ',' << f.slope << ',' << f.ci_low << ',' << f.ci_high << ',' << f.intercept << '\n';
      std::cout << name << ": slope " << f.slope << " ms/step, 95% CI [" << f.ci_low << ", " << f.ci_high << "]\n";
    }
    if (!csv) throw IoError("cannot write " + (root / "bench.csv").string());
  }
  return 0;
}

std::map<std::size_t, double> step_wall_times(const fs::path& timing_csv) {
  std::map<std::size_t, double> out;
  std::ifstream in(timing_csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b) continue;
    if (line.substr(a + 1, b - a - 1) == "total") out[std::stoul(line.substr(0, a))] = std::stod(line.substr(b + 1));
  }
  return out;
}

eval::Metrics evaluate_dir(const fs::path& dir) {
  const PhonemeAlphabet& alphabet = PhonemeAlphabet::syllables();
  const engine::CellArtifacts c = engine::load_cell(dir);
  const auto wall = step_wall_times(dir / "timing.csv");
  std::ofstream csv(dir / "metrics.csv");
  csv << "step,t,metric,value\n";
  for (const auto& s : c.steps) {
    const std::size_t t = s.at("t").get<std::size_t>();
    const std::string step = std::to_string(s.at("step").get<std::size_t>());
    if (auto it = wall.find(t); it != wall.end()) csv << step << ',' << t << ",wall_ms," << it->second << '\n';
    if (!s.at("teaching").get<bool>()) continue;
    std::vector<Assignment> labels;
    for (const auto& a : s.at("labels")) labels.push_back(engine::assignment_from_json(a));
    eval::Metrics m;
    eval::clustering_metrics(c.truth, labels, s.at("concepts").get<int>(), s.at("positions").get<int>(), m);
    const std::size_t k = s.at("teach_index").get<std::size_t>();
    m.par_sentence = eval::sentence_par(c.truth.teaching.at(k).words, words_from_json(s.at("s_star"), alphabet));
    const auto values = eval::metric_values(m);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!std::isnan(values[i])) csv << step << ',' << t << ',' << eval::metric_names()[i] << ',' << values[i] << '\n';
  }
  const eval::Metrics final_m = eval::evaluate_cell(c.truth, c.estimate);
  const auto values = eval::metric_values(final_m);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isnan(values[i])) csv << "final,," << eval::metric_names()[i] << ',' << values[i] << '\n';
  if (!csv) throw IoError("cannot write " + (dir / "metrics.csv").string());
  json summary = eval::metrics_to_json(final_m);
  summary["variant"] = c.variant;
  summary["seed"] = c.seed;
  engine::write_json(dir / "summary.json", summary);
  return final_m;
}

int cmd_eval(const Overrides& o, const std::vector<std::string>& dirs_in) {
  std::vector<fs::path> dirs(dirs_in.begin(), dirs_in.end());
  const fs::path root = o.out.empty() ? fs::path("runs") : fs::path(o.out);
  if (dirs.empty()) {
    if (!fs::is_directory(root)) throw SpecError("no artifact directories given and " + root.string() + " is missing");
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory() && fs::exists(e.path() / "config.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) throw SpecError("no artifact directories found");
  std::map<std::string, std::vector<eval::Metrics>> by_variant;
  std::vector<std::string> order;
  std::vector<std::string> problems;
  for (const auto& d : dirs) {
    try {
      const json cfg = engine::read_json(d / "config.json");
      const std::string v = cfg.at("variant").get<std::string>();
      const eval::Metrics m = evaluate_dir(d);
      if (!by_variant.count(v)) order.push_back(v);
      by_variant[v].push_back(m);
    } catch (const std::exception& e) {
      problems.push_back("cell " + d.filename().string() + ": " + e.what());
    }
  }
  std::vector<std::pair<std::string, eval::Metrics>> rows;
  json summary = json::object();
  for (const auto& v : order) {
    rows.emplace_back(v, eval::mean_metrics(by_variant[v]));
    summary[v] = eval::metrics_to_json(rows.back().second);
    summary[v]["cells"] = by_variant[v].size();
  }
  fs::create_directories(root);
  const std::string table = eval::comparison_table(rows);
  std::ofstream(root / "comparison.md") << table;
  engine::write_json(root / "summary.json", summary);
  std::cout << table;
  for (const auto& p : problems) std::cerr << p << '\n';
  if (!problems.empty()) throw CellFailure(problems.front());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online spatial concept and lexicon learning with grid SLAM"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<std::string> eval_dirs;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment or generator JSON");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed (replaces the config's seed list)");
  };
  auto algorithm = [&](CLI::App* sub) {
    sub->add_option("--variant", o.variant, "original | original+AW+WS | improved-FLR | improved-FLR+RS | scalable");
    sub->add_option("--particles", o.particles, "number of particles R");
    sub->add_option("--lag", o.lag, "lag window T_L");
    sub->add_option("--jobs", o.jobs, "cells run concurrently")->check(CLI::PositiveNumber);
  };
  auto* gen = app.add_subcommand("gen", "generate a simulated dataset and env.json");
  common(gen);
  auto* run = app.add_subcommand("run", "run every (variant, seed) cell of an experiment");
  common(run);
  algorithm(run);
  auto* bench = app.add_subcommand("bench", "run cells for timing only and report per-step slopes");
  common(bench);
  algorithm(bench);
  auto* ev = app.add_subcommand("eval", "compute metrics for run artifacts");
  ev->add_option("--out", o.out, "run root (scanned when no directories are given)");
  ev->add_option("dirs", eval_dirs, "cell artifact directories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (gen->parsed()) return cmd_gen(o);
    if (run->parsed()) return cmd_run(o, false);
    if (bench->parsed()) return cmd_run(o, true);
    if (ev->parsed()) return cmd_eval(o, eval_dirs);
  } catch (const CellFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
