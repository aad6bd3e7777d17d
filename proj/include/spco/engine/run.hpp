#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spco/concepts/theta.hpp"
#include "spco/core/error.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/record_io.hpp"
#include "spco/engine/config.hpp"
#include "spco/engine/engine.hpp"
#include "spco/eval/report.hpp"
#include "spco/slam/grid.hpp"

namespace spco::engine {

namespace fs = std::filesystem;

inline nlohmann::json assignment_to_json(const Assignment& a) { return {{"position", a.position}, {"concept", a.concept_id}}; }

inline Assignment assignment_from_json(const nlohmann::json& j) {
  return {j.at("position").get<int>(), j.at("concept").get<int>()};
}

inline nlohmann::json terms_to_json(const WeightTerms& w) {
  return {{"z", w.z}, {"f", w.f}, {"ic", w.ic}, {"s", w.s}, {"selection", w.selection}, {"total", w.total}};
}

// Wall times are left out so that reruns compare byte for byte.
inline nlohmann::json step_to_json(const StepOutput& s, const PhonemeAlphabet& alphabet) {
  nlohmann::json j;
  j["step"] = s.step;
  j["t"] = s.t;
  j["teaching"] = s.teaching;
  j["weights"] = s.weights;
  j["max_particle"] = s.max_particle;
  j["ess"] = s.ess;
  j["resampled"] = s.resampled;
  j["pose"] = pose_to_json(s.pose);
  j["terms"] = terms_to_json(s.max_terms);
  j["concepts"] = s.concepts;
  j["positions"] = s.positions;
  if (s.teaching) {
    j["teach_index"] = s.teach_index;
    j["selected_particle"] = s.selected_particle;
    j["s_star"] = words_to_json(s.s_star, alphabet);
    j["labels"] = nlohmann::json::array();
    for (const auto& a : s.labels) j["labels"].push_back(assignment_to_json(a));
    if (s.theta) j["theta"] = concepts::theta_to_json(*s.theta, alphabet);
  }
  return j;
}

inline eval::CellEstimate final_estimate(const Engine& e) {
  eval::CellEstimate est;
  const Particle& best = e.best_particle();
  est.labels = best.labels();
  est.n_concepts = static_cast<int>(best.stats.concepts().size());
  est.n_positions = static_cast<int>(best.stats.positions().size());
  est.sentences = e.sentences();
  est.theta = concepts::estimate_theta(best.stats, e.config().hyper, concepts::vocabulary_size(best.stats, {}),
                                       best.stats.feature_dimension());
  est.lexicon = e.lexicon();
  return est;
}

struct RunResult {
  std::vector<StepOutput> outputs;
  eval::CellEstimate estimate;
};

class FileSink {
 public:
  FileSink(const fs::path& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }
  std::ostream& stream() { return out_; }
  void check(std::size_t step) {
    if (!out_) throw IoError("step " + std::to_string(step) + ": write failed: " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline nlohmann::json estimate_labels_json(const eval::CellEstimate& est) {
  nlohmann::json j;
  j["labels"] = nlohmann::json::array();
  for (const auto& a : est.labels) j["labels"].push_back(assignment_to_json(a));
  j["concepts"] = est.n_concepts;
  j["positions"] = est.n_positions;
  return j;
}

inline void write_final(const fs::path& dir, const Engine& e, const eval::CellEstimate& est,
                        const PhonemeAlphabet& alphabet) {
  fs::create_directories(dir);
  slam::write_pgm(*e.best_particle().grid, (dir / "grid.pgm").string(), (dir / "grid.json").string());
  write_json(dir / "params.json", concepts::theta_to_json(est.theta, alphabet));
  write_json(dir / "lexicon.json", est.lexicon.to_json(alphabet));
  write_json(dir / "labels.json", estimate_labels_json(est));
  nlohmann::json s = nlohmann::json::array();
  for (const auto& w : est.sentences) s.push_back(words_to_json(w, alphabet));
  write_json(dir / "sentences.json", s);
}

// Runs the engine over a record stream. With an output directory it writes
// config.json, steps.jsonl, timing.csv, final/ and, when given, truth.json.
inline RunResult run_records(const std::vector<StepRecord>& records, const AlgorithmConfig& cfg,
                             const std::optional<fs::path>& out_dir = std::nullopt,
                             const eval::CellTruth* truth = nullptr, bool write_snapshot = true) {
  if (records.empty()) throw SpecError("run: dataset is empty");
  const PhonemeAlphabet& alphabet = PhonemeAlphabet::syllables();
  Engine engine(cfg);
  RunResult result;
  std::optional<FileSink> steps, timing, segments;
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_json(*out_dir / "config.json", config_to_json(cfg));
    if (truth) write_json(*out_dir / "truth.json", eval::truth_to_json(*truth, alphabet));
    steps.emplace(*out_dir / "steps.jsonl");
    timing.emplace(*out_dir / "timing.csv");
    timing->stream() << "t,phase,ms\n";
    if (cfg.trace_segments) {
      segments.emplace(*out_dir / "segments.jsonl");
      engine.set_segment_trace([&](std::size_t t, std::size_t r, std::size_t first, const lexicon::Sentences& w) {
        nlohmann::json j = {{"t", t}, {"particle", r}, {"first_index", first}, {"words", nlohmann::json::array()}};
        for (const auto& s : w) j["words"].push_back(words_to_json(s, alphabet));
        segments->stream() << j.dump() << '\n';
      });
    }
  }
  for (const auto& rec : records) {
    StepOutput out = engine.step(rec);
    if (steps) {
      steps->stream() << step_to_json(out, alphabet).dump() << '\n';
      steps->check(out.step);
      for (const auto& [phase, ms] : out.timing) timing->stream() << out.t << ',' << phase << ',' << ms << '\n';
      timing->check(out.step);
      if (segments) segments->check(out.step);
    }
    result.outputs.push_back(std::move(out));
  }
  result.estimate = final_estimate(engine);
  if (out_dir && write_snapshot) write_final(*out_dir / "final", engine, result.estimate, alphabet);
  return result;
}

inline std::string cell_name(Variant v, std::uint64_t seed) { return variant_slug(v) + "_seed" + std::to_string(seed); }

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

struct CellArtifacts {
  std::string variant;
  std::uint64_t seed = 0;
  eval::CellTruth truth;
  eval::CellEstimate estimate;
  std::vector<nlohmann::json> steps;
};

inline CellArtifacts load_cell(const fs::path& dir) {
  const PhonemeAlphabet& alphabet = PhonemeAlphabet::syllables();
  CellArtifacts c;
  const nlohmann::json cfg = read_json(dir / "config.json");
  c.variant = cfg.at("variant").get<std::string>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  c.truth = eval::truth_from_json(read_json(dir / "truth.json"), alphabet);
  const nlohmann::json labels = read_json(dir / "final" / "labels.json");
  for (const auto& a : labels.at("labels")) c.estimate.labels.push_back(assignment_from_json(a));
  c.estimate.n_concepts = labels.at("concepts").get<int>();
  c.estimate.n_positions = labels.at("positions").get<int>();
  for (const auto& s : read_json(dir / "final" / "sentences.json")) c.estimate.sentences.push_back(words_from_json(s, alphabet));
  c.estimate.theta = concepts::theta_from_json(read_json(dir / "final" / "params.json"), alphabet);
  c.estimate.lexicon =
      lexicon::Lexicon::from_json(read_json(dir / "final" / "lexicon.json"), alphabet, config_from_json(cfg).lexicon_params());
  std::ifstream in(dir / "steps.jsonl");
  if (!in) throw IoError("missing " + (dir / "steps.jsonl").string());
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) c.steps.push_back(nlohmann::json::parse(line));
  return c;
}

}  // namespace spco::engine
