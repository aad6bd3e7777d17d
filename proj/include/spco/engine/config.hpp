#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "spco/core/error.hpp"
#include "spco/core/types.hpp"
#include "spco/lexicon/lexicon.hpp"
#include "spco/sim/dataset.hpp"
#include "spco/slam/grid.hpp"
#include "spco/slam/likelihood.hpp"
#include "spco/slam/motion.hpp"

namespace spco::engine {

enum class Variant { original, original_aw_ws, improved_flr, improved_flr_rs, scalable };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::original_aw_ws: return "original+AW+WS";
    case Variant::improved_flr: return "improved-FLR";
    case Variant::improved_flr_rs: return "improved-FLR+RS";
    case Variant::scalable: return "scalable";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::original, Variant::original_aw_ws, Variant::improved_flr, Variant::improved_flr_rs,
                    Variant::scalable})
    if (variant_name(v) == s) return v;
  throw SpecError("unknown variant '" + s + "'");
}

// File-system friendly variant label for artifact directories.
inline std::string variant_slug(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::original_aw_ws: return "original_aw_ws";
    case Variant::improved_flr: return "improved_flr";
    case Variant::improved_flr_rs: return "improved_flr_rs";
    case Variant::scalable: return "scalable";
  }
  return "unknown";
}

enum class ResampleMode { every_step, ess };

struct AlgorithmConfig {
  Variant variant = Variant::improved_flr_rs;
  int particles = 10;
  int lag = 10;
  int motion_samples = 30;
  int nbest = 5;
  int sweeps = 0;   // segmentation sweeps per call; 0 picks 10, or 20 for scalable
  int rs_sweeps = 0;  // re-segmentation sweeps; 0 uses `sweeps`
  bool rs_on_scalable = false;
  std::uint64_t seed = 1;
  ResampleMode resample = ResampleMode::every_step;
  double ess_fraction = 0.5;
  bool resample_teaching_only = false;
  int threads = 1;
  bool trace_segments = false;

  Hyperparameters hyper;
  lexicon::LexiconParams lexicon;
  slam::MotionNoise motion;
  slam::GridParams grid;
  double grid_extent = 20.0;
  slam::LikelihoodParams likelihood;
  slam::ScanMatchParams scan_match;
  sim::ChannelSpec channel;  // decoder's model of the phoneme channel

  bool uses_flr() const { return variant == Variant::improved_flr || variant == Variant::improved_flr_rs || scalable(); }
  bool uses_aw() const { return variant != Variant::original; }
  bool selects_by_word_weight() const { return variant != Variant::original; }
  bool uses_rs() const { return variant == Variant::improved_flr_rs || (scalable() && rs_on_scalable); }
  bool scalable() const { return variant == Variant::scalable; }
  int effective_sweeps() const { return sweeps > 0 ? sweeps : (scalable() ? 20 : 10); }
  int effective_rs_sweeps() const { return rs_sweeps > 0 ? rs_sweeps : effective_sweeps(); }
  lexicon::LexiconParams lexicon_params() const {
    lexicon::LexiconParams p = lexicon;
    p.lambda = hyper.lambda;
    return p;
  }

  void validate() const {
    if (particles < 1) throw SpecError("config: particles must be >= 1");
    if (lag < 0) throw SpecError("config: lag must be >= 0");
    if (scalable() && lag < 1) throw SpecError("config: the scalable variant needs lag >= 1");
    if (rs_on_scalable && !scalable()) throw SpecError("config: rs_on_scalable applies to the scalable variant only");
    if (motion_samples < 1) throw SpecError("config: motion_samples must be >= 1");
    if (nbest < 1) throw SpecError("config: nbest must be >= 1");
    if (sweeps < 0 || rs_sweeps < 0) throw SpecError("config: sweeps must be >= 0");
    if (threads < 1) throw SpecError("config: threads must be >= 1");
    if (!(ess_fraction > 0.0 && ess_fraction <= 1.0)) throw SpecError("config: ess_fraction must lie in (0, 1]");
    if (!(grid_extent > 0.0)) throw SpecError("config: grid_extent must be > 0");
    hyper.validate();
    lexicon.validate();
    motion.validate();
    grid.validate();
  }
};

inline nlohmann::json hyper_to_json(const Hyperparameters& h) {
  return {{"alpha", h.alpha}, {"beta", h.beta},     {"gamma", h.gamma},
          {"chi", h.chi},     {"lambda", h.lambda}, {"m0", {h.m0[0], h.m0[1]}},
          {"kappa0", h.kappa0},
          {"V0", {{h.V0[0][0], h.V0[0][1]}, {h.V0[1][0], h.V0[1][1]}}},
          {"nu0", h.nu0}};
}

inline Hyperparameters hyper_from_json(const nlohmann::json& j) {
  Hyperparameters h;
  h.alpha = j.value("alpha", h.alpha);
  h.beta = j.value("beta", h.beta);
  h.gamma = j.value("gamma", h.gamma);
  h.chi = j.value("chi", h.chi);
  h.lambda = j.value("lambda", h.lambda);
  h.kappa0 = j.value("kappa0", h.kappa0);
  h.nu0 = j.value("nu0", h.nu0);
  if (j.contains("m0")) {
    h.m0[0] = j["m0"].at(0).get<double>();
    h.m0[1] = j["m0"].at(1).get<double>();
  }
  if (j.contains("V0"))
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) h.V0[r][c] = j["V0"].at(r).at(c).get<double>();
  return h;
}

inline nlohmann::json config_to_json(const AlgorithmConfig& c) {
  nlohmann::json j;
  j["variant"] = variant_name(c.variant);
  j["particles"] = c.particles;
  j["lag"] = c.lag;
  j["motion_samples"] = c.motion_samples;
  j["nbest"] = c.nbest;
  j["sweeps"] = c.effective_sweeps();
  j["rs_sweeps"] = c.effective_rs_sweeps();
  j["rs_on_scalable"] = c.rs_on_scalable;
  j["seed"] = c.seed;
  j["resample"] = c.resample == ResampleMode::every_step ? "every_step" : "ess";
  j["ess_fraction"] = c.ess_fraction;
  j["resample_teaching_only"] = c.resample_teaching_only;
  j["threads"] = c.threads;
  j["trace_segments"] = c.trace_segments;
  j["hyperparameters"] = hyper_to_json(c.hyper);
  j["lexicon"] = {{"p_len", c.lexicon.p_len}, {"max_word_length", c.lexicon.max_word_length}};
  j["motion_noise"] = {c.motion.a1, c.motion.a2, c.motion.a3, c.motion.a4};
  j["grid"] = {{"resolution", c.grid.resolution},   {"l_occ", c.grid.l_occ},
               {"l_free", c.grid.l_free},           {"l_max", c.grid.l_max},
               {"distance_refresh", c.grid.distance_refresh}, {"extent", c.grid_extent}};
  j["likelihood"] = {{"sigma_hit", c.likelihood.sigma_hit}, {"w_hit", c.likelihood.w_hit},
                     {"w_rand", c.likelihood.w_rand}};
  j["channel"] = {{"sub", c.channel.sub}, {"ins", c.channel.ins}, {"del", c.channel.del}};
  return j;
}

inline AlgorithmConfig config_from_json(const nlohmann::json& j) {
  AlgorithmConfig c;
  if (j.contains("variant")) c.variant = parse_variant(j["variant"].get<std::string>());
  c.particles = j.value("particles", c.particles);
  c.lag = j.value("lag", c.lag);
  c.motion_samples = j.value("motion_samples", c.motion_samples);
  c.nbest = j.value("nbest", c.nbest);
  c.sweeps = j.value("sweeps", c.sweeps);
  c.rs_sweeps = j.value("rs_sweeps", c.rs_sweeps);
  c.rs_on_scalable = j.value("rs_on_scalable", c.rs_on_scalable);
  c.seed = j.value("seed", c.seed);
  if (j.contains("resample")) {
    const auto m = j["resample"].get<std::string>();
    if (m == "every_step")
      c.resample = ResampleMode::every_step;
    else if (m == "ess")
      c.resample = ResampleMode::ess;
    else
      throw SpecError("config: resample must be every_step or ess");
  }
  c.ess_fraction = j.value("ess_fraction", c.ess_fraction);
  c.resample_teaching_only = j.value("resample_teaching_only", c.resample_teaching_only);
  c.threads = j.value("threads", c.threads);
  c.trace_segments = j.value("trace_segments", c.trace_segments);
  if (j.contains("hyperparameters")) c.hyper = hyper_from_json(j["hyperparameters"]);
  c.lexicon.lambda = c.hyper.lambda;
  if (j.contains("lexicon")) {
    c.lexicon.p_len = j["lexicon"].value("p_len", c.lexicon.p_len);
    c.lexicon.max_word_length = j["lexicon"].value("max_word_length", c.lexicon.max_word_length);
  }
  if (j.contains("motion_noise")) {
    const auto& m = j["motion_noise"];
    c.motion = {m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>(), m.at(3).get<double>()};
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    c.grid.resolution = g.value("resolution", c.grid.resolution);
    c.grid.l_occ = g.value("l_occ", c.grid.l_occ);
    c.grid.l_free = g.value("l_free", c.grid.l_free);
    c.grid.l_max = g.value("l_max", c.grid.l_max);
    c.grid.distance_refresh = g.value("distance_refresh", c.grid.distance_refresh);
    c.grid_extent = g.value("extent", c.grid_extent);
  }
  if (j.contains("likelihood")) {
    const auto& l = j["likelihood"];
    c.likelihood.sigma_hit = l.value("sigma_hit", c.likelihood.sigma_hit);
    c.likelihood.w_hit = l.value("w_hit", c.likelihood.w_hit);
    c.likelihood.w_rand = l.value("w_rand", c.likelihood.w_rand);
  }
  if (j.contains("channel")) {
    const auto& ch = j["channel"];
    c.channel.sub = ch.value("sub", c.channel.sub);
    c.channel.ins = ch.value("ins", c.channel.ins);
    c.channel.del = ch.value("del", c.channel.del);
  }
  return c;
}

}  // namespace spco::engine
