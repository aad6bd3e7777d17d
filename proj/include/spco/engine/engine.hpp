#pragma once

#include <algorithm>
#include <chrono>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "spco/concepts/conditional.hpp"
#include "spco/concepts/theta.hpp"
#include "spco/core/channel.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"
#include "spco/core/resample.hpp"
#include "spco/engine/config.hpp"
#include "spco/engine/particle.hpp"
#include "spco/lexicon/decode.hpp"
#include "spco/lexicon/segment.hpp"
#include "spco/lexicon/select.hpp"
#include "spco/slam/grid.hpp"
#include "spco/slam/likelihood.hpp"
#include "spco/slam/motion.hpp"

namespace spco::engine {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct StepOutput {
  std::size_t step = 0;  // position in the record stream
  std::size_t t = 0;     // record timestamp
  bool teaching = false;
  std::size_t teach_index = 0;
  std::vector<double> weights;
  std::size_t max_particle = 0;
  std::size_t selected_particle = 0;
  WordSequence s_star;  // selected segmentation of this step's utterance
  double ess = 0.0;
  bool resampled = false;
  WeightTerms max_terms;
  int concepts = 0;
  int positions = 0;
  Pose pose;                        // of the max particle
  std::vector<Assignment> labels;  // max particle, by teaching index
  std::optional<concepts::ThetaSnapshot> theta;
  std::vector<std::pair<std::string, double>> timing;  // phase -> ms

  double phase_ms(const std::string& name) const {
    for (const auto& [k, v] : timing)
      if (k == name) return v;
    return 0.0;
  }
};

// Per-particle segmentation drawn at a teaching step.
using SegmentTrace = std::function<void(std::size_t t, std::size_t particle, std::size_t first_index,
                                        const lexicon::Sentences& words)>;

class Engine {
 public:
  explicit Engine(AlgorithmConfig cfg)
      : cfg_(std::move(cfg)), channel_(sim::make_channel(cfg_.channel)), lexicon_(cfg_.lexicon_params()) {
    cfg_.validate();
    channel_.validate();
    auto grid = std::make_shared<slam::OccupancyGrid>(
        slam::OccupancyGrid::centered(cfg_.grid, 0.0, 0.0, cfg_.grid_extent));
    particles_.resize(static_cast<std::size_t>(cfg_.particles));
    for (auto& p : particles_) {
      p.grid = grid;
      p.pose_window.push_back(p.pose);
    }
    lm_ring_.push_back(lexicon_);
  }

  const AlgorithmConfig& config() const { return cfg_; }
  const std::vector<Particle>& particles() const { return particles_; }
  const lexicon::Lexicon& lexicon() const { return lexicon_; }
  const std::vector<WordSequence>& sentences() const { return sentences_; }
  std::size_t teaching_count() const { return utterances_.size(); }
  std::size_t steps() const { return steps_; }
  // Max-weight particle of the last step, before resampling.
  const Particle& best_particle() const { return best_ ? *best_ : particles_.front(); }
  const ChannelModel& channel() const { return channel_; }

  void set_segment_trace(SegmentTrace trace) { segment_trace_ = std::move(trace); }

  StepOutput step(const StepRecord& rec) {
    rec.validate();
    if (rec.teaching && feature_dim_ && rec.teaching->feature.dimension() != feature_dim_)
      throw InvalidRecordError("image feature dimension changed");
    if (rec.teaching && !PhonemeAlphabet::syllables().contains(rec.teaching->phonemes))
      throw InvalidRecordError("utterance symbol outside the alphabet");

    const auto step_start = Clock::now();
    StepOutput out;
    out.step = steps_;
    out.t = rec.t;
    out.teaching = rec.is_teaching();
    const std::size_t R = particles_.size();

    TeachContext ctx;
    if (out.teaching) {
      feature_dim_ = rec.teaching->feature.dimension();
      out.teach_index = utterances_.size();
      utterances_.push_back(rec.teaching->phonemes);
      sentences_.emplace_back();
      const std::size_t n = utterances_.size();
      const auto t0 = Clock::now();
      ctx.index = out.teach_index;
      ctx.first = cfg_.scalable() ? (n > static_cast<std::size_t>(cfg_.lag) ? n - cfg_.lag : 0) : 0;
      ctx.feature = &rec.teaching->feature;
      // Window decoding and segmentation condition on the lexicon from just
      // before the window; full-history variants decode with the latest one.
      ctx.base = cfg_.scalable() ? &lexicon_before_window(n) : &empty_lexicon();
      const lexicon::Lexicon& decode_lm = cfg_.scalable() ? lexicon_before_window(n) : lexicon_;
      ctx.hyps.reserve(n - ctx.first);
      for (std::size_t i = ctx.first; i < n; ++i)
        ctx.hyps.push_back(lexicon::decode_nbest(utterances_[i], decode_lm, channel_, static_cast<std::size_t>(cfg_.nbest)));
      out.timing.emplace_back("decode", elapsed_ms(t0));
    }

    // Particles are independent; each draws from its own keyed stream.
    std::vector<double> slam_ms(R, 0.0), segment_ms(R, 0.0), concept_ms(R, 0.0);
    std::vector<lexicon::Sentences> traces(segment_trace_ ? R : 0);
    const auto tp = Clock::now();
    parallel_for(R, [&](std::size_t r) {
      Particle& p = particles_[r];
      Rng rng = make_rng(cfg_.seed, {r, steps_});
      auto t0 = Clock::now();
      p.terms = WeightTerms{};
      slam_phase(p, rec, rng);
      slam_ms[r] = elapsed_ms(t0);
      if (out.teaching) {
        teach_phase(p, ctx, rng, segment_ms[r], concept_ms[r]);
        if (segment_trace_) traces[r] = p.segmentation();
      }
      t0 = Clock::now();
      if (p.grid.use_count() > 1) p.grid = std::make_shared<slam::OccupancyGrid>(*p.grid);
      slam::integrate_scan(*p.grid, rec.scan, p.pose);
      slam_ms[r] += elapsed_ms(t0);
      p.terms.total = out.teaching ? p.terms.z + p.terms.f + p.terms.s + (cfg_.uses_aw() ? p.terms.ic : 0.0)
                                   : p.terms.z;
      p.log_weight += p.terms.total;
    });
    out.timing.emplace_back("particles", elapsed_ms(tp));
    auto sum = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s;
    };
    out.timing.emplace_back("slam", sum(slam_ms));
    if (out.teaching) {
      out.timing.emplace_back("segment", sum(segment_ms));
      out.timing.emplace_back("concepts", sum(concept_ms));
    }
    if (segment_trace_)
      for (std::size_t r = 0; r < R; ++r) segment_trace_(rec.t, r, ctx.first, traces[r]);

    auto t0 = Clock::now();
    std::vector<double> lw(R);
    for (std::size_t r = 0; r < R; ++r) lw[r] = particles_[r].log_weight;
    out.weights = normalize_log_weights(lw);
    assert_probability_vector(out.weights, "particle weights");
    out.max_particle = argmax_lowest(out.weights);
    out.ess = effective_sample_size(out.weights);
    const Particle& best = particles_[out.max_particle];
    out.max_terms = best.terms;
    out.concepts = static_cast<int>(best.stats.concepts().size());
    out.positions = static_cast<int>(best.stats.positions().size());
    out.pose = best.pose;
    if (out.teaching) out.labels = best.labels();

    if (out.teaching) {
      out.selected_particle = select_particle(out.weights);
      const Particle& sel = particles_[out.selected_particle];
      const lexicon::Sentences window = sel.segmentation();
      for (std::size_t i = 0; i < window.size(); ++i) sentences_[sel.history[i].index] = window[i];
      out.s_star = sentences_.back();
      out.timing.emplace_back("select", elapsed_ms(t0));

      t0 = Clock::now();
      update_lexicon(ctx, window);
      out.timing.emplace_back("lexicon", elapsed_ms(t0));

      const int V = concepts::vocabulary_size(best.stats, {});
      out.theta = concepts::estimate_theta(best.stats, cfg_.hyper, V, feature_dim_);
    } else {
      out.selected_particle = out.max_particle;
    }
    best_ = std::make_shared<Particle>(best);

    t0 = Clock::now();
    const bool allowed = out.teaching || !cfg_.resample_teaching_only;
    const bool wanted = cfg_.resample == ResampleMode::every_step || out.ess < cfg_.ess_fraction * static_cast<double>(R);
    if (allowed && wanted) {
      Rng rng = make_rng(cfg_.seed, {kEngineStream, steps_, 0});
      const auto idx = systematic_resample(out.weights, R, rng);
      std::vector<Particle> next;
      next.reserve(R);
      for (std::size_t i : idx) next.push_back(particles_[i]);
      for (auto& p : next) p.log_weight = 0.0;
      particles_ = std::move(next);
      out.resampled = true;
    }
    out.timing.emplace_back("resample", elapsed_ms(t0));
    out.timing.emplace_back("total", elapsed_ms(step_start));
    ++steps_;
    return out;
  }

 private:
  static constexpr std::uint64_t kEngineStream = ~std::uint64_t{0};

  struct TeachContext {
    std::vector<lexicon::HypothesisList> hyps;  // utterances first.. index
    std::size_t first = 0;
    std::size_t index = 0;
    const lexicon::Lexicon* base = nullptr;
    const ImageFeature* feature = nullptr;
  };

  const lexicon::Lexicon& empty_lexicon() {
    if (!empty_) empty_ = std::make_unique<lexicon::Lexicon>(cfg_.lexicon_params());
    return *empty_;
  }

  // LM after teaching step n - lag (the empty lexicon before that exists).
  const lexicon::Lexicon& lexicon_before_window(std::size_t n) const {
    const std::size_t lag = static_cast<std::size_t>(cfg_.lag);
    const std::size_t tprime = n > lag ? n - lag : 0;
    return lm_ring_.at(tprime - lm_ring_base_);
  }

  void slam_phase(Particle& p, const StepRecord& rec, Rng& rng) const {
    const Pose prev = p.pose;
    const Pose guess = slam::sample_motion_model(rec.odom, prev, cfg_.motion, rng);
    p.pose = slam::scan_match(rec.scan, guess, *p.grid, cfg_.scan_match, cfg_.likelihood);
    p.terms.z = slam::slam_weight(rec.scan, prev, rec.odom, *p.grid, cfg_.motion_samples, cfg_.motion, rng,
                                  cfg_.likelihood);
    p.pose_window.push_back(p.pose);
    while (p.pose_window.size() > static_cast<std::size_t>(cfg_.lag) + 1) p.pose_window.pop_front();
  }

  void teach_phase(Particle& p, const TeachContext& ctx, Rng& rng, double& segment_ms, double& concept_ms) const {
    const Hyperparameters& h = cfg_.hyper;
    auto t0 = Clock::now();
    if (cfg_.scalable()) {
      while (!p.history.empty() && p.history.front().index < ctx.first) {
        const HistoryEntry& old = p.history.front();
        p.frozen.add(old.entry.datum, old.entry.a);
        p.frozen_labels = std::make_shared<const LabelNode>(LabelNode{old.index, old.entry.a, p.frozen_labels});
        ++p.frozen_count;
        p.history.pop_front();
      }
    }
    if (p.history.size() + 1 != ctx.hyps.size()) throw CorruptionError("history and utterance window disagree");
    const lexicon::SegmentResult seg = lexicon::segment_gibbs(ctx.hyps, *ctx.base, cfg_.effective_sweeps(), rng);
    segment_ms += elapsed_ms(t0);

    t0 = Clock::now();
    for (std::size_t i = 0; i < p.history.size(); ++i) {
      auto& e = p.history[i].entry;
      const WordSequence& w = seg.utterances[i].words;
      if (w != e.datum.words) {
        p.stats.replace_words(e.a.concept_id, e.datum.words, w);
        e.datum.words = w;
      }
    }
    concepts::ConceptDatum datum(p.pose.x, p.pose.y, *ctx.feature, seg.utterances.back().words);
    int V = concepts::vocabulary_size(p.stats, datum.words);
    const Assignment a = p.stats.add(datum, concepts::sample_assignment(
                                                concepts::joint_conditional_ic(p.stats, datum, h, V), rng));
    p.history.push_back({ctx.index, {std::move(datum), a}});

    if (cfg_.uses_flr() && cfg_.lag > 0) {
      const std::size_t w = std::min(p.history.size(), static_cast<std::size_t>(cfg_.lag));
      std::vector<concepts::WindowEntry*> window;
      for (std::size_t i = p.history.size() - w; i < p.history.size(); ++i) window.push_back(&p.history[i].entry);
      V = concepts::vocabulary_size(p.stats, {});
      concepts::flr_sweep(p.stats, window, h, V, rng);
    }

    concepts::WindowEntry& cur = p.history.back().entry;
    p.stats.remove(cur.datum, cur.a);
    V = concepts::vocabulary_size(p.stats, cur.datum.words);
    const concepts::ConceptWeights w = concepts::concept_weights(p.stats, cur.datum, h, V);
    p.terms.f = w.omega_f;
    p.terms.ic = w.omega_ic;
    p.terms.s = w.omega_s;
    p.terms.selection =
        concepts::selection_weight(p.stats, cfg_.scalable() ? &p.frozen : nullptr, cur.datum, h, V);
    p.stats.add(cur.datum, cur.a);
    concept_ms += elapsed_ms(t0);
  }

  std::size_t select_particle(const std::vector<double>& weights) const {
    if (!cfg_.selects_by_word_weight()) return argmax_lowest(weights);
    std::vector<lexicon::Sentences> segs;
    std::vector<double> sw;
    segs.reserve(particles_.size());
    for (const auto& p : particles_) {
      segs.push_back(p.segmentation());
      sw.push_back(p.terms.selection);
    }
    return lexicon::select_segmentation(segs, sw);
  }

  void update_lexicon(const TeachContext& ctx, const lexicon::Sentences& window) {
    const std::size_t n = utterances_.size();
    Rng rng = make_rng(cfg_.seed, {kEngineStream, steps_, 1});
    lexicon::Lexicon next = cfg_.scalable() ? lexicon_before_window(n) : lexicon::Lexicon(cfg_.lexicon_params());
    const lexicon::Sentences& scope = cfg_.scalable() ? window : sentences_;
    if (cfg_.uses_rs())
      next.merge(lexicon::resegment(scope, *ctx.base, cfg_.effective_rs_sweeps(), rng));
    else
      for (const auto& s : scope) next.add_words(s);
    lexicon_ = std::move(next);
    lm_ring_.push_back(lexicon_);
    while (lm_ring_.size() > static_cast<std::size_t>(cfg_.lag) + 1) {
      lm_ring_.pop_front();
      ++lm_ring_base_;
    }
  }

  template <typename F>
  void parallel_for(std::size_t n, F&& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg_.threads), n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) body(i);
      return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  AlgorithmConfig cfg_;
  ChannelModel channel_;
  std::vector<Particle> particles_;
  lexicon::Lexicon lexicon_;  // LM_t, shared by all particles
  std::deque<lexicon::Lexicon> lm_ring_;
  std::size_t lm_ring_base_ = 0;
  std::unique_ptr<lexicon::Lexicon> empty_;
  std::vector<PhonemeSeq> utterances_;
  std::vector<WordSequence> sentences_;  // S* per teaching step
  std::shared_ptr<Particle> best_;
  std::size_t feature_dim_ = 0;
  std::size_t steps_ = 0;
  SegmentTrace segment_trace_;
};

}  // namespace spco::engine
