#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "spco/concepts/predictive.hpp"
#include "spco/concepts/stats.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"

namespace spco::concepts {

struct ConceptOption {
  Assignment a;          // kNew marks a cluster birth
  double log_prior = 0;  // CRP(l) + CRP(k | l)
  double log_position = 0;
  double log_words = 0;
  double log_feature = 0;
  double log_score = 0;  // sum of the four terms above
  double probability = 0;
};

// Normalized distribution over (k, l): existing k inside existing l,
// (NEW k, l) for every existing l, and (NEW k, NEW l) last. A new concept
// has no position customers, so existing k paired with NEW l has no mass.
struct ConceptPrediction {
  std::vector<ConceptOption> options;

  std::vector<double> probabilities() const {
    std::vector<double> p;
    p.reserve(options.size());
    for (const auto& o : options) p.push_back(o.probability);
    return p;
  }
};

inline double log_crp_concept(const PosteriorStats& H, const ConceptStats* c, double alpha) {
  const double denom = H.total() + alpha;
  return std::log((c ? c->n : alpha) / denom);
}

inline double log_crp_position(const ConceptStats* c, const PositionStats* k, double gamma) {
  if (!c) return 0.0;
  return std::log((k ? k->n : gamma) / (c->n + gamma));
}

// H must exclude the datum. V is the word vocabulary size in force.
inline ConceptPrediction joint_conditional_ic(const PosteriorStats& H, const ConceptDatum& d,
                                              const Hyperparameters& h, int V) {
  ConceptPrediction out;
  const double x = d.x(), y = d.y();
  const double new_position = predictive_position(h, nullptr, x, y);
  auto push = [&](Assignment a, double prior, double pos, double words, double feat) {
    ConceptOption o;
    o.a = a;
    o.log_prior = prior;
    o.log_position = pos;
    o.log_words = words;
    o.log_feature = feat;
    o.log_score = prior + pos + words + feat;
    out.options.push_back(o);
  };
  for (const auto& [l, c] : H.concepts()) {
    const double crp_l = log_crp_concept(H, &c, h.alpha);
    const double words = predictive_words(&c, h.beta, V, d.words);
    const double feat = predictive_feature(&c, h.chi, d.feature);
    for (int k : c.positions) {
      const PositionStats* p = H.position(k);
      push({k, l}, crp_l + log_crp_position(&c, p, h.gamma), predictive_position(h, p, x, y), words, feat);
    }
    push({Assignment::kNew, l}, crp_l + log_crp_position(&c, nullptr, h.gamma), new_position, words, feat);
  }
  push({Assignment::kNew, Assignment::kNew}, log_crp_concept(H, nullptr, h.alpha), new_position,
       predictive_words(nullptr, h.beta, V, d.words), predictive_feature(nullptr, h.chi, d.feature));

  std::vector<double> scores;
  scores.reserve(out.options.size());
  for (const auto& o : out.options) scores.push_back(o.log_score);
  const auto p = normalize_log_weights(scores);
  for (std::size_t i = 0; i < p.size(); ++i) out.options[i].probability = p[i];
  return out;
}

inline Assignment sample_assignment(const ConceptPrediction& pred, Rng& rng) {
  const auto p = pred.probabilities();
  return pred.options[sample_categorical(p, rng)].a;
}

struct ConceptWeights {
  double omega_f = 0;
  double omega_ic = 0;
  double omega_s = 0;
};

// Marginal weight terms of the new datum against H (which excludes it).
inline ConceptWeights concept_weights(const PosteriorStats& H, const ConceptDatum& d, const Hyperparameters& h,
                                      int V) {
  std::vector<double> f_terms, ic_terms, s_terms;
  const double x = d.x(), y = d.y();
  for (const auto& [l, c] : H.concepts()) {
    const double crp_l = log_crp_concept(H, &c, h.alpha);
    f_terms.push_back(crp_l + predictive_feature(&c, h.chi, d.feature));
    s_terms.push_back(crp_l + predictive_words(&c, h.beta, V, d.words));
    for (int k : c.positions) {
      const PositionStats* p = H.position(k);
      ic_terms.push_back(crp_l + log_crp_position(&c, p, h.gamma) + predictive_position(h, p, x, y));
    }
    ic_terms.push_back(crp_l + log_crp_position(&c, nullptr, h.gamma) + predictive_position(h, nullptr, x, y));
  }
  const double crp_new = log_crp_concept(H, nullptr, h.alpha);
  f_terms.push_back(crp_new + predictive_feature(nullptr, h.chi, d.feature));
  s_terms.push_back(crp_new + predictive_words(nullptr, h.beta, V, d.words));
  ic_terms.push_back(crp_new + predictive_position(h, nullptr, x, y));

  ConceptWeights w;
  w.omega_f = log_sum_exp(f_terms);
  w.omega_ic = log_sum_exp(ic_terms);
  w.omega_s = log_sum_exp(s_terms) -
              predictive_words(&H.global_words(), H.global_word_total(), h.beta, V, d.words);
  return w;
}

// Word-information weight of a particle's segmentation: how much better its
// window words are explained by their concepts than by one shared urn.
// H_minus excludes the current datum; frozen holds data outside the
// window (null when the window is the whole history).
inline double selection_weight(const PosteriorStats& H_minus, const PosteriorStats* frozen, const ConceptDatum& d,
                               const Hyperparameters& h, int V) {
  double by_concept = 0.0;
  for (const auto& [l, c] : H_minus.concepts()) by_concept += log_polya_marginal(c.words, c.word_total, h.beta, V);
  double shared = log_polya_marginal(H_minus.global_words(), H_minus.global_word_total(), h.beta, V);
  if (frozen) {
    for (const auto& [l, c] : frozen->concepts()) by_concept -= log_polya_marginal(c.words, c.word_total, h.beta, V);
    shared -= log_polya_marginal(frozen->global_words(), frozen->global_word_total(), h.beta, V);
  }
  return by_concept - shared + concept_weights(H_minus, d, h, V).omega_s;
}

struct WindowEntry {
  ConceptDatum datum;
  Assignment a;
};

using SweepTrace = std::function<void(std::size_t index, const ConceptPrediction&)>;

// One collapsed-Gibbs pass over the entries (oldest first). Every entry must
// currently be counted in H under its assignment.
inline void flr_sweep(PosteriorStats& H, std::span<WindowEntry* const> entries, const Hyperparameters& h,
                      int V, Rng& rng, const SweepTrace& trace = {}) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    WindowEntry& e = *entries[i];
    H.remove(e.datum, e.a);
    const ConceptPrediction pred = joint_conditional_ic(H, e.datum, h, V);
    if (trace) trace(i, pred);
    e.a = H.add(e.datum, sample_assignment(pred, rng));
  }
}

}  // namespace spco::concepts
