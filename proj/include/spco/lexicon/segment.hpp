#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "spco/core/error.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"
#include "spco/lexicon/decode.hpp"
#include "spco/lexicon/lattice.hpp"
#include "spco/lexicon/lexicon.hpp"

namespace spco::lexicon {

struct Segmentation {
  std::size_t hypothesis = 0;  // index into the utterance's HypothesisList
  WordSequence words;
};

struct SegmentResult {
  std::vector<Segmentation> utterances;
  Lexicon lexicon;  // counts of the sampled words only

  std::vector<WordSequence> sentences() const {
    std::vector<WordSequence> out;
    out.reserve(utterances.size());
    for (const auto& u : utterances) out.push_back(u.words);
    return out;
  }
};

// Log probability of words under the lexicon, seating each word before the
// next is scored (the exact DP-unigram probability of the sequence).
inline double sequential_log_prob(const WordSequence& words, const Lexicon& lex) {
  std::map<Word, int> seated;
  double s = 0.0;
  long extra = 0;
  for (const auto& w : words) {
    int& c = seated[w];
    s += std::log(lex.prob(lex.count(w) + c, static_cast<int>(w.size()), extra));
    ++c;
    ++extra;
  }
  return s;
}

// Same words scored against the lexicon counts held fixed.
inline double fixed_log_prob(const WordSequence& words, const Lexicon& lex) {
  double s = 0.0;
  for (const auto& w : words) s += lex.log_prob(w);
  return s;
}

// Blocked sampler over (hypothesis choice, word boundaries) of every
// utterance under a DP-unigram model. Each utterance is resampled with an
// independence Metropolis-Hastings move whose proposal is forward-filtering
// backward-sampling against the other utterances' counts; the acceptance
// step corrects for words repeated inside the utterance.
class SegmentSampler {
 public:
  SegmentSampler(const std::vector<HypothesisList>& hypotheses, const Lexicon& base)
      : hyps_(hypotheses), lex_(base), induced_(base.params()), state_(hypotheses.size()) {}

  // First pass: each utterance drawn from the proposal given the ones before it.
  void initialize(Rng& rng) {
    for (std::size_t u = 0; u < hyps_.size(); ++u) {
      if (hyps_[u].empty()) continue;
      state_[u] = propose(u, rng).seg;
      seat(state_[u].words, +1);
    }
    initialized_ = true;
  }

  void sweep(Rng& rng) {
    if (!initialized_) throw Error("SegmentSampler: sweep before initialize");
    for (std::size_t u = 0; u < hyps_.size(); ++u) {
      if (hyps_[u].empty()) continue;
      seat(state_[u].words, -1);
      Proposal p = propose(u, rng);
      const double log_ratio = (sequential_log_prob(p.seg.words, lex_) - p.log_fixed) -
                               (sequential_log_prob(state_[u].words, lex_) - fixed_log_prob(state_[u].words, lex_));
      ++proposals_;
      if (log_ratio >= 0.0 || std::log(uniform01(rng)) < log_ratio) {
        state_[u] = std::move(p.seg);
        ++accepted_;
      }
      seat(state_[u].words, +1);
    }
  }

  const std::vector<Segmentation>& state() const { return state_; }
  const Lexicon& induced_lexicon() const { return induced_; }
  double acceptance_rate() const { return proposals_ ? static_cast<double>(accepted_) / proposals_ : 1.0; }

  SegmentResult result() const { return {state_, induced_}; }

 private:
  struct Proposal {
    Segmentation seg;
    double log_fixed = 0.0;  // proposal's word term against fixed counts
  };

  void seat(const WordSequence& words, int sign) {
    for (const auto& w : words) {
      if (sign > 0) {
        lex_.add(w);
        induced_.add(w);
      } else {
        lex_.remove(w);
        induced_.remove(w);
      }
    }
  }

  Proposal propose(std::size_t u, Rng& rng) const {
    const auto& list = hyps_[u].items;
    std::vector<WordLattice> lattices;
    std::vector<std::vector<double>> alphas;
    std::vector<double> log_z(list.size());
    lattices.reserve(list.size());
    alphas.reserve(list.size());
    std::vector<double> choice(list.size());
    for (std::size_t h = 0; h < list.size(); ++h) {
      lattices.push_back(build_lattice(list[h].phonemes, lex_));
      alphas.push_back(forward_filter(lattices.back()));
      log_z[h] = log_marginal(lattices.back(), alphas.back());
      choice[h] = list[h].log_channel + log_z[h];
    }
    const std::size_t h = sample_log_categorical(choice, rng);
    const WordLattice& lat = lattices[h];
    const auto& alpha = alphas[h];
    const PhonemeSeq& s = list[h].phonemes;
    const bool linear = alpha[lat.n] > 0.0 && std::isfinite(alpha[lat.n]);
    std::vector<double> log_alpha;
    if (!linear) log_alpha = log_forward(lat);

    Proposal p;
    p.seg.hypothesis = h;
    std::vector<std::size_t> cuts;
    std::size_t j = lat.n;
    std::vector<double> w;
    while (j > 0) {
      const int top = static_cast<int>(std::min<std::size_t>(lat.max_len, j));
      w.assign(static_cast<std::size_t>(top), 0.0);
      for (int L = 1; L <= top; ++L) {
        w[L - 1] = linear ? alpha[j - L] * lat.at(j - L, L)
                          : log_alpha[j - L] + std::log(lat.at(j - L, L)) - L * lat.log_scale;
      }
      const std::size_t pick = linear ? sample_categorical(normalized(w), rng) : sample_log_categorical(w, rng);
      const int L = static_cast<int>(pick) + 1;
      p.log_fixed += std::log(lat.at(j - L, L)) - L * lat.log_scale;
      j -= static_cast<std::size_t>(L);
      cuts.push_back(j);
    }
    std::size_t end = lat.n;
    for (std::size_t c : cuts) {
      p.seg.words.insert(p.seg.words.begin(), Word(s.begin() + static_cast<std::ptrdiff_t>(c),
                                                   s.begin() + static_cast<std::ptrdiff_t>(end)));
      end = c;
    }
    return p;
  }

  static std::vector<double> normalized(std::vector<double> w) {
    double t = 0.0;
    for (double v : w) t += v;
    for (double& v : w) v /= t;
    return w;
  }

  static std::vector<double> log_forward(const WordLattice& lat) {
    std::vector<double> la(lat.n + 1, kNegInf);
    la[0] = 0.0;
    for (std::size_t j = 1; j <= lat.n; ++j) {
      const int top = static_cast<int>(std::min<std::size_t>(lat.max_len, j));
      for (int L = 1; L <= top; ++L)
        la[j] = log_add(la[j], la[j - L] + std::log(lat.at(j - L, L)) - L * lat.log_scale);
    }
    return la;
  }

  const std::vector<HypothesisList>& hyps_;
  Lexicon lex_;      // base counts plus the current sample
  Lexicon induced_;  // current sample only
  std::vector<Segmentation> state_;
  bool initialized_ = false;
  long proposals_ = 0;
  long accepted_ = 0;
};

// `sweeps` passes in total; the first is the initialization pass.
inline SegmentResult segment_gibbs(const std::vector<HypothesisList>& hypotheses, const Lexicon& base, int sweeps,
                                   Rng& rng) {
  if (sweeps < 1) throw SpecError("segment_gibbs: sweeps must be >= 1");
  SegmentSampler sampler(hypotheses, base);
  sampler.initialize(rng);
  for (int s = 1; s < sweeps; ++s) sampler.sweep(rng);
  return sampler.result();
}

// Re-segment selected sentences from their phoneme strings alone.
inline Lexicon resegment(const std::vector<WordSequence>& sentences, const Lexicon& base, int sweeps, Rng& rng) {
  std::vector<HypothesisList> hyps;
  hyps.reserve(sentences.size());
  for (const auto& s : sentences) hyps.push_back(exact_hypothesis(concatenate(s)));
  return segment_gibbs(hyps, base, sweeps, rng).lexicon;
}

}  // namespace spco::lexicon
