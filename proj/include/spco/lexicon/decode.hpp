#pragma once

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "spco/core/channel.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/types.hpp"
#include "spco/lexicon/lattice.hpp"
#include "spco/lexicon/lexicon.hpp"

namespace spco::lexicon {

struct Hypothesis {
  PhonemeSeq phonemes;
  double log_score = 0.0;    // posterior over the candidate set
  double log_channel = 0.0;  // log P(observed | phonemes)
};

// At most B hypotheses, scores descending.
struct HypothesisList {
  std::vector<Hypothesis> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  const Hypothesis& top() const { return items.front(); }
};

// The observation itself plus every sequence one substitution, deletion or
// insertion away from it (empty sequences excluded).
inline std::vector<PhonemeSeq> edit_neighbors(const PhonemeSeq& y, std::size_t A) {
  std::unordered_set<PhonemeSeq, PhonemeSeqHash> seen;
  std::vector<PhonemeSeq> out;
  auto push = [&](PhonemeSeq s) {
    if (s.empty()) return;
    if (seen.insert(s).second) out.push_back(std::move(s));
  };
  push(y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t a = 0; a < A; ++a) {
      if (a == y[i]) continue;
      PhonemeSeq s = y;
      s[i] = static_cast<Phoneme>(a);
      push(std::move(s));
    }
    PhonemeSeq d = y;
    d.erase(d.begin() + static_cast<std::ptrdiff_t>(i));
    push(std::move(d));
  }
  for (std::size_t i = 0; i <= y.size(); ++i) {
    for (std::size_t a = 0; a < A; ++a) {
      PhonemeSeq s = y;
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), static_cast<Phoneme>(a));
      push(std::move(s));
    }
  }
  return out;
}

// n-best source hypotheses for an observed utterance: channel likelihood
// times lexicon prior, normalized over the candidate set. The verbatim
// observation is always kept.
inline HypothesisList decode_nbest(const PhonemeSeq& y, const Lexicon& lm, const ChannelModel& ch, std::size_t B) {
  if (B < 1) throw SpecError("decode_nbest: B must be >= 1");
  HypothesisList out;
  if (y.empty()) return out;
  std::vector<Hypothesis> cands;
  if (ch.noiseless()) {
    cands.push_back({y, 0.0, 0.0});
  } else {
    for (auto& s : edit_neighbors(y, ch.alphabet_size())) {
      const double lc = channel_log_likelihood(y, s, ch);
      if (lc == kNegInf) continue;
      Hypothesis h;
      h.log_channel = lc;
      h.log_score = lc + string_log_prior(s, lm);
      h.phonemes = std::move(s);
      cands.push_back(std::move(h));
    }
  }
  std::vector<double> scores;
  scores.reserve(cands.size());
  for (const auto& c : cands) scores.push_back(c.log_score);
  const double z = log_sum_exp(scores);
  for (auto& c : cands) c.log_score -= z;

  auto better = [](const Hypothesis& a, const Hypothesis& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return a.phonemes < b.phonemes;
  };
  const std::size_t keep = std::min(B, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), better);
  out.items.assign(std::make_move_iterator(cands.begin()),
                   std::make_move_iterator(cands.begin() + static_cast<std::ptrdiff_t>(keep)));
  const bool has_verbatim =
      std::any_of(out.items.begin(), out.items.end(), [&](const Hypothesis& h) { return h.phonemes == y; });
  if (!has_verbatim) {
    auto it = std::find_if(cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                           [&](const Hypothesis& h) { return h.phonemes == y; });
    if (it != cands.end()) {
      out.items.back() = *it;
      std::sort(out.items.begin(), out.items.end(), better);
    }
  }
  return out;
}

// Single-hypothesis list for an already-known string.
inline HypothesisList exact_hypothesis(const PhonemeSeq& s) {
  HypothesisList l;
  if (!s.empty()) l.items.push_back({s, 0.0, 0.0});
  return l;
}

}  // namespace spco::lexicon
