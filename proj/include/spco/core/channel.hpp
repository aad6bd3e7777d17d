#pragma once

#include <cmath>
#include <vector>

#include "spco/core/error.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"

namespace spco {

// Phoneme noise channel. Each source symbol is deleted with rate `del`,
// otherwise substituted with rate `sub` (target drawn from its confusion
// row) or kept. Between consecutive source symbols one uniform random
// symbol is inserted with rate `ins`.
struct ChannelModel {
  double sub = 0.0;
  double ins = 0.0;
  double del = 0.0;
  std::vector<std::vector<double>> confusion;  // rows over targets, zero diagonal

  std::size_t alphabet_size() const { return confusion.size(); }

  static ChannelModel uniform(std::size_t A, double sub, double ins, double del) {
    ChannelModel c;
    c.sub = sub;
    c.ins = ins;
    c.del = del;
    c.confusion.assign(A, std::vector<double>(A, A > 1 ? 1.0 / static_cast<double>(A - 1) : 0.0));
    for (std::size_t i = 0; i < A; ++i) c.confusion[i][i] = 0.0;
    return c;
  }

  bool noiseless() const { return sub == 0.0 && ins == 0.0 && del == 0.0; }

  // Deletion rate 1 is allowed: it is the degenerate case the simulator redraws.
  void validate() const {
    if (confusion.empty()) throw SpecError("channel: empty confusion matrix");
    for (double r : {sub, ins})
      if (!(r >= 0.0 && r < 1.0)) throw SpecError("channel: rates must lie in [0, 1)");
    if (!(del >= 0.0 && del <= 1.0)) throw SpecError("channel: deletion rate must lie in [0, 1]");
    const std::size_t A = confusion.size();
    for (std::size_t i = 0; i < A; ++i) {
      if (confusion[i].size() != A) throw SpecError("channel: confusion matrix must be square");
      if (A > 1 && !is_probability_vector(confusion[i], 1e-9))
        throw SpecError("channel: confusion rows must sum to 1");
    }
  }
};

inline PhonemeSeq apply_channel(const PhonemeSeq& source, const ChannelModel& ch, Rng& rng) {
  PhonemeSeq out;
  out.reserve(source.size() + 2);
  const std::size_t A = ch.alphabet_size();
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (uniform01(rng) >= ch.del) {
      if (uniform01(rng) < ch.sub && A > 1)
        out.push_back(static_cast<Phoneme>(sample_categorical(ch.confusion[source[i]], rng)));
      else
        out.push_back(source[i]);
    }
    if (i + 1 < source.size() && uniform01(rng) < ch.ins)
      out.push_back(static_cast<Phoneme>(std::uniform_int_distribution<std::size_t>(0, A - 1)(rng)));
  }
  return out;
}

// Exact log P(observed | source) summing over all alignments.
inline double channel_log_likelihood(const PhonemeSeq& observed, const PhonemeSeq& source, const ChannelModel& ch) {
  const std::size_t n = source.size(), m = observed.size();
  if (n == 0) return m == 0 ? 0.0 : kNegInf;
  const double A = static_cast<double>(ch.alphabet_size());
  // f[j]: probability of having emitted observed[0..j) after the current prefix of source.
  std::vector<double> f(m + 1, 0.0), g(m + 1, 0.0);
  f[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Phoneme s = source[i];
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t j = 0; j <= m; ++j) {
      if (f[j] == 0.0) continue;
      g[j] += f[j] * ch.del;
      if (j < m) {
        const Phoneme o = observed[j];
        const double emit = o == s ? 1.0 - ch.sub : ch.sub * ch.confusion[s][o];
        g[j + 1] += f[j] * (1.0 - ch.del) * emit;
      }
    }
    if (i + 1 < n) {
      std::fill(f.begin(), f.end(), 0.0);
      for (std::size_t j = 0; j <= m; ++j) {
        if (g[j] == 0.0) continue;
        f[j] += g[j] * (1.0 - ch.ins);
        if (j < m) f[j + 1] += g[j] * ch.ins / A;
      }
    } else {
      f.swap(g);
    }
  }
  return f[m] > 0.0 ? std::log(f[m]) : kNegInf;
}

}  // namespace spco
