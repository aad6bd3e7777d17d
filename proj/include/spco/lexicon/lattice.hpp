#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "spco/core/logmath.hpp"
#include "spco/core/types.hpp"
#include "spco/lexicon/lexicon.hpp"

namespace spco::lexicon {

// Unigram probabilities of every substring s[i, i+L) with L <= max length,
// scaled by K^L. Every segmentation of s covers all n symbols, so the
// scaling multiplies each path by the same K^n and keeps sums in range.
struct WordLattice {
  std::size_t n = 0;
  int max_len = 0;
  double log_scale = 0.0;  // log K
  std::vector<double> prob;  // prob[i * max_len + (L - 1)], 0 when out of range

  double at(std::size_t i, int L) const { return prob[i * static_cast<std::size_t>(max_len) + (L - 1)]; }
};

inline WordLattice build_lattice(const PhonemeSeq& s, const Lexicon& lex) {
  WordLattice lat;
  lat.n = s.size();
  lat.max_len = lex.params().max_word_length;
  const double K = static_cast<double>(lex.params().alphabet_size) / lex.params().p_len;
  lat.log_scale = std::log(K);
  lat.prob.assign(lat.n * static_cast<std::size_t>(lat.max_len), 0.0);
  const double denom = static_cast<double>(lex.total()) + lex.params().lambda;
  for (std::size_t i = 0; i < lat.n; ++i) {
    int node = lex.root();
    double scale = 1.0;
    const int top = static_cast<int>(std::min<std::size_t>(lat.max_len, lat.n - i));
    for (int L = 1; L <= top; ++L) {
      node = lex.child(node, s[i + L - 1]);
      scale *= K;
      const double p = (lex.node_count(node) + lex.params().lambda * lex.base(L)) / denom;
      lat.prob[i * lat.max_len + (L - 1)] = p * scale;
    }
  }
  return lat;
}

// alpha[j] = scaled total probability of all segmentations of s[0, j).
inline std::vector<double> forward_filter(const WordLattice& lat) {
  std::vector<double> alpha(lat.n + 1, 0.0);
  alpha[0] = 1.0;
  for (std::size_t j = 1; j <= lat.n; ++j) {
    double a = 0.0;
    const int top = static_cast<int>(std::min<std::size_t>(lat.max_len, j));
    for (int L = 1; L <= top; ++L) a += alpha[j - L] * lat.at(j - L, L);
    alpha[j] = a;
  }
  return alpha;
}

// Log-space fallback for strings whose scaled sums leave double range.
inline double forward_log_marginal_slow(const WordLattice& lat) {
  std::vector<double> la(lat.n + 1, kNegInf);
  la[0] = 0.0;
  for (std::size_t j = 1; j <= lat.n; ++j) {
    const int top = static_cast<int>(std::min<std::size_t>(lat.max_len, j));
    for (int L = 1; L <= top; ++L)
      la[j] = log_add(la[j], la[j - L] + std::log(lat.at(j - L, L)) - L * lat.log_scale);
  }
  return la[lat.n];
}

inline double log_marginal(const WordLattice& lat, const std::vector<double>& alpha) {
  const double a = alpha[lat.n];
  if (a > 0.0 && std::isfinite(a)) return std::log(a) - static_cast<double>(lat.n) * lat.log_scale;
  return forward_log_marginal_slow(lat);
}

// Log probability of s summed over all segmentations into words of at most
// the lexicon's maximum length.
inline double string_log_prior(const PhonemeSeq& s, const Lexicon& lex) {
  if (s.empty()) return 0.0;
  const WordLattice lat = build_lattice(s, lex);
  return log_marginal(lat, forward_filter(lat));
}

}  // namespace spco::lexicon
