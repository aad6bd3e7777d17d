#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spco/concepts/theta.hpp"
#include "spco/core/error.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/types.hpp"
#include "spco/lexicon/lexicon.hpp"

namespace spco::eval {

// Adjusted Rand index from pair counts, evaluated as one integer ratio.
inline double ari(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("ari: label vectors differ in length");
  if (a.size() < 2) throw Error("ari: need at least two items");
  using I = __int128;
  auto pairs = [](I n) { return n * (n - 1) / 2; };
  std::map<int, I> ca, cb;
  std::map<std::pair<int, int>, I> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++joint[{a[i], b[i]}];
  }
  I index = 0, sa = 0, sb = 0;
  for (const auto& [k, n] : joint) index += pairs(n);
  for (const auto& [k, n] : ca) sa += pairs(n);
  for (const auto& [k, n] : cb) sb += pairs(n);
  const I total = pairs(static_cast<I>(a.size()));
  const I num = 2 * (total * index - sa * sb);
  const I den = total * (sa + sb) - 2 * sa * sb;
  if (den == 0) return 1.0;  // both partitions trivial and identical
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

inline double ear(int n_correct, int n_estimated) {
  if (n_correct < 1) throw Error("ear: correct count must be >= 1");
  return std::max(1.0 - std::abs(n_correct - n_estimated) / static_cast<double>(n_correct), 0.0);
}

inline constexpr Phoneme kDelimiter = 255;  // outside every alphabet in use

inline PhonemeSeq with_delimiters(const WordSequence& words) {
  PhonemeSeq out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(kDelimiter);
    out.insert(out.end(), words[i].begin(), words[i].end());
  }
  return out;
}

inline std::size_t levenshtein(std::span<const Phoneme> a, std::span<const Phoneme> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double par(std::span<const Phoneme> correct, std::span<const Phoneme> hypothesis) {
  if (correct.empty()) throw Error("par: correct sequence is empty");
  const double ld = static_cast<double>(levenshtein(correct, hypothesis));
  return std::max(1.0 - ld / static_cast<double>(correct.size()), 0.0);
}

inline double gaussian_log_density(const Eigen::Vector2d& x, const Eigen::Vector2d& mean,
                                   const Eigen::Matrix2d& cov) {
  const Eigen::Vector2d d = x - mean;
  const double det = cov.determinant();
  if (!(det > 0)) return kNegInf;
  return -0.5 * d.dot(cov.inverse() * d) - std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
}

// Name posterior at a position, summed over learned concepts and their
// position distributions; ties go to the lexicographically smaller word.
inline Word select_word(double x, double y, const concepts::ThetaSnapshot& theta, const lexicon::Lexicon& lex) {
  if (theta.concepts.empty()) throw Error("select_word: no concepts learned");
  const auto entries = lex.entries();
  if (entries.empty()) throw Error("select_word: lexicon is empty");
  const Eigen::Vector2d q(x, y);
  std::vector<double> place_term;
  for (const auto& c : theta.concepts) {
    std::vector<double> terms;
    for (const auto& [k, phi] : c.positions) {
      const concepts::PositionEstimate* p = theta.position(k);
      if (p) terms.push_back(std::log(phi) + gaussian_log_density(q, p->mean, p->covariance));
    }
    place_term.push_back(std::log(c.weight) + log_sum_exp(terms));
  }
  const Word* best = nullptr;
  double best_score = kNegInf;
  for (const auto& [w, n] : entries) {
    std::vector<double> terms;
    for (std::size_t l = 0; l < theta.concepts.size(); ++l) {
      const auto& c = theta.concepts[l];
      auto it = c.words.find(w);
      terms.push_back(std::log(it == c.words.end() ? c.unseen_word : it->second) + place_term[l]);
    }
    const double score = log_sum_exp(terms);
    if (!best || score > best_score) {
      best_score = score;
      best = &w;
    }
  }
  return *best;
}

}  // namespace spco::eval
