#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "spco/core/error.hpp"
#include "spco/core/random.hpp"

namespace spco {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Probabilities proportional to exp(weights). Shift invariant.
inline std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw DegenerateWeightsError("normalize_log_weights: empty input");
  double m = kNegInf;
  for (double w : log_weights) {
    if (std::isnan(w)) throw DegenerateWeightsError("normalize_log_weights: NaN weight");
    m = std::max(m, w);
  }
  if (!std::isfinite(m))
    throw DegenerateWeightsError("normalize_log_weights: no finite weight");
  std::vector<double> p(log_weights.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(log_weights[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

// Shared check for every probability vector the library produces.
inline bool is_probability_vector(std::span<const double> p, double tol = 1e-9) {
  if (p.empty()) return false;
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

inline void assert_probability_vector(std::span<const double> p, const char* what,
                                      double tol = 1e-9) {
  if (!is_probability_vector(p, tol))
    throw CorruptionError(std::string(what) + ": not a probability vector");
}

// First index of the maximum.
template <typename Range>
std::size_t argmax_lowest(const Range& xs) {
  std::size_t best = 0;
  std::size_t i = 0;
  bool first = true;
  for (const auto& x : xs) {
    if (first || x > xs[best]) {
      best = i;
      first = false;
    }
    ++i;
  }
  return best;
}

inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return i;
  }
  // Rounding left a sliver past the last bin; return the last nonzero one.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

inline std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  const auto p = normalize_log_weights(log_weights);
  return sample_categorical(p, rng);
}

}  // namespace spco
