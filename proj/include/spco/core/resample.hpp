#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spco/core/error.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"

namespace spco {

// Low-variance resampling: one uniform offset, R evenly spaced pointers.
// Index i is drawn floor(R p_i) or ceil(R p_i) times.
inline std::vector<std::size_t> systematic_resample(std::span<const double> probs, std::size_t R,
                                                    Rng& rng) {
  if (probs.empty()) throw Error("systematic_resample: empty probability vector");
  if (R == 0) throw Error("systematic_resample: R must be >= 1");
  std::vector<std::size_t> out;
  out.reserve(R);
  const double step = 1.0 / static_cast<double>(R);
  const double u0 = uniform01(rng) * step;
  std::size_t i = 0;
  double cum = probs[0];
  for (std::size_t j = 0; j < R; ++j) {
    const double u = u0 + static_cast<double>(j) * step;
    while (u >= cum && i + 1 < probs.size()) cum += probs[++i];
    out.push_back(i);
  }
  return out;
}

inline double effective_sample_size(std::span<const double> probs) {
  double s = 0.0;
  for (double p : probs) s += p * p;
  return 1.0 / s;
}

}  // namespace spco
