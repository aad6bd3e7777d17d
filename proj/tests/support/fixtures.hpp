#pragma once

#include <random>
#include <vector>

#include "spco/concepts/stats.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"

namespace fixture {

using spco::Rng;

// Data clustered around a few centres with small vocabularies, so that the
// statistics exercise shared words and features.
inline std::vector<spco::concepts::ConceptDatum> random_data(std::size_t n, Rng& rng, std::size_t feature_dim = 4,
                                                             int vocab = 3) {
  std::normal_distribution<double> jitter(0.0, 0.4);
  std::uniform_int_distribution<int> centre(0, 2), word(0, vocab - 1), count(0, 3), nwords(0, 3);
  const double cx[3] = {-2.0, 0.5, 3.0}, cy[3] = {1.0, -1.5, 2.0};
  std::vector<spco::concepts::ConceptDatum> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = centre(rng);
    spco::ImageFeature f;
    f.counts.resize(feature_dim);
    for (auto& v : f.counts) v = count(rng);
    f.counts[static_cast<std::size_t>(c) % feature_dim] += 2;
    spco::WordSequence w;
    const int m = nwords(rng);
    for (int j = 0; j < m; ++j) w.push_back(spco::Word{static_cast<spco::Phoneme>(word(rng)), static_cast<spco::Phoneme>(c)});
    out.emplace_back(cx[c] + jitter(rng), cy[c] + jitter(rng), f, w);
  }
  return out;
}

inline spco::Hyperparameters toy_hyper() {
  spco::Hyperparameters h;
  h.alpha = 1.3;
  h.gamma = 0.7;
  h.beta = 0.4;
  h.chi = 0.6;
  h.kappa0 = 0.2;
  h.nu0 = 4.0;
  h.V0[0][0] = 1.5;
  h.V0[1][1] = 0.8;
  h.V0[0][1] = h.V0[1][0] = 0.2;
  h.m0[0] = 0.3;
  h.m0[1] = -0.2;
  return h;
}

}  // namespace fixture
