#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "spco/concepts/conditional.hpp"
#include "spco/concepts/stats.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"

namespace spco::eval {

struct GibbsOracleResult {
  std::vector<Assignment> assignments;
  concepts::PosteriorStats stats;
};

// Called with (sweep, datum index, conditional table, current assignments).
using GibbsTrace = std::function<void(int, std::size_t, const concepts::ConceptPrediction&,
                                      const std::vector<Assignment>&)>;

// Collapsed Gibbs over (i, C) for a small batch. Initialization draws each
// datum in turn from the nested CRP prior alone.
inline GibbsOracleResult batch_gibbs_oracle(const std::vector<concepts::ConceptDatum>& data, const Hyperparameters& h,
                                            int V, int sweeps, Rng& rng, const GibbsTrace& trace = {}) {
  GibbsOracleResult r;
  r.assignments.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const concepts::ConceptPrediction pred = concepts::joint_conditional_ic(r.stats, data[i], h, V);
    std::vector<double> prior;
    for (const auto& o : pred.options) prior.push_back(o.log_prior);
    r.assignments[i] = r.stats.add(data[i], pred.options[sample_log_categorical(prior, rng)].a);
  }
  for (int g = 0; g < sweeps; ++g) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      r.stats.remove(data[i], r.assignments[i]);
      const concepts::ConceptPrediction pred = concepts::joint_conditional_ic(r.stats, data[i], h, V);
      if (trace) trace(g, i, pred, r.assignments);
      r.assignments[i] = r.stats.add(data[i], concepts::sample_assignment(pred, rng));
    }
  }
  return r;
}

}  // namespace spco::eval
