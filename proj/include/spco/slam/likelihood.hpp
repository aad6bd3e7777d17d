#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "spco/core/logmath.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"
#include "spco/slam/grid.hpp"
#include "spco/slam/motion.hpp"

namespace spco::slam {

struct LikelihoodParams {
  double sigma_hit = 0.1;
  double w_hit = 0.9;
  double w_rand = 0.1;
};

inline double beam_log_likelihood(double d, double z_max, const LikelihoodParams& lp) {
  const double floor = lp.w_rand / z_max;
  if (!std::isfinite(d)) return std::log(floor);
  const double s = lp.sigma_hit;
  const double gauss = std::exp(-0.5 * d * d / (s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
  return std::log(lp.w_hit * gauss + floor);
}

// Likelihood-field model. No-return beams carry no endpoint and are skipped.
inline double measurement_likelihood(const RangeScan& z, const Pose& x, const OccupancyGrid& m,
                                     const LikelihoodParams& lp = {}) {
  double total = 0.0;
  for (std::size_t b = 0; b < z.ranges.size(); ++b) {
    const double r = z.ranges[b];
    if (!RangeScan::is_return(r)) continue;
    const double a = x.heading + z.angles[b];
    const double d = m.distance_to_occupied(x.x + r * std::cos(a), x.y + r * std::sin(a));
    total += beam_log_likelihood(d, z.max_range, lp);
  }
  return total;
}

struct ScanMatchParams {
  std::vector<double> linear_steps = {0.05, 0.025, 0.0125};
  std::vector<double> angular_steps = {0.02, 0.01, 0.005};
  int rounds = 3;
};

// Greedy coordinate ascent; only strict improvements are accepted, so the
// result never scores below x_init.
inline Pose scan_match(const RangeScan& z, const Pose& x_init, const OccupancyGrid& m,
                       const ScanMatchParams& sp = {}, const LikelihoodParams& lp = {}) {
  if (!m.field_has_sites()) return x_init;
  Pose best = x_init;
  double best_score = measurement_likelihood(z, best, m, lp);
  const std::size_t scales = std::min(sp.linear_steps.size(), sp.angular_steps.size());
  for (int round = 0; round < sp.rounds; ++round) {
    bool improved = false;
    for (std::size_t s = 0; s < scales; ++s) {
      const double dl = sp.linear_steps[s], da = sp.angular_steps[s];
      const Pose moves[6] = {{dl, 0, 0}, {-dl, 0, 0}, {0, dl, 0}, {0, -dl, 0}, {0, 0, da}, {0, 0, -da}};
      for (const Pose& mv : moves) {
        const Pose cand(best.x + mv.x, best.y + mv.y, best.heading + mv.heading);
        const double score = measurement_likelihood(z, cand, m, lp);
        if (score > best_score) {
          best = cand;
          best_score = score;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return best;
}

// log of the mean likelihood over J poses drawn from the motion model.
inline double slam_weight(const RangeScan& z, const Pose& x_prev, const ControlInput& u,
                          const OccupancyGrid& m, int J, const MotionNoise& noise, Rng& rng,
                          const LikelihoodParams& lp = {}) {
  if (J < 1) throw SpecError("slam_weight: J must be >= 1");
  std::vector<double> terms(static_cast<std::size_t>(J));
  for (auto& v : terms) v = measurement_likelihood(z, sample_motion_model(u, x_prev, noise, rng), m, lp);
  return log_sum_exp(terms) - std::log(static_cast<double>(J));
}

}  // namespace spco::slam
