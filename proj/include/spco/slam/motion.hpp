#pragma once

#include <cmath>
#include <random>

#include "spco/core/error.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"

namespace spco::slam {

// Odometry-model noise coefficients (variance form):
//   var(rot1) = a1 rot1^2 + a2 trans^2
//   var(trans) = a3 trans^2 + a4 (rot1^2 + rot2^2)
//   var(rot2) = a1 rot2^2 + a2 trans^2
struct MotionNoise {
  double a1 = 0.01;
  double a2 = 0.0005;
  double a3 = 0.005;
  double a4 = 0.0005;

  void validate() const {
    if (a1 < 0 || a2 < 0 || a3 < 0 || a4 < 0) throw SpecError("motion noise coefficients must be >= 0");
  }
};

inline Pose apply_motion(const Pose& p, double rot1, double trans, double rot2) {
  const double h = p.heading + rot1;
  return Pose(p.x + trans * std::cos(h), p.y + trans * std::sin(h), h + rot2);
}

inline Pose apply_motion(const Pose& p, const ControlInput& u) {
  return apply_motion(p, u.rot1, u.trans, u.rot2);
}

inline double trans_variance(const ControlInput& u, const MotionNoise& n) {
  return n.a3 * u.trans * u.trans + n.a4 * (u.rot1 * u.rot1 + u.rot2 * u.rot2);
}

inline Pose sample_motion_model(const ControlInput& u, const Pose& prev, const MotionNoise& noise,
                                Rng& rng) {
  auto draw = [&rng](double variance) {
    if (variance <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, std::sqrt(variance))(rng);
  };
  const double rot1 = u.rot1 - draw(noise.a1 * u.rot1 * u.rot1 + noise.a2 * u.trans * u.trans);
  const double trans = u.trans - draw(trans_variance(u, noise));
  const double rot2 = u.rot2 - draw(noise.a1 * u.rot2 * u.rot2 + noise.a2 * u.trans * u.trans);
  return apply_motion(prev, rot1, trans, rot2);
}

}  // namespace spco::slam
