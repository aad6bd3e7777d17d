#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "spco/core/channel.hpp"
#include "spco/core/error.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"
#include "spco/sim/environment.hpp"
#include "spco/slam/motion.hpp"

namespace spco::sim {

struct ScanSpec {
  int beams = 72;
  double max_range = 8.0;
  double sigma = 0.02;
};

struct FeatureSpec {
  int dimension = 20;
  int count = 50;
  double concentration = 0.5;  // symmetric Dirichlet of each place's distribution
};

struct ChannelSpec {
  double sub = 0.05;
  double ins = 0.01;
  double del = 0.01;
};

struct TrajectorySpec {
  int teaching_steps = 60;
  int teachings_per_visit = 2;
  double step_length = 0.5;
  int max_redraws = 100;  // utterances emptied by the channel are redrawn
};

struct DatasetSpec {
  EnvironmentSpec environment;
  TrajectorySpec trajectory;
  ScanSpec scan;
  FeatureSpec feature;
  ChannelSpec channel;
  slam::MotionNoise odometry_noise;
};

struct Dataset {
  Environment env;
  std::vector<StepRecord> records;
  std::vector<std::vector<double>> place_features;  // per-place visual-word distribution
};

inline std::vector<double> sample_dirichlet(std::size_t D, double a, Rng& rng) {
  std::gamma_distribution<double> g(a, 1.0);
  std::vector<double> p(D);
  double s = 0.0;
  for (auto& v : p) {
    v = g(rng);
    s += v;
  }
  if (!(s > 0.0)) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(D));
    return p;
  }
  for (auto& v : p) v /= s;
  return p;
}

inline ImageFeature sample_feature(const std::vector<double>& theta, int n, Rng& rng) {
  ImageFeature f;
  f.counts.assign(theta.size(), 0);
  for (int i = 0; i < n; ++i) ++f.counts[sample_categorical(theta, rng)];
  return f;
}

inline RangeScan simulate_scan(const Environment& env, const Pose& x, const ScanSpec& spec, Rng& rng) {
  RangeScan z;
  z.max_range = spec.max_range;
  std::normal_distribution<double> noise(0.0, spec.sigma);
  for (int b = 0; b < spec.beams; ++b) {
    const double a = -std::numbers::pi + 2.0 * std::numbers::pi * b / spec.beams;
    z.angles.push_back(a);
    const double r = ray_cast(env, x.x, x.y, x.heading + a);
    if (!(r <= spec.max_range)) {
      z.ranges.push_back(kNoReturn);
    } else {
      const double noisy = spec.sigma > 0 ? r + noise(rng) : r;
      z.ranges.push_back(std::clamp(noisy, 1e-3, spec.max_range));
    }
  }
  return z;
}

// Route between two points: via the door of the current room, along the
// corridor, and through the door of the target room.
inline std::vector<std::pair<double, double>> route(const Environment& env, double x0, double y0, double x1,
                                                    double y1) {
  std::vector<std::pair<double, double>> pts;
  const int from = env.room_of(x0, y0), to = env.room_of(x1, y1);
  if (env.corridor && from != to) {
    const double cy = env.corridor->cy();
    const double inside = env.corridor->y1 + 0.6;
    if (from >= 0) {
      pts.emplace_back(env.door_x[from], inside);
      pts.emplace_back(env.door_x[from], cy);
    }
    if (to >= 0) {
      pts.emplace_back(env.door_x[to], cy);
      pts.emplace_back(env.door_x[to], inside);
    }
  }
  pts.emplace_back(x1, y1);
  return pts;
}

inline ChannelModel make_channel(const ChannelSpec& c) {
  return ChannelModel::uniform(PhonemeAlphabet::syllables().size(), c.sub, c.ins, c.del);
}

inline Dataset generate_dataset(const Environment& env, const DatasetSpec& spec, Rng& rng) {
  const ChannelModel channel = make_channel(spec.channel);
  channel.validate();
  const TrajectorySpec& tr = spec.trajectory;
  if (tr.teaching_steps < 0 || tr.teachings_per_visit < 1 || !(tr.step_length > 0))
    throw SpecError("trajectory: invalid teaching counts or step length");
  for (const auto& p : env.places)
    if (env.room_of(p.cx, p.cy) < 0) throw SpecError("place " + std::to_string(p.id) + " is unreachable");

  Dataset ds;
  ds.env = env;
  for (std::size_t p = 0; p < env.places.size(); ++p)
    ds.place_features.push_back(sample_dirichlet(spec.feature.dimension, spec.feature.concentration, rng));

  // Teaching counts per place, then visits in shuffled rounds.
  const int P = static_cast<int>(env.places.size());
  std::vector<int> remaining(P, tr.teaching_steps / P);
  for (int i = 0; i < tr.teaching_steps % P; ++i) ++remaining[i];
  std::vector<int> visits;
  while (std::any_of(remaining.begin(), remaining.end(), [](int r) { return r > 0; })) {
    std::vector<int> round;
    for (int p = 0; p < P; ++p)
      if (remaining[p] > 0) round.push_back(p);
    std::shuffle(round.begin(), round.end(), rng);
    for (int p : round) {
      const int k = std::min(remaining[p], tr.teachings_per_visit);
      for (int i = 0; i < k; ++i) visits.push_back(p);
      remaining[p] -= k;
    }
  }

  Pose truth(0.0, 0.0, 0.0);
  std::size_t t = 0;
  std::normal_distribution<double> unit(0.0, 1.0);
  const slam::MotionNoise& on = spec.odometry_noise;

  auto emit = [&](double rot1, double trans, double rot2, std::optional<int> place) {
    truth = slam::apply_motion(truth, rot1, trans, rot2);
    StepRecord rec;
    rec.t = t++;
    const ControlInput u_true{rot1, trans, rot2};
    auto jitter = [&](double var) { return var > 0 ? std::sqrt(var) * unit(rng) : 0.0; };
    rec.odom.rot1 = rot1 + jitter(on.a1 * rot1 * rot1 + on.a2 * trans * trans);
    rec.odom.trans = std::max(0.0, trans + jitter(slam::trans_variance(u_true, on)));
    rec.odom.rot2 = rot2 + jitter(on.a1 * rot2 * rot2 + on.a2 * trans * trans);
    rec.scan = simulate_scan(env, truth, spec.scan, rng);
    GroundTruth gt;
    gt.pose = truth;
    if (place) {
      const Place& pl = env.places[*place];
      const Template& tp = env.templates[std::uniform_int_distribution<std::size_t>(0, env.templates.size() - 1)(rng)];
      WordSequence words;
      for (int tok : tp.tokens) words.push_back(tok == Template::kNameSlot ? env.names[pl.concept_id] : env.carriers[tok]);
      const PhonemeSeq clean = concatenate(words);
      PhonemeSeq heard;
      for (int attempt = 0; attempt <= tr.max_redraws && heard.empty(); ++attempt) heard = apply_channel(clean, channel, rng);
      if (heard.empty()) throw SpecError("channel emptied every redraw of an utterance");
      rec.teaching = TeachingPair{sample_feature(ds.place_features[*place], spec.feature.count, rng), heard};
      gt.place = pl.id;
      gt.concept_id = pl.concept_id;
      gt.words = words;
    }
    rec.truth = gt;
    ds.records.push_back(std::move(rec));
  };

  // The last leg of each route ends on the teaching step.
  for (std::size_t v = 0; v < visits.size(); ++v) {
    const Place& pl = env.places[visits[v]];
    const double rr = pl.radius * std::sqrt(uniform01(rng));
    const double th = 2.0 * std::numbers::pi * uniform01(rng);
    const double gx = pl.cx + rr * std::cos(th), gy = pl.cy + rr * std::sin(th);
    const auto pts = route(env, truth.x, truth.y, gx, gy);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const bool last = k + 1 == pts.size();
      while (true) {
        const double dx = pts[k].first - truth.x, dy = pts[k].second - truth.y;
        const double dist = std::hypot(dx, dy);
        const double rot1 = dist < 1e-9 ? 0.0 : normalize_angle(std::atan2(dy, dx) - truth.heading);
        if (dist <= tr.step_length) {
          if (last) {
            const double face = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
            emit(rot1, dist, normalize_angle(face - truth.heading - rot1), visits[v]);
          } else if (dist > 1e-9) {
            emit(rot1, dist, 0.0, std::nullopt);
          }
          break;
        }
        emit(rot1, tr.step_length, 0.0, std::nullopt);
      }
    }
  }
  return ds;
}

}  // namespace spco::sim
