#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spco/core/error.hpp"

namespace spco {

// Wraps into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::atan2(std::sin(a), std::cos(a));
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double heading_)
      : x(x_), y(y_), heading(normalize_angle(heading_)) {}

  bool operator==(const Pose&) const = default;
};

// Odometry increment in the rot1 / trans / rot2 decomposition.
struct ControlInput {
  double rot1 = 0.0;
  double trans = 0.0;
  double rot2 = 0.0;

  void validate() const {
    if (!(trans >= 0.0) || !std::isfinite(trans) || !std::isfinite(rot1) ||
        !std::isfinite(rot2))
      throw InvalidRecordError("control input: trans must be >= 0 and all fields finite");
  }
  bool operator==(const ControlInput&) const = default;
};

inline constexpr double kNoReturn = std::numeric_limits<double>::infinity();

struct RangeScan {
  std::vector<double> angles;  // relative to heading, strictly increasing
  std::vector<double> ranges;  // kNoReturn when the beam saw nothing
  double max_range = 0.0;

  static bool is_return(double r) { return std::isfinite(r); }

  void validate() const {
    if (angles.size() != ranges.size())
      throw InvalidRecordError("range scan: angles/ranges length mismatch");
    if (!(max_range > 0.0)) throw InvalidRecordError("range scan: max_range must be > 0");
    for (std::size_t i = 1; i < angles.size(); ++i)
      if (!(angles[i] > angles[i - 1]))
        throw InvalidRecordError("range scan: angles must be strictly increasing");
    for (double r : ranges)
      if (is_return(r) && !(r > 0.0 && r <= max_range))
        throw InvalidRecordError("range scan: range outside (0, max_range]");
  }
  bool operator==(const RangeScan&) const = default;
};

// Bag-of-visual-words histogram.
struct ImageFeature {
  std::vector<int> counts;

  int total() const {
    int n = 0;
    for (int c : counts) n += c;
    return n;
  }
  std::size_t dimension() const { return counts.size(); }

  void validate() const {
    for (int c : counts)
      if (c < 0) throw InvalidRecordError("image feature: negative count");
    if (total() <= 0) throw InvalidRecordError("image feature: total count must be > 0");
  }
  bool operator==(const ImageFeature&) const = default;
};

using Phoneme = std::uint8_t;
using PhonemeSeq = std::vector<Phoneme>;
using Word = PhonemeSeq;
using WordSequence = std::vector<Word>;

struct PhonemeSeqHash {
  std::size_t operator()(const PhonemeSeq& s) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (Phoneme p : s) {
      h ^= p;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h ^ s.size());
  }
};

inline PhonemeSeq concatenate(const WordSequence& words) {
  PhonemeSeq out;
  for (const auto& w : words) out.insert(out.end(), w.begin(), w.end());
  return out;
}

struct Hyperparameters {
  double alpha = 10.0;   // CRP concentration over spatial concepts
  double beta = 0.1;     // Dirichlet prior of the name distributions W_l
  double gamma = 1.0;    // CRP concentration over position distributions
  double chi = 0.1;      // Dirichlet prior of the image-feature distributions
  double lambda = 1.0;   // DP-unigram concentration of the language model
  double m0[2] = {0.0, 0.0};
  double kappa0 = 0.001;
  double V0[2][2] = {{2.0, 0.0}, {0.0, 2.0}};
  double nu0 = 3.0;

  void validate() const {
    for (double v : {alpha, beta, gamma, chi, lambda, kappa0})
      if (!(v > 0.0) || !std::isfinite(v))
        throw SpecError("hyperparameters: alpha, beta, gamma, chi, lambda, kappa0 must be > 0");
    if (!(nu0 > 1.0)) throw SpecError("hyperparameters: nu0 must exceed dimension - 1");
    const double det = V0[0][0] * V0[1][1] - V0[0][1] * V0[1][0];
    if (!(V0[0][0] > 0.0) || !(det > 0.0) || V0[0][1] != V0[1][0])
      throw SpecError("hyperparameters: V0 must be symmetric positive definite");
  }
};

// Cluster reference; kNew asks the statistics to allocate a fresh id.
struct Assignment {
  static constexpr int kNew = -1;
  int position = kNew;  // i: position-distribution index k
  int concept_id = kNew;   // C: spatial-concept index l

  bool operator==(const Assignment&) const = default;
};

struct TeachingPair {
  ImageFeature feature;
  PhonemeSeq phonemes;
  bool operator==(const TeachingPair&) const = default;
};

// Evaluation-only labels. The learner never reads these.
struct GroundTruth {
  std::optional<Pose> pose;
  std::optional<int> place;
  std::optional<int> concept_id;
  std::optional<WordSequence> words;
  bool operator==(const GroundTruth&) const = default;
};

struct StepRecord {
  std::size_t t = 0;
  ControlInput odom;
  RangeScan scan;
  std::optional<TeachingPair> teaching;
  std::optional<GroundTruth> truth;

  bool is_teaching() const { return teaching.has_value(); }

  void validate() const {
    odom.validate();
    scan.validate();
    if (teaching) {
      teaching->feature.validate();
      if (teaching->phonemes.empty())
        throw InvalidRecordError("teaching step with empty utterance");
    }
  }
  bool operator==(const StepRecord&) const = default;
};

}  // namespace spco
