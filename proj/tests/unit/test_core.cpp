#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "spco/core/channel.hpp"
#include "spco/core/logmath.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/random.hpp"
#include "spco/core/record_io.hpp"
#include "spco/core/resample.hpp"

using namespace spco;

TEST(LogMath, LogSumExpMatchesDirectSum) {
  const std::vector<double> xs = {-1.0, 0.5, 2.0};
  double s = 0.0;
  for (double x : xs) s += std::exp(x);
  EXPECT_NEAR(log_sum_exp(xs), std::log(s), 1e-12);
  EXPECT_EQ(log_sum_exp(std::vector<double>{kNegInf, kNegInf}), kNegInf);
  EXPECT_NEAR(log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-12);
}

TEST(LogMath, NormalizeIsShiftInvariantAndRejectsDegenerateInput) {
  const std::vector<double> a = {1.0, 2.0, 3.0}, b = {1001.0, 1002.0, 1003.0};
  const auto pa = normalize_log_weights(a), pb = normalize_log_weights(b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
  EXPECT_TRUE(is_probability_vector(pa));
  EXPECT_THROW(normalize_log_weights(std::vector<double>{kNegInf, kNegInf}), DegenerateWeightsError);
  EXPECT_THROW(normalize_log_weights(std::vector<double>{0.0, std::nan("")}), DegenerateWeightsError);
  EXPECT_THROW(normalize_log_weights(std::vector<double>{}), DegenerateWeightsError);
}

TEST(LogMath, ArgmaxTakesLowestIndexOnTies) {
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.5, 0.5}), 0u);
}

TEST(Random, KeyedStreamsAreReproducibleAndDistinct) {
  Rng a = make_rng(7, {1, 2}), b = make_rng(7, {1, 2}), c = make_rng(7, {2, 1});
  const auto x = a(), y = b(), z = c();
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
}

TEST(Resample, SystematicCountsStayWithinOneOfExpectation) {
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  Rng rng = make_rng(3, {});
  for (int trial = 0; trial < 100; ++trial) {
    const auto idx = systematic_resample(p, 10, rng);
    ASSERT_EQ(idx.size(), 10u);
    std::vector<int> n(4, 0);
    for (auto i : idx) ++n[i];
    for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(std::abs(n[k] - 10 * p[k]), 1.0 + 1e-9);
  }
}

TEST(Resample, PreservesWeightedMeanInExpectation) {
  const std::vector<double> w = normalize_log_weights(std::vector<double>{0.3, -1.2, 2.0, 0.0, 1.1, -0.4});
  const std::vector<double> stat = {1.5, -2.0, 0.7, 3.3, -0.1, 2.2};
  double target = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) target += w[i] * stat[i];
  const int trials = 1000;
  const std::size_t R = w.size();
  Rng rng = make_rng(11, {});
  std::vector<double> means;
  for (int t = 0; t < trials; ++t) {
    double m = 0.0;
    for (auto i : systematic_resample(w, R, rng)) m += stat[i];
    means.push_back(m / static_cast<double>(R));
  }
  const double avg = std::accumulate(means.begin(), means.end(), 0.0) / trials;
  double var = 0.0;
  for (double m : means) var += (m - avg) * (m - avg);
  var /= trials - 1;
  const double se = std::sqrt(var / trials);
  EXPECT_LE(std::abs(avg - target), 3.0 * se + 1e-12);
}

TEST(Resample, EffectiveSampleSize) {
  EXPECT_NEAR(effective_sample_size(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 4.0, 1e-12);
  EXPECT_NEAR(effective_sample_size(std::vector<double>{1.0, 0.0}), 1.0, 1e-12);
}

TEST(Phoneme, RenderParseRoundTrip) {
  const auto& A = PhonemeAlphabet::syllables();
  EXPECT_EQ(A.size(), 30u);
  const PhonemeSeq s = {0, 5, 29};
  EXPECT_EQ(A.parse(A.render(s)), s);
  EXPECT_THROW(A.parse("zz"), SpecError);
}

TEST(RecordIo, JsonRoundTripKeepsEveryField) {
  const auto& A = PhonemeAlphabet::syllables();
  StepRecord r;
  r.t = 4;
  r.odom = {0.1, 0.5, -0.2};
  r.scan.max_range = 8.0;
  r.scan.angles = {-1.0, 0.0, 1.0};
  r.scan.ranges = {2.5, kNoReturn, 7.0};
  r.teaching = TeachingPair{ImageFeature{{1, 0, 3}}, {2, 3, 4}};
  GroundTruth g;
  g.pose = Pose(1.0, 2.0, 0.5);
  g.place = 3;
  g.concept_id = 1;
  g.words = WordSequence{{2, 3}, {4}};
  r.truth = g;
  const StepRecord back = record_from_json(record_to_json(r, A), A);
  EXPECT_EQ(back, r);
}

TEST(RecordIo, MalformedRecordsAreRejected) {
  StepRecord r;
  r.scan.max_range = 8.0;
  r.scan.angles = {0.0, 1.0};
  r.scan.ranges = {1.0};
  EXPECT_THROW(r.validate(), InvalidRecordError);
  r.scan.ranges = {1.0, 9.0};
  EXPECT_THROW(r.validate(), InvalidRecordError);
  r.scan.ranges = {1.0, 2.0};
  r.teaching = TeachingPair{ImageFeature{{0, 0}}, {1}};
  EXPECT_THROW(r.validate(), InvalidRecordError);
}

TEST(Channel, ZeroRatesAreIdentity) {
  const ChannelModel ch = ChannelModel::uniform(30, 0.0, 0.0, 0.0);
  Rng rng = make_rng(1, {});
  const PhonemeSeq s = {1, 2, 3, 4, 5};
  EXPECT_EQ(apply_channel(s, ch, rng), s);
  EXPECT_DOUBLE_EQ(channel_log_likelihood(s, s, ch), 0.0);
}

TEST(Channel, FullDeletionEmptiesOutput) {
  const ChannelModel ch = ChannelModel::uniform(30, 0.0, 0.0, 1.0);
  ch.validate();
  Rng rng = make_rng(1, {});
  EXPECT_TRUE(apply_channel(PhonemeSeq{1, 2, 3}, ch, rng).empty());
}

TEST(Channel, EmpiricalSubstitutionRate) {
  const ChannelModel ch = ChannelModel::uniform(30, 0.1, 0.0, 0.0);
  Rng rng = make_rng(5, {});
  PhonemeSeq s(100000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<Phoneme>(i % 30);
  const PhonemeSeq out = apply_channel(s, ch, rng);
  ASSERT_EQ(out.size(), s.size());
  std::size_t changed = 0;
  for (std::size_t i = 0; i < s.size(); ++i) changed += out[i] != s[i];
  EXPECT_NEAR(static_cast<double>(changed) / s.size(), 0.1, 0.003);
}

// Enumerates every output of a short source over a 3-symbol alphabet by
// expanding each source symbol and each gap independently.
TEST(Channel, LikelihoodMatchesExhaustiveGenerativeEnumeration) {
  ChannelModel ch = ChannelModel::uniform(3, 0.2, 0.15, 0.1);
  ch.confusion = {{0.0, 0.7, 0.3}, {0.4, 0.0, 0.6}, {0.5, 0.5, 0.0}};
  const PhonemeSeq src = {0, 2, 1};
  std::map<PhonemeSeq, double> dist;
  std::function<void(std::size_t, PhonemeSeq, double)> expand = [&](std::size_t i, PhonemeSeq out, double p) {
    if (i == src.size()) {
      dist[out] += p;
      return;
    }
    std::vector<std::pair<std::vector<Phoneme>, double>> emit = {{{}, ch.del}};
    emit.push_back({{src[i]}, (1 - ch.del) * (1 - ch.sub)});
    for (Phoneme o = 0; o < 3; ++o)
      if (ch.confusion[src[i]][o] > 0) emit.push_back({{o}, (1 - ch.del) * ch.sub * ch.confusion[src[i]][o]});
    std::vector<std::pair<std::vector<Phoneme>, double>> gap = {{{}, 1.0}};
    if (i + 1 < src.size()) {
      gap = {{{}, 1 - ch.ins}};
      for (Phoneme o = 0; o < 3; ++o) gap.push_back({{o}, ch.ins / 3.0});
    }
    for (const auto& [e, pe] : emit)
      for (const auto& [g, pg] : gap) {
        PhonemeSeq next = out;
        next.insert(next.end(), e.begin(), e.end());
        next.insert(next.end(), g.begin(), g.end());
        expand(i + 1, next, p * pe * pg);
      }
  };
  expand(0, {}, 1.0);
  double total = 0.0;
  for (const auto& [out, p] : dist) {
    total += p;
    const double ll = channel_log_likelihood(out, src, ch);
    EXPECT_NEAR(std::exp(ll), p, 1e-12);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}
