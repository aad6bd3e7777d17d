#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "spco/eval/gibbs_oracle.hpp"
#include "spco/eval/metrics.hpp"
#include "spco/eval/report.hpp"
#include "spco/eval/scalability.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace spco;
using namespace spco::eval;

TEST(Metrics, AriMatchesPairCountingOracle) {
  Rng rng = make_rng(31, {});
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 15), ka = 1 + static_cast<int>(rng() % 5), kb = 1 + static_cast<int>(rng() % 5);
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % ka);
      b[i] = static_cast<int>(rng() % kb) * 7;
    }
    ASSERT_NEAR(ari(a, b), oracle::ari(a, b), 1e-12) << trial;
  }
}

TEST(Metrics, AriKnownValues) {
  const std::vector<int> a = {0, 0, 1, 1}, b = {0, 0, 1, 2}, c = {5, 5, 3, 3};
  EXPECT_NEAR(ari(a, b), 4.0 / 7.0, 1e-12);
  EXPECT_EQ(ari(a, c), 1.0);
  const std::vector<int> one = {1, 1, 1}, same = {4, 4, 4};
  EXPECT_EQ(ari(one, same), 1.0);
}

TEST(Metrics, EstimationAccuracyRate) {
  EXPECT_NEAR(ear(3, 4), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(ear(3, 3), 1.0);
  EXPECT_EQ(ear(3, 7), 0.0);
  EXPECT_THROW(ear(0, 1), Error);
}

TEST(Metrics, PhonemeAccuracyRate) {
  const PhonemeSeq kitten = {10, 8, 19, 19, 4, 13}, sitting = {18, 8, 19, 19, 8, 13, 6};
  EXPECT_EQ(levenshtein(kitten, sitting), 3u);
  EXPECT_NEAR(par(kitten, sitting), 0.5, 1e-12);
  EXPECT_EQ(par(kitten, PhonemeSeq(20, 1)), 0.0);
  Rng rng = make_rng(2, {});
  for (int trial = 0; trial < 1000; ++trial) {
    PhonemeSeq x(rng() % 8), y(rng() % 8);
    for (auto& p : x) p = static_cast<Phoneme>(rng() % 3);
    for (auto& p : y) p = static_cast<Phoneme>(rng() % 3);
    ASSERT_EQ(levenshtein(x, y), oracle::edit_distance(x, y));
  }
  EXPECT_EQ(with_delimiters({{1, 2}, {3}}), (PhonemeSeq{1, 2, kDelimiter, 3}));
  EXPECT_NEAR(sentence_par({{1, 2}, {3}}, {{1, 2, 3}}), 0.75, 1e-12);
}

TEST(Metrics, SelectWordPicksTheLocalName) {
  concepts::ThetaSnapshot theta;
  for (int k = 0; k < 2; ++k) {
    concepts::PositionEstimate p;
    p.id = k;
    p.mean = Eigen::Vector2d(k == 0 ? -3.0 : 3.0, 0.0);
    p.covariance = 0.25 * Eigen::Matrix2d::Identity();
    theta.positions.push_back(p);
    concepts::ConceptEstimate c;
    c.id = k;
    c.weight = 0.45;
    c.words[Word{static_cast<Phoneme>(k + 1)}] = 0.9;
    c.unseen_word = 0.05;
    c.positions[k] = 0.9;
    theta.concepts.push_back(c);
  }
  lexicon::Lexicon lex;
  lex.add({1});
  lex.add({2});
  lex.add({3});
  EXPECT_EQ(select_word(-3.0, 0.1, theta, lex), (Word{1}));
  EXPECT_EQ(select_word(2.5, -0.2, theta, lex), (Word{2}));
  // Equidistant: both names tie and the smaller word wins.
  EXPECT_EQ(select_word(0.0, 0.0, theta, lex), (Word{1}));
  // Far from every position the log-space scores stay comparable.
  EXPECT_EQ(select_word(400.0, 0.0, theta, lex), (Word{2}));
  EXPECT_THROW(select_word(0, 0, concepts::ThetaSnapshot{}, lex), Error);
}

TEST(Gibbs, ZeroSweepsIsThePriorDraw) {
  Rng rng = make_rng(3, {});
  const auto data = fixture::random_data(7, rng);
  const auto h = fixture::toy_hyper();
  int calls = 0;
  const auto r = batch_gibbs_oracle(data, h, 3, 0, rng, [&](int, std::size_t, const auto&, const auto&) { ++calls; });
  EXPECT_EQ(calls, 0);
  ASSERT_EQ(r.assignments.size(), data.size());
  std::vector<std::pair<concepts::ConceptDatum, Assignment>> items;
  for (std::size_t i = 0; i < data.size(); ++i) items.emplace_back(data[i], r.assignments[i]);
  EXPECT_EQ(oracle::compare(r.stats, oracle::recount(items)), "");
  const auto g = batch_gibbs_oracle(data, h, 3, 4, rng, [&](int, std::size_t, const auto&, const auto&) { ++calls; });
  EXPECT_EQ(calls, 28);
}

TEST(Scalability, SlopeOfAnExactLine) {
  const std::vector<double> x = {0, 1, 2, 3, 4}, y = {1, 3, 5, 7, 9};
  const SlopeFit f = fit_slope(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.ci_low, 2.0, 1e-9);
  EXPECT_TRUE(f.strictly_positive());
  const std::vector<double> flat(5, 3.0);
  const SlopeFit c = fit_slope(x, flat);
  EXPECT_TRUE(c.ci_contains_zero());
  EXPECT_EQ(c.ci_low, 0.0);
}

TEST(Scalability, ConfidenceIntervalMatchesTextbookExample) {
  const std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 4, 5, 4, 5};
  const SlopeFit f = fit_slope(x, y);
  EXPECT_NEAR(f.slope, 0.6, 1e-12);
  EXPECT_NEAR(f.intercept, 2.2, 1e-12);
  EXPECT_NEAR(f.stderr_slope, std::sqrt(0.08), 1e-12);
  const double t = 3.182446305284263;  // Student t, 3 dof, 97.5%
  EXPECT_NEAR(f.ci_low, 0.6 - t * std::sqrt(0.08), 1e-9);
  EXPECT_NEAR(f.ci_high, 0.6 + t * std::sqrt(0.08), 1e-9);
  EXPECT_TRUE(f.ci_contains_zero());  // 0.6 +- 0.90
  EXPECT_THROW(fit_slope(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(scalability_report({TimingSeries{"short", {1, 2, 3}, {1, 2, 3}}}), Error);
}

TEST(Report, PerfectEstimateScoresOne) {
  CellTruth truth;
  const WordSequence s1 = {{1, 2}, {3, 4, 5}}, s2 = {{6}, {3, 4, 5}};
  truth.teaching = {{0, 0, s1}, {0, 0, s1}, {1, 1, s2}, {2, 1, s2}};
  CellEstimate est;
  est.labels = {{10, 3}, {10, 3}, {11, 4}, {12, 4}};
  est.n_concepts = 2;
  est.n_positions = 3;
  est.sentences = {s1, s1, s2, s2};
  const Metrics m = evaluate_cell(truth, est);
  EXPECT_EQ(m.ari_c, 1.0);
  EXPECT_EQ(m.ari_i, 1.0);
  EXPECT_EQ(m.ear_l, 1.0);
  EXPECT_EQ(m.ear_k, 1.0);
  EXPECT_EQ(m.par_sentence, 1.0);
  EXPECT_TRUE(std::isnan(m.par_word));
  truth.places = {{0, 0.0, 0.0, {1, 2}}};
  EXPECT_EQ(evaluate_cell(truth, est).par_word, 0.0);  // nothing learned to name it
}

TEST(Report, MeanIgnoresUndefinedCells) {
  Metrics a, b;
  a.ari_c = 0.5;
  b.ari_c = 1.0;
  a.par_word = 0.2;
  const Metrics m = mean_metrics({a, b});
  EXPECT_NEAR(m.ari_c, 0.75, 1e-12);
  EXPECT_NEAR(m.par_word, 0.2, 1e-12);
  EXPECT_TRUE(std::isnan(m.ari_i));
  EXPECT_EQ(format_metric(m.ari_i), "-");
  EXPECT_EQ(format_metric(0.12345), "0.123");
}
