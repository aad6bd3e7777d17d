#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "spco/concepts/conditional.hpp"
#include "spco/concepts/predictive.hpp"
#include "spco/concepts/stats.hpp"
#include "spco/concepts/theta.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace spco;
using namespace spco::concepts;

namespace {

int distinct_words(const std::vector<ConceptDatum>& data) {
  std::set<Word> w;
  for (const auto& d : data) w.insert(d.words.begin(), d.words.end());
  return std::max<int>(1, static_cast<int>(w.size()));
}

// Draws assignments for the data sequentially from the conditional.
std::vector<Assignment> seat_all(PosteriorStats& H, const std::vector<ConceptDatum>& data, const Hyperparameters& h,
                                 int V, Rng& rng) {
  std::vector<Assignment> a;
  for (const auto& d : data) a.push_back(H.add(d, sample_assignment(joint_conditional_ic(H, d, h, V), rng)));
  return a;
}

using PartitionKey = std::vector<std::pair<int, int>>;

PartitionKey key(const std::vector<Assignment>& a) {
  PartitionKey k;
  for (const auto& x : oracle::canonical(a)) k.emplace_back(x.position, x.concept_id);
  return k;
}

}  // namespace

TEST(Stats, AddRemoveTracksRecount) {
  Rng rng = make_rng(21, {});
  const auto data = fixture::random_data(12, rng);
  const auto h = fixture::toy_hyper();
  PosteriorStats H;
  const auto a = seat_all(H, data, h, distinct_words(data), rng);
  std::vector<std::pair<ConceptDatum, Assignment>> items;
  for (std::size_t i = 0; i < data.size(); ++i) items.emplace_back(data[i], a[i]);
  EXPECT_EQ(oracle::compare(H, oracle::recount(items)), "");
  H.remove(data[3], a[3]);
  items.erase(items.begin() + 3);
  EXPECT_EQ(oracle::compare(H, oracle::recount(items)), "");
}

TEST(Stats, RemovalExactlyInvertsAddition) {
  Rng rng = make_rng(22, {});
  const auto data = fixture::random_data(6, rng);
  const auto h = fixture::toy_hyper();
  PosteriorStats H;
  seat_all(H, data, h, distinct_words(data), rng);
  const PosteriorStats before = H;
  const ConceptDatum extra(1.234567, -7.654321, data[0].feature, data[1].words);
  const Assignment got = H.add(extra, Assignment{});
  H.remove(extra, got);
  EXPECT_TRUE(H.same_statistics(before));
  EXPECT_FALSE(H == before);  // ids are never reused
}

TEST(Stats, IdsAreMonotonicAndExplicitIdsAreHonoured) {
  const ImageFeature f{{1, 1}};
  const ConceptDatum d(0, 0, f, {});
  PosteriorStats H;
  const Assignment a = H.add(d, {});
  H.remove(d, a);
  const Assignment b = H.add(d, {});
  EXPECT_GT(b.position, a.position);
  EXPECT_GT(b.concept_id, a.concept_id);
  const Assignment c = H.add(d, {17, 9});
  EXPECT_EQ(c, (Assignment{17, 9}));
  EXPECT_EQ(H.add(d, {}).position, 18);
}

TEST(Stats, CorruptOperationsThrow) {
  const ImageFeature f{{1, 1}};
  const ConceptDatum d(0, 0, f, {{1}});
  PosteriorStats H;
  const Assignment a = H.add(d, {});
  EXPECT_THROW(H.remove(d, {a.position, a.concept_id + 5}), CorruptionError);
  EXPECT_THROW(H.add(d, {a.position, Assignment::kNew}), CorruptionError);
  const ConceptDatum other(1, 0, f, {{2}});
  EXPECT_THROW(H.remove(other, a), CorruptionError);
  EXPECT_THROW(H.add(ConceptDatum(0, 0, ImageFeature{{1, 1, 1}}, {}), a), SpecError);
}

TEST(Stats, ReplaceWordsMatchesReAddingWithNewWords) {
  const ImageFeature f{{2, 0, 1}};
  PosteriorStats H, G;
  const ConceptDatum d(0.5, 0.25, f, {{1, 2}, {3}});
  const ConceptDatum d2(0.5, 0.25, f, {{1}, {2, 3}});
  const Assignment a = H.add(d, {});
  H.replace_words(a.concept_id, d.words, d2.words);
  G.add(d2, a);
  EXPECT_TRUE(H.same_statistics(G));
}

TEST(Predictive, NiwPosteriorMatchesBatchFormula) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(4, {});
  const auto data = fixture::random_data(7, rng);
  PosteriorStats H;
  for (const auto& d : data) H.add(d, {0, 0});
  const NiwPosterior post = niw_posterior(h, H.position(0));
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& d : data) mean += Eigen::Vector2d(d.x(), d.y());
  const double n = static_cast<double>(data.size());
  mean /= n;
  Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
  for (const auto& d : data) {
    const Eigen::Vector2d e = Eigen::Vector2d(d.x(), d.y()) - mean;
    S += e * e.transpose();
  }
  const Eigen::Vector2d m0(h.m0[0], h.m0[1]);
  Eigen::Matrix2d V0;
  V0 << h.V0[0][0], h.V0[0][1], h.V0[1][0], h.V0[1][1];
  const double kn = h.kappa0 + n;
  const Eigen::Matrix2d Vn = V0 + S + (h.kappa0 * n / kn) * (mean - m0) * (mean - m0).transpose();
  EXPECT_NEAR(post.kappa, kn, 1e-12);
  EXPECT_NEAR(post.nu, h.nu0 + n, 1e-12);
  EXPECT_LT((post.mean - (h.kappa0 * m0 + n * mean) / kn).norm(), 1e-9);
  EXPECT_LT((post.scale - Vn).norm(), 1e-9);
}

TEST(Predictive, PositionPredictiveIsRatioOfMarginals) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(5, {});
  const auto data = fixture::random_data(5, rng);
  PosteriorStats H;
  std::vector<Eigen::Vector2d> xs;
  for (std::size_t i = 0; i + 1 < data.size(); ++i) {
    H.add(data[i], {0, 0});
    xs.emplace_back(data[i].x(), data[i].y());
  }
  const auto& q = data.back();
  const double base = oracle::niw_log_marginal(h, xs);
  xs.emplace_back(q.x(), q.y());
  EXPECT_NEAR(predictive_position(h, H.position(0), q.x(), q.y()), oracle::niw_log_marginal(h, xs) - base, 1e-9);
  const std::vector<Eigen::Vector2d> one = {{q.x(), q.y()}};
  EXPECT_NEAR(predictive_position(h, nullptr, q.x(), q.y()), oracle::niw_log_marginal(h, one), 1e-9);
}

TEST(Predictive, CategoricalMatchesChainRule) {
  const std::vector<int> counts = {3, 0, 1}, obs = {1, 2, 0};
  // Sequence 0,1,1 after the prior counts {3,0,1}.
  std::vector<int> prefix = {0, 0, 0, 2}, full = {0, 0, 0, 2, 0, 1, 1};
  const double expect = oracle::polya_sequence(full, 0.5, 3) - oracle::polya_sequence(prefix, 0.5, 3);
  EXPECT_NEAR(predictive_categorical(counts, 0.5, obs), expect, 1e-12);
}

TEST(Predictive, WordPredictiveIsRatioOfClosedFormMarginals) {
  WordCounts c = {{{1}, 2}, {{2, 3}, 1}};
  const WordSequence obs = {{1}, {4}, {1}};
  WordCounts after = c;
  for (const auto& w : obs) ++after[w];
  const int V = 5;
  const double beta = 0.3;
  EXPECT_NEAR(predictive_words(&c, 3, beta, V, obs),
              log_polya_marginal(after, 6, beta, V) - log_polya_marginal(c, 3, beta, V), 1e-12);
  EXPECT_EQ(predictive_words(&c, 3, beta, V, {}), 0.0);
}

TEST(Conditional, OptionsFollowTheDocumentedOrder) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(6, {});
  const auto data = fixture::random_data(8, rng);
  PosteriorStats H;
  seat_all(H, data, h, distinct_words(data), rng);
  const auto pred = joint_conditional_ic(H, data[0], h, distinct_words(data));
  std::vector<Assignment> expect;
  for (const auto& [l, c] : H.concepts()) {
    for (int k : c.positions) expect.push_back({k, l});
    expect.push_back({Assignment::kNew, l});
  }
  expect.push_back({Assignment::kNew, Assignment::kNew});
  ASSERT_EQ(pred.options.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(pred.options[i].a, expect[i]);
  EXPECT_TRUE(is_probability_vector(pred.probabilities()));
}

TEST(Conditional, MatchesClosedFormJointOnEveryReachableState) {
  const auto h = fixture::toy_hyper();
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng = make_rng(100 + trial, {});
    const auto data = fixture::random_data(4, rng);
    const int V = distinct_words(data), D = static_cast<int>(data[0].feature.dimension());
    PosteriorStats H;
    auto a = seat_all(H, data, h, V, rng);
    const std::size_t i = trial % data.size();
    H.remove(data[i], a[i]);
    const auto pred = joint_conditional_ic(H, data[i], h, V);
    std::vector<double> logj;
    std::set<PartitionKey> produced;
    for (const auto& o : pred.options) {
      auto full = a;
      full[i] = {o.a.position == Assignment::kNew ? 1000 : o.a.position,
                 o.a.concept_id == Assignment::kNew ? 2000 : o.a.concept_id};
      logj.push_back(oracle::log_joint(data, full, h, V, D));
      produced.insert(key(full));
    }
    const auto p = normalize_log_weights(logj);
    for (std::size_t j = 0; j < p.size(); ++j) EXPECT_NEAR(pred.options[j].probability, p[j], 1e-9);
    // Every nested partition that agrees with the other data is offered once.
    std::set<PartitionKey> reachable;
    for (const auto& cand : oracle::nested_partitions(data.size())) {
      bool agrees = true;
      for (std::size_t j = 0; j < data.size() && agrees; ++j)
        for (std::size_t m = 0; m < data.size() && agrees; ++m) {
          if (j == i || m == i) continue;
          agrees = (cand[j].position == cand[m].position) == (a[j].position == a[m].position) &&
                   (cand[j].concept_id == cand[m].concept_id) == (a[j].concept_id == a[m].concept_id);
        }
      if (agrees) reachable.insert(key(cand));
    }
    EXPECT_EQ(produced, reachable);
    EXPECT_EQ(produced.size(), pred.options.size());
  }
}

TEST(Conditional, FeatureWeightIsMixtureOverConcepts) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(8, {});
  const auto data = fixture::random_data(9, rng);
  const int V = distinct_words(data);
  PosteriorStats H;
  seat_all(H, data, h, V, rng);
  const ConceptDatum q = fixture::random_data(1, rng).front();
  const auto w = concept_weights(H, q, h, V);
  const double N = H.total();
  std::vector<double> terms;
  auto feats_of = [](const ConceptStats* c, const ImageFeature& add) {
    std::vector<int> seq;
    if (c)
      for (std::size_t j = 0; j < c->features.size(); ++j)
        for (int k = 0; k < c->features[j]; ++k) seq.push_back(static_cast<int>(j));
    const std::size_t before = seq.size();
    for (std::size_t j = 0; j < add.counts.size(); ++j)
      for (int k = 0; k < add.counts[j]; ++k) seq.push_back(static_cast<int>(j));
    return std::make_pair(seq, before);
  };
  const int D = static_cast<int>(q.feature.dimension());
  for (const auto& [l, c] : H.concepts()) {
    auto [seq, before] = feats_of(&c, q.feature);
    const std::vector<int> prefix(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(before));
    terms.push_back(std::log(c.n / (N + h.alpha)) + oracle::polya_sequence(seq, h.chi, D) -
                    oracle::polya_sequence(prefix, h.chi, D));
  }
  auto [seq, before] = feats_of(nullptr, q.feature);
  terms.push_back(std::log(h.alpha / (N + h.alpha)) + oracle::polya_sequence(seq, h.chi, D));
  EXPECT_NEAR(w.omega_f, log_sum_exp(terms), 1e-9);
}

TEST(Conditional, WordWeightVanishesWithoutWords) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(9, {});
  const auto data = fixture::random_data(6, rng);
  PosteriorStats H;
  seat_all(H, data, h, distinct_words(data), rng);
  const ConceptDatum q(0.0, 0.0, data[0].feature, {});
  EXPECT_NEAR(concept_weights(H, q, h, 3).omega_s, 0.0, 1e-12);
}

TEST(Conditional, SelectionWeightIgnoresAnEmptyFrozenSet) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(10, {});
  const auto data = fixture::random_data(6, rng);
  const int V = distinct_words(data);
  PosteriorStats H;
  seat_all(H, data, h, V, rng);
  const PosteriorStats frozen;
  EXPECT_DOUBLE_EQ(selection_weight(H, &frozen, data[0], h, V), selection_weight(H, nullptr, data[0], h, V));
}

TEST(Conditional, FlrSweepKeepsStatisticsConsistent) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(12, {});
  const auto data = fixture::random_data(10, rng);
  const int V = distinct_words(data);
  PosteriorStats H;
  std::vector<WindowEntry> entries;
  for (const auto& d : data)
    entries.push_back({d, H.add(d, sample_assignment(joint_conditional_ic(H, d, h, V), rng))});
  std::vector<WindowEntry*> window;
  for (std::size_t i = 4; i < entries.size(); ++i) window.push_back(&entries[i]);
  std::size_t calls = 0;
  for (int s = 0; s < 5; ++s) flr_sweep(H, window, h, V, rng, [&](std::size_t, const ConceptPrediction&) { ++calls; });
  EXPECT_EQ(calls, 5 * window.size());
  std::vector<std::pair<ConceptDatum, Assignment>> items;
  for (const auto& e : entries) items.emplace_back(e.datum, e.a);
  EXPECT_EQ(oracle::compare(H, oracle::recount(items)), "");
}

TEST(Theta, EstimatesAreNormalizedAndRoundTrip) {
  const auto h = fixture::toy_hyper();
  Rng rng = make_rng(13, {});
  const auto data = fixture::random_data(8, rng);
  const int V = distinct_words(data);
  PosteriorStats H;
  seat_all(H, data, h, V, rng);
  const ThetaSnapshot s = estimate_theta(H, h, V, 4);
  double pi = s.new_concept;
  for (const auto& c : s.concepts) {
    pi += c.weight;
    double w = c.unseen_word * (V - static_cast<int>(c.words.size()));
    for (const auto& [word, p] : c.words) w += p;
    EXPECT_NEAR(w, 1.0, 1e-12);
    double f = 0.0;
    for (double v : c.features) f += v;
    EXPECT_NEAR(f, 1.0, 1e-12);
    double phi = c.new_position;
    for (const auto& [k, p] : c.positions) phi += p;
    EXPECT_NEAR(phi, 1.0, 1e-12);
  }
  EXPECT_NEAR(pi, 1.0, 1e-12);
  const auto& A = PhonemeAlphabet::syllables();
  const ThetaSnapshot back = theta_from_json(theta_to_json(s, A), A);
  ASSERT_EQ(back.concepts.size(), s.concepts.size());
  EXPECT_EQ(back.concepts[0].words, s.concepts[0].words);
  EXPECT_EQ(back.positions.size(), s.positions.size());
}
