#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spco/concepts/stats.hpp"
#include "spco/core/error.hpp"
#include "spco/core/types.hpp"

namespace spco::concepts {

struct NiwPosterior {
  double kappa = 0.0;
  double nu = 0.0;
  Eigen::Vector2d mean;
  Eigen::Matrix2d scale;  // V_n
};

inline NiwPosterior niw_posterior(const Hyperparameters& h, const PositionStats* k) {
  const Eigen::Vector2d m0(h.m0[0], h.m0[1]);
  Eigen::Matrix2d V0;
  V0 << h.V0[0][0], h.V0[0][1], h.V0[1][0], h.V0[1][1];
  NiwPosterior post;
  if (!k || k->n == 0) {
    post.kappa = h.kappa0;
    post.nu = h.nu0;
    post.mean = m0;
    post.scale = V0;
    return post;
  }
  const double n = k->n;
  const Eigen::Vector2d s(k->sum_x(), k->sum_y());
  Eigen::Matrix2d Q;
  Q << k->scatter_xx(), k->scatter_xy(), k->scatter_xy(), k->scatter_yy();
  post.kappa = h.kappa0 + n;
  post.nu = h.nu0 + n;
  post.mean = (h.kappa0 * m0 + s) / post.kappa;
  post.scale = V0 + Q + h.kappa0 * m0 * m0.transpose() - post.kappa * post.mean * post.mean.transpose();
  // Symmetrize against rounding in the outer products.
  post.scale(0, 1) = post.scale(1, 0) = 0.5 * (post.scale(0, 1) + post.scale(1, 0));
  return post;
}

// Bivariate Student-t log density.
inline double student_t_log_density(const Eigen::Vector2d& x, const Eigen::Vector2d& mu,
                                    const Eigen::Matrix2d& sigma, double dof) {
  constexpr double d = 2.0;
  const double det = sigma.determinant();
  if (!(det > 0.0)) throw CorruptionError("student_t: scale matrix not positive definite");
  const Eigen::Vector2d diff = x - mu;
  const double maha = diff.dot(sigma.inverse() * diff);
  return std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) - 0.5 * d * std::log(dof * std::numbers::pi) -
         0.5 * std::log(det) - 0.5 * (dof + d) * std::log1p(maha / dof);
}

// Posterior predictive of one position under the NIW posterior of
// distribution k (or the prior when k is null, i.e. NEW).
inline double predictive_position(const Hyperparameters& h, const PositionStats* k, double x, double y) {
  const NiwPosterior p = niw_posterior(h, k);
  const double dof = p.nu - 1.0;
  const Eigen::Matrix2d sigma = p.scale * ((p.kappa + 1.0) / (p.kappa * dof));
  return student_t_log_density(Eigen::Vector2d(x, y), p.mean, sigma, dof);
}

inline double predictive_position(const Hyperparameters& h, const PosteriorStats& H, int k, double x,
                                  double y) {
  return predictive_position(h, k == Assignment::kNew ? nullptr : H.position(k), x, y);
}

// Log of prod_{j<m} (a + j).
inline double log_rising(double a, int m) {
  double s = 0.0;
  for (int j = 0; j < m; ++j) s += std::log(a + j);
  return s;
}

// Pólya (Dirichlet-multinomial) log probability of one specific sequence
// whose symbol counts are `obs`, given prior counts and symmetric prior.
inline double predictive_categorical(std::span<const int> counts, double prior, std::span<const int> obs) {
  if (counts.size() != obs.size()) throw SpecError("predictive_categorical: dimension mismatch");
  if (!(prior > 0.0)) throw SpecError("predictive_categorical: prior must be > 0");
  double num = 0.0;
  int c_total = 0, o_total = 0;
  for (std::size_t v = 0; v < obs.size(); ++v) {
    c_total += counts[v];
    o_total += obs[v];
    if (obs[v] > 0) num += log_rising(counts[v] + prior, obs[v]);
  }
  const double V = static_cast<double>(obs.size());
  return num - log_rising(c_total + V * prior, o_total);
}

// Feature likelihood of concept counts (empty counts = NEW concept).
inline double predictive_feature(const ConceptStats* c, double chi, const ImageFeature& f) {
  const std::size_t D = f.dimension();
  double num = 0.0;
  const int total = c ? c->feature_total : 0;
  for (std::size_t j = 0; j < D; ++j) {
    const int o = f.counts[j];
    if (o > 0) num += log_rising((c ? c->features[j] : 0) + chi, o);
  }
  return num - log_rising(total + static_cast<double>(D) * chi, f.total());
}

// Pólya probability of a word sequence against sparse counts over a
// vocabulary of V word types.
inline double predictive_words(const WordCounts* counts, int counts_total, double beta, int V,
                               const WordSequence& words) {
  if (words.empty()) return 0.0;
  std::map<Word, int> obs;
  for (const auto& w : words) ++obs[w];
  double num = 0.0;
  for (const auto& [w, o] : obs) {
    int c = 0;
    if (counts) {
      auto it = counts->find(w);
      if (it != counts->end()) c = it->second;
    }
    num += log_rising(c + beta, o);
  }
  return num - log_rising(counts_total + V * beta, static_cast<int>(words.size()));
}

inline double predictive_words(const ConceptStats* c, double beta, int V, const WordSequence& words) {
  return c ? predictive_words(&c->words, c->word_total, beta, V, words)
           : predictive_words(nullptr, 0, beta, V, words);
}

// Closed-form log Pólya marginal of all data summarized by sparse counts,
// measured from an empty urn.
inline double log_polya_marginal(const WordCounts& counts, int total, double beta, int V) {
  double s = 0.0;
  for (const auto& [w, c] : counts) s += std::lgamma(c + beta) - std::lgamma(beta);
  return s - (std::lgamma(total + V * beta) - std::lgamma(V * beta));
}

}  // namespace spco::concepts
