#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "spco/concepts/predictive.hpp"
#include "spco/concepts/stats.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/types.hpp"

namespace spco::concepts {

struct PositionEstimate {
  int id = -1;
  int owner = -1;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
  bool covariance_is_mode = false;  // posterior mean undefined for nu_n <= d + 1
};

struct ConceptEstimate {
  int id = -1;
  double weight = 0.0;  // pi_l
  std::map<Word, double> words;
  double unseen_word = 0.0;  // W_l probability of each word not in `words`
  std::vector<double> features;
  std::map<int, double> positions;  // phi_l over owned k
  double new_position = 0.0;
};

struct ThetaSnapshot {
  std::vector<ConceptEstimate> concepts;
  std::vector<PositionEstimate> positions;
  double new_concept = 1.0;
  PositionEstimate prior_position;
  int vocabulary = 1;

  const PositionEstimate* position(int k) const {
    for (const auto& p : positions)
      if (p.id == k) return &p;
    return nullptr;
  }
};

inline PositionEstimate position_estimate(const Hyperparameters& h, const PositionStats* k, int id) {
  const NiwPosterior post = niw_posterior(h, k);
  constexpr double d = 2.0;
  PositionEstimate e;
  e.id = id;
  e.owner = k ? k->owner : -1;
  e.mean = post.mean;
  if (post.nu > d + 1.0) {
    e.covariance = post.scale / (post.nu - d - 1.0);
  } else {
    e.covariance = post.scale / (post.nu + d + 1.0);
    e.covariance_is_mode = true;
  }
  return e;
}

inline ThetaSnapshot estimate_theta(const PosteriorStats& H, const Hyperparameters& h, int V, std::size_t feature_dim) {
  ThetaSnapshot s;
  s.vocabulary = V;
  const double N = H.total();
  s.new_concept = h.alpha / (N + h.alpha);
  s.prior_position = position_estimate(h, nullptr, -1);
  const std::size_t D = H.feature_dimension() ? H.feature_dimension() : feature_dim;
  for (const auto& [l, c] : H.concepts()) {
    ConceptEstimate e;
    e.id = l;
    e.weight = c.n / (N + h.alpha);
    const double wden = c.word_total + V * h.beta;
    for (const auto& [w, n] : c.words) e.words[w] = (n + h.beta) / wden;
    e.unseen_word = h.beta / wden;
    const double fden = c.feature_total + static_cast<double>(D) * h.chi;
    e.features.resize(D);
    for (std::size_t j = 0; j < D; ++j) e.features[j] = ((j < c.features.size() ? c.features[j] : 0) + h.chi) / fden;
    for (int k : c.positions) e.positions[k] = H.position(k)->n / (c.n + h.gamma);
    e.new_position = h.gamma / (c.n + h.gamma);
    s.concepts.push_back(std::move(e));
  }
  for (const auto& [k, p] : H.positions()) s.positions.push_back(position_estimate(h, &p, k));
  return s;
}

inline nlohmann::json theta_to_json(const ThetaSnapshot& s, const PhonemeAlphabet& alphabet) {
  auto matrix = [](const Eigen::Matrix2d& m) {
    return nlohmann::json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
  };
  nlohmann::json j;
  j["new_concept"] = s.new_concept;
  j["vocabulary"] = s.vocabulary;
  j["concepts"] = nlohmann::json::array();
  for (const auto& c : s.concepts) {
    nlohmann::json cj;
    cj["id"] = c.id;
    cj["weight"] = c.weight;
    nlohmann::json words = nlohmann::json::object();
    for (const auto& [w, p] : c.words) words[alphabet.render(w)] = p;
    cj["words"] = words;
    cj["unseen_word"] = c.unseen_word;
    cj["features"] = c.features;
    nlohmann::json pos = nlohmann::json::object();
    for (const auto& [k, p] : c.positions) pos[std::to_string(k)] = p;
    cj["positions"] = pos;
    cj["new_position"] = c.new_position;
    j["concepts"].push_back(cj);
  }
  j["positions"] = nlohmann::json::array();
  for (const auto& p : s.positions) {
    j["positions"].push_back({{"id", p.id},
                              {"concept", p.owner},
                              {"mean", {p.mean.x(), p.mean.y()}},
                              {"covariance", matrix(p.covariance)},
                              {"covariance_is_mode", p.covariance_is_mode}});
  }
  return j;
}

inline ThetaSnapshot theta_from_json(const nlohmann::json& j, const PhonemeAlphabet& alphabet) {
  auto matrix = [](const nlohmann::json& m) {
    Eigen::Matrix2d out;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) out(r, c) = m.at(r).at(c).get<double>();
    return out;
  };
  ThetaSnapshot s;
  s.new_concept = j.value("new_concept", 1.0);
  s.vocabulary = j.value("vocabulary", 1);
  for (const auto& cj : j.at("concepts")) {
    ConceptEstimate c;
    c.id = cj.at("id").get<int>();
    c.weight = cj.at("weight").get<double>();
    for (auto it = cj.at("words").begin(); it != cj.at("words").end(); ++it)
      c.words[alphabet.parse(it.key())] = it.value().get<double>();
    c.unseen_word = cj.at("unseen_word").get<double>();
    c.features = cj.at("features").get<std::vector<double>>();
    for (auto it = cj.at("positions").begin(); it != cj.at("positions").end(); ++it)
      c.positions[std::stoi(it.key())] = it.value().get<double>();
    c.new_position = cj.at("new_position").get<double>();
    s.concepts.push_back(std::move(c));
  }
  for (const auto& pj : j.at("positions")) {
    PositionEstimate p;
    p.id = pj.at("id").get<int>();
    p.owner = pj.at("concept").get<int>();
    p.mean = Eigen::Vector2d(pj.at("mean").at(0).get<double>(), pj.at("mean").at(1).get<double>());
    p.covariance = matrix(pj.at("covariance"));
    p.covariance_is_mode = pj.at("covariance_is_mode").get<bool>();
    s.positions.push_back(p);
  }
  return s;
}

}  // namespace spco::concepts
