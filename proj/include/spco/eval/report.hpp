#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spco/concepts/theta.hpp"
#include "spco/core/error.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/record_io.hpp"
#include "spco/core/types.hpp"
#include "spco/eval/metrics.hpp"
#include "spco/lexicon/lexicon.hpp"
#include "spco/sim/environment.hpp"

namespace spco::eval {

struct TruthTeaching {
  int place = -1;
  int concept_id = -1;
  WordSequence words;
};

struct PlaceQuery {
  int place = -1;
  double x = 0.0, y = 0.0;
  Word name;
};

struct CellTruth {
  std::vector<TruthTeaching> teaching;
  std::vector<PlaceQuery> places;  // held-out queries at place centres
};

inline CellTruth truth_from_records(const std::vector<StepRecord>& records, const sim::Environment* env) {
  CellTruth t;
  for (const auto& r : records) {
    if (!r.teaching) continue;
    if (!r.truth || !r.truth->place || !r.truth->concept_id || !r.truth->words)
      throw Error("record " + std::to_string(r.t) + " lacks ground truth");
    t.teaching.push_back({*r.truth->place, *r.truth->concept_id, *r.truth->words});
  }
  if (env)
    for (const auto& p : env->places) t.places.push_back({p.id, p.cx, p.cy, env->names[p.concept_id]});
  return t;
}

inline nlohmann::json truth_to_json(const CellTruth& t, const PhonemeAlphabet& alphabet) {
  nlohmann::json j;
  j["teaching"] = nlohmann::json::array();
  for (const auto& s : t.teaching)
    j["teaching"].push_back({{"place", s.place}, {"concept", s.concept_id}, {"words", words_to_json(s.words, alphabet)}});
  j["places"] = nlohmann::json::array();
  for (const auto& p : t.places)
    j["places"].push_back({{"place", p.place}, {"center", {p.x, p.y}}, {"name", alphabet.render(p.name)}});
  return j;
}

inline CellTruth truth_from_json(const nlohmann::json& j, const PhonemeAlphabet& alphabet) {
  CellTruth t;
  for (const auto& s : j.at("teaching"))
    t.teaching.push_back({s.at("place").get<int>(), s.at("concept").get<int>(), words_from_json(s.at("words"), alphabet)});
  for (const auto& p : j.at("places"))
    t.places.push_back({p.at("place").get<int>(), p.at("center").at(0).get<double>(), p.at("center").at(1).get<double>(),
                        alphabet.parse(p.at("name").get<std::string>())});
  return t;
}

// Place queries from an environment sidecar written by the generator.
inline std::vector<PlaceQuery> places_from_env_json(const nlohmann::json& env, const PhonemeAlphabet& alphabet) {
  std::vector<PlaceQuery> out;
  for (const auto& p : env.at("places"))
    out.push_back({p.at("id").get<int>(), p.at("center").at(0).get<double>(), p.at("center").at(1).get<double>(),
                   alphabet.parse(p.at("name").get<std::string>())});
  return out;
}

struct CellEstimate {
  std::vector<Assignment> labels;
  int n_concepts = 0;
  int n_positions = 0;
  std::vector<WordSequence> sentences;
  concepts::ThetaSnapshot theta;
  lexicon::Lexicon lexicon;
};

struct Metrics {
  double ari_c = std::numeric_limits<double>::quiet_NaN();
  double ari_i = std::numeric_limits<double>::quiet_NaN();
  double ear_l = std::numeric_limits<double>::quiet_NaN();
  double ear_k = std::numeric_limits<double>::quiet_NaN();
  double par_sentence = std::numeric_limits<double>::quiet_NaN();
  double par_word = std::numeric_limits<double>::quiet_NaN();
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"ARI_C", "ARI_i", "EAR_L", "EAR_K", "PAR_sentence", "PAR_word"};
  return names;
}

inline std::vector<double> metric_values(const Metrics& m) {
  return {m.ari_c, m.ari_i, m.ear_l, m.ear_k, m.par_sentence, m.par_word};
}

// Clustering metrics over the first n teaching steps.
inline void clustering_metrics(const CellTruth& truth, const std::vector<Assignment>& labels, int n_concepts,
                               int n_positions, Metrics& m) {
  const std::size_t n = labels.size();
  if (n > truth.teaching.size()) throw Error("more estimated labels than teaching steps");
  std::vector<int> tc, tp, ec, ep;
  std::set<int> uc, up;
  for (std::size_t i = 0; i < n; ++i) {
    tc.push_back(truth.teaching[i].concept_id);
    tp.push_back(truth.teaching[i].place);
    ec.push_back(labels[i].concept_id);
    ep.push_back(labels[i].position);
    uc.insert(tc.back());
    up.insert(tp.back());
  }
  if (n >= 2) {
    m.ari_c = ari(tc, ec);
    m.ari_i = ari(tp, ep);
  }
  if (n >= 1) {
    m.ear_l = ear(static_cast<int>(uc.size()), n_concepts);
    m.ear_k = ear(static_cast<int>(up.size()), n_positions);
  }
}

inline double sentence_par(const WordSequence& correct, const WordSequence& hyp) {
  const PhonemeSeq c = with_delimiters(correct), h = with_delimiters(hyp);
  return par(c, h);
}

inline Metrics evaluate_cell(const CellTruth& truth, const CellEstimate& est) {
  Metrics m;
  clustering_metrics(truth, est.labels, est.n_concepts, est.n_positions, m);
  if (!est.sentences.empty()) {
    if (est.sentences.size() > truth.teaching.size()) throw Error("more sentences than teaching steps");
    double s = 0.0;
    for (std::size_t i = 0; i < est.sentences.size(); ++i) s += sentence_par(truth.teaching[i].words, est.sentences[i]);
    m.par_sentence = s / static_cast<double>(est.sentences.size());
  }
  if (!truth.places.empty()) {
    double s = 0.0;
    for (const auto& q : truth.places) {
      if (est.theta.concepts.empty() || est.lexicon.types() == 0) continue;  // nothing learned scores 0
      s += par(q.name, select_word(q.x, q.y, est.theta, est.lexicon));
    }
    m.par_word = s / static_cast<double>(truth.places.size());
  }
  return m;
}

// Mean of each metric over cells, ignoring undefined entries.
inline Metrics mean_metrics(const std::vector<Metrics>& cells) {
  Metrics out;
  std::vector<double*> fields = {&out.ari_c, &out.ari_i, &out.ear_l, &out.ear_k, &out.par_sentence, &out.par_word};
  for (std::size_t f = 0; f < fields.size(); ++f) {
    double s = 0.0;
    int n = 0;
    for (const auto& c : cells) {
      const double v = metric_values(c)[f];
      if (std::isnan(v)) continue;
      s += v;
      ++n;
    }
    if (n) *fields[f] = s / n;
  }
  return out;
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  const auto v = metric_values(m);
  for (std::size_t i = 0; i < v.size(); ++i) j[metric_names()[i]] = std::isnan(v[i]) ? nlohmann::json() : nlohmann::json(v[i]);
  return j;
}

inline std::string format_metric(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

// Markdown table, one row per label.
inline std::string comparison_table(const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::ostringstream os;
  os << "| variant |";
  for (const auto& n : metric_names()) os << ' ' << n << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < metric_names().size(); ++i) os << "---|";
  os << '\n';
  for (const auto& [label, m] : rows) {
    os << "| " << label << " |";
    for (double v : metric_values(m)) os << ' ' << format_metric(v) << " |";
    os << '\n';
  }
  return os.str();
}

}  // namespace spco::eval
