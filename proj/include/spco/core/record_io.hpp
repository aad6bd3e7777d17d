#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spco/core/error.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/types.hpp"

namespace spco {

using Json = nlohmann::json;

inline Json pose_to_json(const Pose& p) { return Json::array({p.x, p.y, p.heading}); }

inline Pose pose_from_json(const Json& j) {
  Pose p;
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
  p.heading = j.at(2).get<double>();
  return p;
}

inline Json words_to_json(const WordSequence& words, const PhonemeAlphabet& alphabet) {
  Json arr = Json::array();
  for (const auto& w : words) arr.push_back(alphabet.render(w));
  return arr;
}

inline WordSequence words_from_json(const Json& j, const PhonemeAlphabet& alphabet) {
  WordSequence out;
  for (const auto& w : j) out.push_back(alphabet.parse(w.get<std::string>()));
  return out;
}

inline Json record_to_json(const StepRecord& r, const PhonemeAlphabet& alphabet) {
  Json j;
  j["t"] = r.t;
  j["odom"] = Json::array({r.odom.rot1, r.odom.trans, r.odom.rot2});
  Json ranges = Json::array();
  for (double v : r.scan.ranges) {
    if (RangeScan::is_return(v))
      ranges.push_back(v);
    else
      ranges.push_back(nullptr);
  }
  j["scan"] = {{"angles", r.scan.angles}, {"ranges", ranges}, {"max_range", r.scan.max_range}};
  if (r.teaching) {
    j["feature"] = r.teaching->feature.counts;
    j["phonemes"] = alphabet.render(r.teaching->phonemes);
  }
  if (r.truth) {
    Json t = Json::object();
    if (r.truth->pose) t["pose"] = pose_to_json(*r.truth->pose);
    if (r.truth->place) t["place"] = *r.truth->place;
    if (r.truth->concept_id) t["concept"] = *r.truth->concept_id;
    if (r.truth->words) t["words"] = words_to_json(*r.truth->words, alphabet);
    j["truth"] = std::move(t);
  }
  return j;
}

inline StepRecord record_from_json(const Json& j, const PhonemeAlphabet& alphabet) {
  try {
    StepRecord r;
    r.t = j.at("t").get<std::size_t>();
    const auto& o = j.at("odom");
    r.odom = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
    const auto& s = j.at("scan");
    r.scan.angles = s.at("angles").get<std::vector<double>>();
    for (const auto& v : s.at("ranges"))
      r.scan.ranges.push_back(v.is_null() ? kNoReturn : v.get<double>());
    r.scan.max_range = s.at("max_range").get<double>();
    const bool has_feature = j.contains("feature");
    const bool has_phonemes = j.contains("phonemes");
    if (has_feature != has_phonemes)
      throw InvalidRecordError("record " + std::to_string(r.t) +
                               ": feature and phonemes must appear together");
    if (has_feature) {
      TeachingPair tp;
      tp.feature.counts = j.at("feature").get<std::vector<int>>();
      tp.phonemes = alphabet.parse(j.at("phonemes").get<std::string>());
      r.teaching = std::move(tp);
    }
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      GroundTruth g;
      if (t.contains("pose")) g.pose = pose_from_json(t.at("pose"));
      if (t.contains("place")) g.place = t.at("place").get<int>();
      if (t.contains("concept")) g.concept_id = t.at("concept").get<int>();
      if (t.contains("words")) g.words = words_from_json(t.at("words"), alphabet);
      r.truth = std::move(g);
    }
    return r;
  } catch (const Json::exception& e) {
    throw InvalidRecordError(std::string("malformed step record: ") + e.what());
  }
}

inline void write_records(const std::string& path, const std::vector<StepRecord>& records,
                          const PhonemeAlphabet& alphabet) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& r : records) out << record_to_json(r, alphabet).dump() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<StepRecord> read_records(const std::string& path,
                                            const PhonemeAlphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<StepRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(record_from_json(j, alphabet));
  }
  return out;
}

}  // namespace spco
