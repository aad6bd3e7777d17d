#pragma once

#include <json.hpp>

#include "spco/sim/dataset.hpp"
#include "spco/sim/environment.hpp"

namespace spco::sim {

inline EnvironmentSpec environment_spec_from_json(const nlohmann::json& j) {
  EnvironmentSpec s;
  s.room_count = j.value("room_count", s.room_count);
  s.room_width = j.value("room_width", s.room_width);
  s.room_depth = j.value("room_depth", s.room_depth);
  if (j.contains("rooms"))
    for (const auto& r : j["rooms"]) s.rooms.push_back({r.at("x").get<double>(), r.at("width").get<double>(), r.at("depth").get<double>()});
  s.corridor_width = j.value("corridor_width", s.corridor_width);
  s.door_width = j.value("door_width", s.door_width);
  s.places = j.value("places", s.places);
  s.names = j.value("names", s.names);
  s.place_radius = j.value("place_radius", s.place_radius);
  s.place_margin = j.value("place_margin", s.place_margin);
  s.name_syllables_min = j.value("name_syllables_min", s.name_syllables_min);
  s.name_syllables_max = j.value("name_syllables_max", s.name_syllables_max);
  s.carrier_words = j.value("carrier_words", s.carrier_words);
  s.carrier_syllables_min = j.value("carrier_syllables_min", s.carrier_syllables_min);
  s.carrier_syllables_max = j.value("carrier_syllables_max", s.carrier_syllables_max);
  s.templates = j.value("templates", s.templates);
  s.template_words_min = j.value("template_words_min", s.template_words_min);
  s.template_words_max = j.value("template_words_max", s.template_words_max);
  return s;
}

inline nlohmann::json environment_spec_to_json(const EnvironmentSpec& s) {
  nlohmann::json j = {{"room_count", s.room_count},
                      {"room_width", s.room_width},
                      {"room_depth", s.room_depth},
                      {"corridor_width", s.corridor_width},
                      {"door_width", s.door_width},
                      {"places", s.places},
                      {"names", s.names},
                      {"place_radius", s.place_radius},
                      {"place_margin", s.place_margin},
                      {"name_syllables_min", s.name_syllables_min},
                      {"name_syllables_max", s.name_syllables_max},
                      {"carrier_words", s.carrier_words},
                      {"carrier_syllables_min", s.carrier_syllables_min},
                      {"carrier_syllables_max", s.carrier_syllables_max},
                      {"templates", s.templates},
                      {"template_words_min", s.template_words_min},
                      {"template_words_max", s.template_words_max}};
  if (!s.rooms.empty()) {
    j["rooms"] = nlohmann::json::array();
    for (const auto& r : s.rooms) j["rooms"].push_back({{"x", r.x}, {"width", r.width}, {"depth", r.depth}});
  }
  return j;
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  DatasetSpec s;
  if (j.contains("environment")) s.environment = environment_spec_from_json(j["environment"]);
  if (j.contains("trajectory")) {
    const auto& t = j["trajectory"];
    s.trajectory.teaching_steps = t.value("teaching_steps", s.trajectory.teaching_steps);
    s.trajectory.teachings_per_visit = t.value("teachings_per_visit", s.trajectory.teachings_per_visit);
    s.trajectory.step_length = t.value("step_length", s.trajectory.step_length);
    s.trajectory.max_redraws = t.value("max_redraws", s.trajectory.max_redraws);
  }
  if (j.contains("scan")) {
    const auto& z = j["scan"];
    s.scan.beams = z.value("beams", s.scan.beams);
    s.scan.max_range = z.value("max_range", s.scan.max_range);
    s.scan.sigma = z.value("sigma", s.scan.sigma);
  }
  if (j.contains("feature")) {
    const auto& f = j["feature"];
    s.feature.dimension = f.value("dimension", s.feature.dimension);
    s.feature.count = f.value("count", s.feature.count);
    s.feature.concentration = f.value("concentration", s.feature.concentration);
  }
  if (j.contains("channel")) {
    const auto& c = j["channel"];
    s.channel.sub = c.value("sub", s.channel.sub);
    s.channel.ins = c.value("ins", s.channel.ins);
    s.channel.del = c.value("del", s.channel.del);
  }
  if (j.contains("odometry_noise")) {
    const auto& m = j["odometry_noise"];
    s.odometry_noise = {m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>(), m.at(3).get<double>()};
  }
  return s;
}

inline nlohmann::json dataset_spec_to_json(const DatasetSpec& s) {
  const auto& o = s.odometry_noise;
  return {{"environment", environment_spec_to_json(s.environment)},
          {"trajectory",
           {{"teaching_steps", s.trajectory.teaching_steps},
            {"teachings_per_visit", s.trajectory.teachings_per_visit},
            {"step_length", s.trajectory.step_length},
            {"max_redraws", s.trajectory.max_redraws}}},
          {"scan", {{"beams", s.scan.beams}, {"max_range", s.scan.max_range}, {"sigma", s.scan.sigma}}},
          {"feature",
           {{"dimension", s.feature.dimension},
            {"count", s.feature.count},
            {"concentration", s.feature.concentration}}},
          {"channel", {{"sub", s.channel.sub}, {"ins", s.channel.ins}, {"del", s.channel.del}}},
          {"odometry_noise", {o.a1, o.a2, o.a3, o.a4}}};
}

// Environment and dataset from one seed.
inline Dataset simulate(const DatasetSpec& spec, std::uint64_t seed) {
  Rng env_rng = make_rng(seed, {0});
  const Environment env = generate_environment(spec.environment, PhonemeAlphabet::syllables().size(), env_rng);
  Rng data_rng = make_rng(seed, {1});
  return generate_dataset(env, spec, data_rng);
}

}  // namespace spco::sim
