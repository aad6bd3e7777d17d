#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spco/core/error.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/random.hpp"
#include "spco/core/types.hpp"

namespace spco::sim {

struct Segment {
  double x0, y0, x1, y1;
};

struct Rect {
  double x0, y0, x1, y1;
  bool contains(double x, double y, double margin = 0.0) const {
    return x >= x0 + margin && x <= x1 - margin && y >= y0 + margin && y <= y1 - margin;
  }
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }
};

struct Place {
  int id = 0;
  int concept_id = 0;  // index into names; places may share a name
  int room = 0;
  double cx = 0, cy = 0, radius = 0.5;
};

// A carrier phrase: word tokens, with kNameSlot marking the place name.
struct Template {
  static constexpr int kNameSlot = -1;
  std::vector<int> tokens;
};

struct RoomSpec {
  double x = 0;  // left edge along the corridor
  double width = 4;
  double depth = 4;
};

struct EnvironmentSpec {
  int room_count = 4;
  double room_width = 4.0;
  double room_depth = 4.0;
  std::vector<RoomSpec> rooms;  // explicit layout; overrides room_count when nonempty
  double corridor_width = 2.0;
  double door_width = 1.0;
  int places = 6;
  int names = 0;  // distinct place names; 0 means one per place
  double place_radius = 0.5;
  double place_margin = 0.8;  // clearance from walls
  int name_syllables_min = 3;
  int name_syllables_max = 5;
  int carrier_words = 12;
  int carrier_syllables_min = 2;
  int carrier_syllables_max = 4;
  int templates = 10;
  int template_words_min = 3;
  int template_words_max = 6;

  void validate() const {
    if (rooms.empty() && room_count < 1) throw SpecError("environment: at least one room required");
    if (places < 1) throw SpecError("environment: at least one place required");
    if (names < 0 || names > places) throw SpecError("environment: names must lie in [0, places]");
    if (name_syllables_min < 1 || name_syllables_max < name_syllables_min)
      throw SpecError("environment: bad name length range");
    if (carrier_words < 1 || carrier_syllables_min < 1 || carrier_syllables_max < carrier_syllables_min)
      throw SpecError("environment: bad carrier word settings");
    if (templates < 1 || template_words_min < 1 || template_words_max < template_words_min)
      throw SpecError("environment: bad template settings");
    if (!(place_radius > 0) || !(corridor_width > 0) || !(door_width > 0))
      throw SpecError("environment: sizes must be positive");
  }
};

inline constexpr double kPlaceGap = 0.25;  // between place regions

struct Environment {
  std::vector<Segment> walls;
  std::vector<Rect> rooms;
  std::optional<Rect> corridor;
  std::vector<double> door_x;  // door center per room (corridor layout only)
  std::vector<Place> places;
  std::vector<Word> names;
  std::vector<Word> carriers;
  std::vector<Template> templates;
  Rect bounds{0, 0, 0, 0};

  int room_of(double x, double y) const {
    for (std::size_t i = 0; i < rooms.size(); ++i)
      if (rooms[i].contains(x, y)) return static_cast<int>(i);
    return -1;
  }
  bool in_corridor(double x, double y) const { return corridor && corridor->contains(x, y); }
};

inline Word random_word(int min_syl, int max_syl, std::size_t A, Rng& rng) {
  const int len = std::uniform_int_distribution<int>(min_syl, max_syl)(rng);
  Word w(static_cast<std::size_t>(len));
  for (auto& p : w) p = static_cast<Phoneme>(std::uniform_int_distribution<std::size_t>(0, A - 1)(rng));
  return w;
}

inline void translate(Environment& env, double dx, double dy) {
  for (auto& w : env.walls) {
    w.x0 += dx, w.x1 += dx, w.y0 += dy, w.y1 += dy;
  }
  for (auto& r : env.rooms) {
    r.x0 += dx, r.x1 += dx, r.y0 += dy, r.y1 += dy;
  }
  if (env.corridor) {
    env.corridor->x0 += dx, env.corridor->x1 += dx, env.corridor->y0 += dy, env.corridor->y1 += dy;
  }
  for (auto& d : env.door_x) d += dx;
  for (auto& p : env.places) {
    p.cx += dx;
    p.cy += dy;
  }
  env.bounds.x0 += dx, env.bounds.x1 += dx, env.bounds.y0 += dy, env.bounds.y1 += dy;
}

// Start pose of the robot before translation: corridor middle, or room center.
inline std::pair<double, double> layout_start(const Environment& env) {
  if (env.corridor) return {env.corridor->cx(), env.corridor->cy()};
  return {env.rooms[0].cx(), env.rooms[0].cy()};
}

// Rooms side by side above a corridor, one door per room; a single room is
// a closed box. The layout is shifted so the robot starts at the origin.
inline Environment generate_environment(const EnvironmentSpec& spec, std::size_t alphabet_size, Rng& rng) {
  spec.validate();
  Environment env;
  std::vector<RoomSpec> rooms = spec.rooms;
  if (rooms.empty()) {
    for (int i = 0; i < spec.room_count; ++i) rooms.push_back({i * spec.room_width, spec.room_width, spec.room_depth});
  }
  std::sort(rooms.begin(), rooms.end(), [](const RoomSpec& a, const RoomSpec& b) { return a.x < b.x; });
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    if (!(rooms[i].width > 0) || !(rooms[i].depth > 0)) throw SpecError("environment: room sizes must be positive");
    if (i > 0 && rooms[i].x < rooms[i - 1].x + rooms[i - 1].width - 1e-9)
      throw SpecError("environment: rooms " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap");
  }

  if (rooms.size() == 1) {
    const RoomSpec& r = rooms[0];
    env.rooms.push_back({r.x, 0.0, r.x + r.width, r.depth});
    const Rect& b = env.rooms[0];
    env.walls = {{b.x0, b.y0, b.x1, b.y0}, {b.x1, b.y0, b.x1, b.y1}, {b.x1, b.y1, b.x0, b.y1}, {b.x0, b.y1, b.x0, b.y0}};
    env.bounds = b;
  } else {
    const double cw = spec.corridor_width;
    const double x_min = rooms.front().x;
    const double x_max = rooms.back().x + rooms.back().width;
    double y_max = 0.0;
    for (const auto& r : rooms) y_max = std::max(y_max, cw + r.depth);
    env.corridor = Rect{x_min, 0.0, x_max, cw};
    env.bounds = Rect{x_min, 0.0, x_max, y_max};
    // Corridor floor and ends.
    env.walls.push_back({x_min, 0.0, x_max, 0.0});
    env.walls.push_back({x_min, 0.0, x_min, cw});
    env.walls.push_back({x_max, 0.0, x_max, cw});
    double prev_end = x_min;
    for (const auto& r : rooms) {
      const double x0 = r.x, x1 = r.x + r.width, y1 = cw + r.depth;
      if (r.width <= spec.door_width + 0.2) throw SpecError("environment: room narrower than its door");
      env.rooms.push_back({x0, cw, x1, y1});
      // Corridor ceiling between rooms, if any gap.
      if (x0 > prev_end + 1e-9) env.walls.push_back({prev_end, cw, x0, cw});
      const double door = 0.5 * (x0 + x1);
      env.door_x.push_back(door);
      env.walls.push_back({x0, cw, door - 0.5 * spec.door_width, cw});
      env.walls.push_back({door + 0.5 * spec.door_width, cw, x1, cw});
      env.walls.push_back({x0, cw, x0, y1});
      env.walls.push_back({x1, cw, x1, y1});
      env.walls.push_back({x0, y1, x1, y1});
      prev_end = x1;
    }
  }

  // Place regions, round-robin over rooms, pairwise disjoint. A layout that
  // dead-ends is redrawn from scratch.
  const double r = spec.place_radius;
  const double m = spec.place_margin + r;
  for (const auto& box : env.rooms)
    if (box.x1 - box.x0 <= 2 * m || box.y1 - box.y0 <= 2 * m)
      throw SpecError("environment: room too small for a place");
  for (int layout = 0; layout < 200 && static_cast<int>(env.places.size()) < spec.places; ++layout) {
    env.places.clear();
    for (int p = 0; p < spec.places; ++p) {
      const int room = p % static_cast<int>(env.rooms.size());
      const Rect& box = env.rooms[room];
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        const double cx = std::uniform_real_distribution<double>(box.x0 + m, box.x1 - m)(rng);
        const double cy = std::uniform_real_distribution<double>(box.y0 + m, box.y1 - m)(rng);
        bool clear = true;
        for (const auto& q : env.places)
          if (std::hypot(q.cx - cx, q.cy - cy) < q.radius + r + kPlaceGap) clear = false;
        if (clear) {
          env.places.push_back({p, 0, room, cx, cy, r});
          placed = true;
        }
      }
      if (!placed) break;
    }
  }
  if (static_cast<int>(env.places.size()) < spec.places)
    throw SpecError("environment: cannot fit " + std::to_string(spec.places) + " places disjointly");

  // Names and carrier vocabulary, all distinct.
  const std::size_t A = alphabet_size;
  const int n_names = spec.names ? spec.names : spec.places;
  std::set<Word> used;
  auto fresh = [&](int lo, int hi) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Word w = random_word(lo, hi, A, rng);
      if (used.insert(w).second) return w;
    }
    throw SpecError("environment: cannot draw distinct words");
  };
  for (int i = 0; i < n_names; ++i) env.names.push_back(fresh(spec.name_syllables_min, spec.name_syllables_max));
  for (int i = 0; i < spec.carrier_words; ++i)
    env.carriers.push_back(fresh(spec.carrier_syllables_min, spec.carrier_syllables_max));
  for (std::size_t p = 0; p < env.places.size(); ++p)
    env.places[p].concept_id = static_cast<int>(p) % n_names;

  for (int i = 0; i < spec.templates; ++i) {
    const int len = std::uniform_int_distribution<int>(spec.template_words_min, spec.template_words_max)(rng);
    Template t;
    const int slot = std::uniform_int_distribution<int>(0, len - 1)(rng);
    for (int k = 0; k < len; ++k) {
      if (k == slot)
        t.tokens.push_back(Template::kNameSlot);
      else
        t.tokens.push_back(std::uniform_int_distribution<int>(0, spec.carrier_words - 1)(rng));
    }
    env.templates.push_back(std::move(t));
  }

  const auto [sx, sy] = layout_start(env);
  translate(env, -sx, -sy);
  return env;
}

// Distance along the ray to the nearest wall, or +inf.
inline double ray_cast(const Environment& env, double x, double y, double angle) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : env.walls) {
    const double ex = w.x1 - w.x0, ey = w.y1 - w.y0;
    const double den = dx * ey - dy * ex;
    if (std::abs(den) < 1e-15) continue;
    const double fx = w.x0 - x, fy = w.y0 - y;
    const double t = (fx * ey - fy * ex) / den;  // along the ray
    const double s = (fx * dy - fy * dx) / den;  // along the wall
    if (t > 1e-12 && s >= 0.0 && s <= 1.0) best = std::min(best, t);
  }
  return best;
}

inline nlohmann::json environment_to_json(const Environment& env, const PhonemeAlphabet& alphabet) {
  nlohmann::json j;
  j["walls"] = nlohmann::json::array();
  for (const auto& w : env.walls) j["walls"].push_back({w.x0, w.y0, w.x1, w.y1});
  j["rooms"] = nlohmann::json::array();
  for (const auto& r : env.rooms) j["rooms"].push_back({r.x0, r.y0, r.x1, r.y1});
  if (env.corridor) j["corridor"] = {env.corridor->x0, env.corridor->y0, env.corridor->x1, env.corridor->y1};
  j["names"] = nlohmann::json::array();
  for (const auto& n : env.names) j["names"].push_back(alphabet.render(n));
  j["carriers"] = nlohmann::json::array();
  for (const auto& c : env.carriers) j["carriers"].push_back(alphabet.render(c));
  j["templates"] = nlohmann::json::array();
  for (const auto& t : env.templates) j["templates"].push_back(t.tokens);
  j["places"] = nlohmann::json::array();
  for (const auto& p : env.places) {
    j["places"].push_back({{"id", p.id},
                           {"concept", p.concept_id},
                           {"name", alphabet.render(env.names[p.concept_id])},
                           {"room", p.room},
                           {"center", {p.cx, p.cy}},
                           {"radius", p.radius}});
  }
  return j;
}

}  // namespace spco::sim
