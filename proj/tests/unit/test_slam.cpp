#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "spco/sim/dataset.hpp"
#include "spco/sim/environment.hpp"
#include "spco/slam/grid.hpp"
#include "spco/slam/likelihood.hpp"
#include "spco/slam/motion.hpp"

using namespace spco;
using namespace spco::slam;

namespace {

sim::Environment box_room() {
  sim::EnvironmentSpec spec;
  spec.room_count = 1;
  spec.room_width = 6.0;
  spec.room_depth = 6.0;
  spec.places = 1;
  Rng rng = make_rng(2, {});
  return sim::generate_environment(spec, 30, rng);
}

sim::ScanSpec clean_scan() {
  sim::ScanSpec s;
  s.sigma = 0.0;
  return s;
}

}  // namespace

TEST(Grid, UpdatesAreOrderIndependent) {
  const auto env = box_room();
  Rng rng = make_rng(1, {});
  const RangeScan a = sim::simulate_scan(env, Pose(0.0, 0.0, 0.0), clean_scan(), rng);
  const RangeScan b = sim::simulate_scan(env, Pose(0.7, -0.4, 1.0), clean_scan(), rng);
  OccupancyGrid g1 = OccupancyGrid::centered({}, 0, 0, 30), g2 = g1;
  integrate_scan(g1, a, Pose(0.0, 0.0, 0.0));
  integrate_scan(g1, b, Pose(0.7, -0.4, 1.0));
  integrate_scan(g2, b, Pose(0.7, -0.4, 1.0));
  integrate_scan(g2, a, Pose(0.0, 0.0, 0.0));
  for (int y = 0; y < g1.height(); ++y)
    for (int x = 0; x < g1.width(); ++x) ASSERT_EQ(g1.log_odds({x, y}), g2.log_odds({x, y}));
}

TEST(Grid, DistanceFieldMatchesBruteForce) {
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 4);
  std::mt19937_64 rng(9);
  std::vector<Cell> sites;
  for (int i = 0; i < 25; ++i) {
    Cell c{static_cast<int>(rng() % g.width()), static_cast<int>(rng() % g.height())};
    g.set_log_odds(c, 2.0);
    sites.push_back(c);
  }
  g.refresh_distance_field();
  for (int y = 0; y < g.height(); y += 3)
    for (int x = 0; x < g.width(); x += 3) {
      const double px = g.center_x(x) + 0.01, py = g.center_y(y) - 0.02;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : sites) best = std::min(best, std::hypot(px - g.center_x(s.x), py - g.center_y(s.y)));
      // The field stores the nearest site of the query cell's centre.
      double cell_best = std::numeric_limits<double>::infinity();
      Cell nearest{};
      for (const auto& s : sites) {
        const double d = std::hypot(g.center_x(x) - g.center_x(s.x), g.center_y(y) - g.center_y(s.y));
        if (d < cell_best) {
          cell_best = d;
          nearest = s;
        }
      }
      const double expect = std::hypot(px - g.center_x(nearest.x), py - g.center_y(nearest.y));
      EXPECT_NEAR(g.distance_to_occupied(px, py), expect, 0.05 + 1e-9) << x << "," << y;
      EXPECT_GE(g.distance_to_occupied(px, py) + 1e-12, best);
    }
}

TEST(Grid, DistanceFieldAtCellCentresIsExact) {
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 3);
  std::mt19937_64 rng(4);
  std::vector<Cell> sites;
  for (int i = 0; i < 12; ++i) {
    Cell c{static_cast<int>(rng() % g.width()), static_cast<int>(rng() % g.height())};
    g.set_log_odds(c, 1.0);
    sites.push_back(c);
  }
  g.refresh_distance_field();
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : sites) best = std::min(best, std::hypot(g.center_x(x) - g.center_x(s.x), g.center_y(y) - g.center_y(s.y)));
      ASSERT_NEAR(g.distance_to_occupied(g.center_x(x), g.center_y(y)), best, 1e-9);
    }
}

TEST(Grid, EmptyFieldAndOffGridAreInfinite) {
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 2);
  g.refresh_distance_field();
  EXPECT_FALSE(g.field_has_sites());
  EXPECT_TRUE(std::isinf(g.distance_to_occupied(0, 0)));
  g.set_log_odds(g.cell_of(0, 0), 1.0);
  g.refresh_distance_field();
  EXPECT_TRUE(std::isinf(g.distance_to_occupied(50, 50)));
}

TEST(Grid, GrowthKeepsWorldCoordinates) {
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 2);
  g.set_log_odds(g.cell_of(0.35, -0.45), 3.0);
  EXPECT_TRUE(g.ensure_contains(-6, -1, 1, 7));
  EXPECT_EQ(g.log_odds(g.cell_of(0.35, -0.45)), 3.0);
  EXPECT_TRUE(g.in_bounds(g.cell_of(-6, 7)));
  EXPECT_FALSE(g.ensure_contains(-1, -1, 1, 1));
}

TEST(Grid, TraceLineIsConnectedWithExactEndpoints) {
  const auto cells = trace_line({2, 3}, {-7, 11});
  EXPECT_EQ(cells.front().x, 2);
  EXPECT_EQ(cells.back().y, 11);
  for (std::size_t i = 1; i < cells.size(); ++i) {
    EXPECT_LE(std::abs(cells[i].x - cells[i - 1].x), 1);
    EXPECT_LE(std::abs(cells[i].y - cells[i - 1].y), 1);
  }
  EXPECT_EQ(cells.size(), 10u);  // max(|dx|, |dy|) + 1
}

TEST(Grid, NoReturnBeamClearsWithoutMarking) {
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 20);
  RangeScan z;
  z.max_range = 2.0;
  z.angles = {0.0};
  z.ranges = {kNoReturn};
  integrate_scan(g, z, Pose());
  EXPECT_LT(g.log_odds(g.cell_of(1.95, 0.0)), 0.0);
  EXPECT_FALSE(g.has_occupied());
  z.ranges = {1.0};
  integrate_scan(g, z, Pose());
  EXPECT_GT(g.log_odds(g.cell_of(1.0, 0.0)), 0.0);
}

TEST(Grid, PgmTopRowIsHighestY) {
  OccupancyGrid g(GridParams{}, 0.0, 0.0, 2, 2);
  g.set_log_odds({0, 1}, 10.0);  // top-left in the raster
  const auto dir = std::filesystem::temp_directory_path() / "spco_pgm_test";
  std::filesystem::create_directories(dir);
  write_pgm(g, (dir / "g.pgm").string(), (dir / "g.json").string());
  std::ifstream in(dir / "g.pgm");
  std::string magic;
  int w, h, maxv, first;
  in >> magic >> w >> h >> maxv >> first;
  EXPECT_EQ(magic, "P2");
  EXPECT_EQ(first, 255);
}

TEST(Likelihood, BeamModelMatchesMixtureFormula) {
  LikelihoodParams lp;
  for (double d : {0.0, 0.05, 0.3, 2.0}) {
    const double expect =
        lp.w_hit * std::exp(-d * d / (2 * 0.01)) / (std::sqrt(2 * std::numbers::pi) * 0.1) + lp.w_rand / 8.0;
    EXPECT_NEAR(beam_log_likelihood(d, 8.0, lp), std::log(expect), 1e-12);
  }
  EXPECT_NEAR(beam_log_likelihood(std::numeric_limits<double>::infinity(), 8.0, lp), std::log(0.1 / 8.0), 1e-12);
}

TEST(Likelihood, ScanMatchNeverScoresBelowItsStart) {
  const auto env = box_room();
  Rng rng = make_rng(3, {});
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 20);
  const Pose truth(0.2, -0.3, 0.4);
  integrate_scan(g, sim::simulate_scan(env, truth, clean_scan(), rng), truth);
  g.refresh_distance_field();
  const RangeScan z = sim::simulate_scan(env, truth, clean_scan(), rng);
  const Pose start(0.32, -0.22, 0.45);
  const Pose m = scan_match(z, start, g);
  EXPECT_GE(measurement_likelihood(z, m, g), measurement_likelihood(z, start, g));
  EXPECT_LT(std::hypot(m.x - truth.x, m.y - truth.y), std::hypot(start.x - truth.x, start.y - truth.y));
}

TEST(Likelihood, ScanMatchOnEmptyMapReturnsStart) {
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 5);
  RangeScan z;
  z.max_range = 4;
  z.angles = {0.0};
  z.ranges = {1.0};
  const Pose p(1, 2, 3);
  EXPECT_EQ(scan_match(z, p, g), p);
}

TEST(Likelihood, NoiselessSlamWeightIsMeasurementLikelihood) {
  const auto env = box_room();
  Rng rng = make_rng(5, {});
  OccupancyGrid g = OccupancyGrid::centered({}, 0, 0, 20);
  integrate_scan(g, sim::simulate_scan(env, Pose(), clean_scan(), rng), Pose());
  g.refresh_distance_field();
  const ControlInput u{0.3, 0.5, -0.1};
  const Pose next = apply_motion(Pose(), u);
  const RangeScan z = sim::simulate_scan(env, next, clean_scan(), rng);
  const MotionNoise none{0, 0, 0, 0};
  EXPECT_NEAR(slam_weight(z, Pose(), u, g, 5, none, rng), measurement_likelihood(z, next, g), 1e-9);
}

TEST(Motion, ZeroNoiseIsDeterministic) {
  Rng rng = make_rng(1, {});
  const ControlInput u{0.5, 1.0, -0.25};
  const Pose p = sample_motion_model(u, Pose(1, 1, 0), MotionNoise{0, 0, 0, 0}, rng);
  const Pose q = apply_motion(Pose(1, 1, 0), u);
  EXPECT_NEAR(p.x, q.x, 1e-12);
  EXPECT_NEAR(p.y, q.y, 1e-12);
  EXPECT_NEAR(q.x, 1 + std::cos(0.5), 1e-12);
  EXPECT_NEAR(q.heading, 0.25, 1e-12);
}
