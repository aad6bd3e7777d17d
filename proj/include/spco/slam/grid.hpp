#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "spco/core/error.hpp"
#include "spco/core/types.hpp"

namespace spco::slam {

struct GridParams {
  double resolution = 0.1;  // meters per cell
  // Dyadic increments keep log-odds sums exact, so update order never
  // changes the grid before clamping.
  double l_occ = 0.875;
  double l_free = 0.375;
  double l_max = 10.0;
  int distance_refresh = 10;  // grid updates between distance-field rebuilds
  double grow_margin = 2.0;   // meters added on each side when growing

  void validate() const {
    if (!(resolution > 0) || !(l_occ > 0) || !(l_free >= 0) || !(l_max > 0) ||
        distance_refresh < 1)
      throw SpecError("grid parameters out of range");
  }
};

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

// Log-odds occupancy grid. Cell (0,0) has its lower-left corner at origin.
// Carries its own nearest-occupied-cell field for the likelihood model.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;

  OccupancyGrid(GridParams params, double origin_x, double origin_y, int width, int height)
      : params_(params), origin_x_(origin_x), origin_y_(origin_y), width_(width), height_(height) {
    params_.validate();
    if (width <= 0 || height <= 0) throw SpecError("grid dimensions must be positive");
    cells_.assign(static_cast<std::size_t>(width) * height, 0.0);
  }

  // Square grid of side `extent` meters centered on (cx, cy).
  static OccupancyGrid centered(GridParams params, double cx, double cy, double extent) {
    const int n = static_cast<int>(std::ceil(extent / params.resolution));
    return OccupancyGrid(params, cx - 0.5 * n * params.resolution, cy - 0.5 * n * params.resolution,
                         n, n);
  }

  const GridParams& params() const { return params_; }
  double resolution() const { return params_.resolution; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Cell cell_of(double x, double y) const {
    return {static_cast<int>(std::floor((x - origin_x_) / params_.resolution)),
            static_cast<int>(std::floor((y - origin_y_) / params_.resolution))};
  }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  double center_x(int ix) const { return origin_x_ + (ix + 0.5) * params_.resolution; }
  double center_y(int iy) const { return origin_y_ + (iy + 0.5) * params_.resolution; }

  double log_odds(Cell c) const { return cells_[index(c)]; }
  bool occupied(Cell c) const { return cells_[index(c)] > 0.0; }
  double occupancy_probability(Cell c) const {
    return 1.0 - 1.0 / (1.0 + std::exp(cells_[index(c)]));
  }

  void add_log_odds(Cell c, double delta) {
    double& v = cells_[index(c)];
    v = std::clamp(v + delta, -params_.l_max, params_.l_max);
  }
  void set_log_odds(Cell c, double value) {
    cells_[index(c)] = std::clamp(value, -params_.l_max, params_.l_max);
  }

  bool has_occupied() const {
    return std::any_of(cells_.begin(), cells_.end(), [](double v) { return v > 0.0; });
  }

  // Grow (never shrink) so the box [x0,x1]x[y0,y1] lies inside the grid.
  // Returns true if the grid was reallocated.
  bool ensure_contains(double x0, double y0, double x1, double y1) {
    const Cell lo = cell_of(x0, y0);
    const Cell hi = cell_of(x1, y1);
    if (in_bounds(lo) && in_bounds(hi)) return false;
    const int margin = static_cast<int>(std::ceil(params_.grow_margin / params_.resolution));
    const int add_left = lo.x < 0 ? -lo.x + margin : 0;
    const int add_bottom = lo.y < 0 ? -lo.y + margin : 0;
    const int add_right = hi.x >= width_ ? hi.x - width_ + 1 + margin : 0;
    const int add_top = hi.y >= height_ ? hi.y - height_ + 1 + margin : 0;
    const int nw = width_ + add_left + add_right;
    const int nh = height_ + add_bottom + add_top;
    std::vector<double> grown(static_cast<std::size_t>(nw) * nh, 0.0);
    for (int y = 0; y < height_; ++y)
      std::copy_n(cells_.begin() + static_cast<std::ptrdiff_t>(y) * width_, width_,
                  grown.begin() + static_cast<std::ptrdiff_t>(y + add_bottom) * nw + add_left);
    cells_ = std::move(grown);
    origin_x_ -= add_left * params_.resolution;
    origin_y_ -= add_bottom * params_.resolution;
    width_ = nw;
    height_ = nh;
    field_valid_ = false;
    return true;
  }

  // Called once per scan integration; rebuilds the distance field when it is
  // stale by `distance_refresh` updates or was invalidated.
  void note_update() {
    ++updates_since_refresh_;
    if (!field_valid_ || updates_since_refresh_ >= params_.distance_refresh) refresh_distance_field();
  }

  // Distance (m) from (x, y) to the center of the nearest occupied cell per the
  // cached field; +inf when none is known or the point lies off the grid.
  double distance_to_occupied(double x, double y) const {
    if (!field_valid_) return std::numeric_limits<double>::infinity();
    const Cell c = cell_of(x, y);
    if (!in_bounds(c)) return std::numeric_limits<double>::infinity();
    const std::int32_t site = nearest_[index(c)];
    if (site < 0) return std::numeric_limits<double>::infinity();
    const double dx = x - center_x(site % width_);
    const double dy = y - center_y(site / width_);
    return std::sqrt(dx * dx + dy * dy);
  }

  bool field_has_sites() const { return field_valid_ && field_sites_ > 0; }

  // Exact Euclidean nearest-site transform (two-pass lower-envelope method).
  void refresh_distance_field() {
    const int W = width_, H = height_;
    const std::int64_t kInf = std::int64_t{1} << 40;
    nearest_.assign(cells_.size(), -1);
    std::vector<std::int64_t> g(cells_.size(), kInf);
    std::vector<int> gy(cells_.size(), -1);
    field_sites_ = 0;
    // Column pass: nearest occupied row within each column.
    for (int x = 0; x < W; ++x) {
      int last = -1;
      for (int y = 0; y < H; ++y) {
        const std::size_t i = static_cast<std::size_t>(y) * W + x;
        if (cells_[i] > 0.0) {
          last = y;
          ++field_sites_;
        }
        if (last >= 0) {
          g[i] = static_cast<std::int64_t>(y - last) * (y - last);
          gy[i] = last;
        }
      }
      last = -1;
      for (int y = H - 1; y >= 0; --y) {
        const std::size_t i = static_cast<std::size_t>(y) * W + x;
        if (cells_[i] > 0.0) last = y;
        if (last >= 0) {
          const std::int64_t d = static_cast<std::int64_t>(last - y) * (last - y);
          if (d < g[i]) {
            g[i] = d;
            gy[i] = last;
          }
        }
      }
    }
    // Row pass: lower envelope of parabolas (x - q)^2 + g(q).
    std::vector<int> v(W);
    std::vector<double> z(W + 1);
    for (int y = 0; y < H; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * W;
      int k = -1;
      for (int q = 0; q < W; ++q) {
        if (g[row + q] >= kInf) continue;
        const double fq = static_cast<double>(g[row + q]) + static_cast<double>(q) * q;
        while (k >= 0) {
          const int p = v[k];
          const double fp = static_cast<double>(g[row + p]) + static_cast<double>(p) * p;
          const double s = (fq - fp) / (2.0 * (q - p));
          if (s <= z[k]) {
            --k;
          } else {
            break;
          }
        }
        if (k < 0) {
          k = 0;
          v[0] = q;
          z[0] = -std::numeric_limits<double>::infinity();
        } else {
          const int p = v[k];
          const double fp = static_cast<double>(g[row + p]) + static_cast<double>(p) * p;
          ++k;
          v[k] = q;
          z[k] = (fq - fp) / (2.0 * (q - p));
        }
        z[k + 1] = std::numeric_limits<double>::infinity();
      }
      if (k < 0) continue;
      int j = 0;
      for (int x = 0; x < W; ++x) {
        while (z[j + 1] < x) ++j;
        const int q = v[j];
        nearest_[row + x] = static_cast<std::int32_t>(gy[row + q]) * W + q;
      }
    }
    field_valid_ = true;
    updates_since_refresh_ = 0;
  }

  bool operator==(const OccupancyGrid& o) const {
    return origin_x_ == o.origin_x_ && origin_y_ == o.origin_y_ && width_ == o.width_ &&
           height_ == o.height_ && cells_ == o.cells_;
  }

 private:
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  GridParams params_;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> cells_;

  std::vector<std::int32_t> nearest_;
  bool field_valid_ = false;
  std::size_t field_sites_ = 0;
  int updates_since_refresh_ = 0;
};

// Bresenham cells from a to b inclusive.
inline std::vector<Cell> trace_line(Cell a, Cell b) {
  std::vector<Cell> out;
  int x0 = a.x, y0 = a.y;
  const int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  const int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  out.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
  while (true) {
    out.push_back({x0, y0});
    if (x0 == b.x && y0 == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return out;
}

// Ray-traced inverse sensor update: cells along each beam lose l_free,
// the endpoint of a returned beam gains l_occ. No-return beams clear the
// full ray out to max_range.
inline void integrate_scan(OccupancyGrid& m, const RangeScan& z, const Pose& x) {
  double x0 = x.x, x1 = x.x, y0 = x.y, y1 = x.y;
  std::vector<std::pair<double, double>> ends;
  ends.reserve(z.ranges.size());
  for (std::size_t b = 0; b < z.ranges.size(); ++b) {
    const double r = RangeScan::is_return(z.ranges[b]) ? z.ranges[b] : z.max_range;
    const double a = x.heading + z.angles[b];
    const double ex = x.x + r * std::cos(a), ey = x.y + r * std::sin(a);
    ends.emplace_back(ex, ey);
    x0 = std::min(x0, ex);
    x1 = std::max(x1, ex);
    y0 = std::min(y0, ey);
    y1 = std::max(y1, ey);
  }
  m.ensure_contains(x0, y0, x1, y1);
  const Cell start = m.cell_of(x.x, x.y);
  const double l_occ = m.params().l_occ, l_free = m.params().l_free;
  for (std::size_t b = 0; b < ends.size(); ++b) {
    const Cell end = m.cell_of(ends[b].first, ends[b].second);
    const auto ray = trace_line(start, end);
    const bool hit = RangeScan::is_return(z.ranges[b]);
    const std::size_t n_free = hit ? ray.size() - 1 : ray.size();
    for (std::size_t i = 0; i < n_free; ++i) m.add_log_odds(ray[i], -l_free);
    if (hit) m.add_log_odds(ray.back(), l_occ);
  }
  m.note_update();
}

inline OccupancyGrid update_grid(const RangeScan& z, const Pose& x, OccupancyGrid m) {
  integrate_scan(m, z, x);
  return m;
}

// P2 raster (top row = highest y), value = round(255 * occupancy probability).
inline void write_pgm(const OccupancyGrid& m, const std::string& pgm_path,
                      const std::string& json_path) {
  std::ofstream out(pgm_path);
  if (!out) throw IoError("cannot open " + pgm_path);
  out << "P2\n" << m.width() << ' ' << m.height() << "\n255\n";
  for (int y = m.height() - 1; y >= 0; --y) {
    for (int x = 0; x < m.width(); ++x) {
      if (x) out << ' ';
      out << static_cast<int>(std::lround(255.0 * m.occupancy_probability({x, y})));
    }
    out << '\n';
  }
  nlohmann::json meta = {{"resolution", m.resolution()},
                         {"origin", {m.origin_x(), m.origin_y(), 0.0}},
                         {"width", m.width()},
                         {"height", m.height()}};
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot open " + json_path);
  js << meta.dump(2) << '\n';
}

}  // namespace spco::slam
