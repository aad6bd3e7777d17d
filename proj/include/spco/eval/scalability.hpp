#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "spco/core/error.hpp"

namespace spco::eval {

struct SlopeFit {
  std::size_t n = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool ci_contains_zero() const { return ci_low <= 0.0 && 0.0 <= ci_high; }
  bool strictly_positive() const { return ci_low > 0.0; }
};

// Least-squares fit of y on x with a two-sided confidence interval on the slope.
inline SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, double confidence = 0.95) {
  if (x.size() != y.size()) throw Error("fit_slope: length mismatch");
  if (x.size() < 3) throw Error("fit_slope: need at least three points");
  SlopeFit f;
  f.n = x.size();
  const double n = static_cast<double>(f.n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("fit_slope: x values are all equal");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  const double q = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  f.ci_low = f.slope - q * f.stderr_slope;
  f.ci_high = f.slope + q * f.stderr_slope;
  return f;
}

struct TimingSeries {
  std::string label;
  std::vector<double> step;  // teaching index
  std::vector<double> ms;
};

struct ScalabilityRow {
  std::string label;
  SlopeFit fit;
  double mean_ms = 0.0;
};

inline std::vector<ScalabilityRow> scalability_report(const std::vector<TimingSeries>& series) {
  std::vector<ScalabilityRow> rows;
  for (const auto& s : series) {
    if (s.step.size() < 20) throw Error("scalability_report: '" + s.label + "' has fewer than 20 steps");
    ScalabilityRow r;
    r.label = s.label;
    r.fit = fit_slope(s.step, s.ms);
    for (double v : s.ms) r.mean_ms += v;
    r.mean_ms /= static_cast<double>(s.ms.size());
    rows.push_back(r);
  }
  return rows;
}

}  // namespace spco::eval
