#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "curvelab/error.hpp"

namespace curvelab {

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::vector<std::pair<double, double>> points;  // original (abscissa, value)
};

// Least squares line through (log2 a, log2 v).
inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 3, "at least 3 points are needed for a fit");
  for (auto [a, v] : points) {
    require(a > 0 && std::isfinite(a), "abscissa must be positive");
    require(v > 0 && std::isfinite(v), "nonpositive value in fit");
  }
  double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (auto [a, v] : points) {
    sx += std::log2(a);
    sy += std::log2(v);
  }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0, syy = 0;
  for (auto [a, v] : points) {
    double dx = std::log2(a) - mx, dy = std::log2(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0, "abscissae must not all coincide");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  r.points = points;
  return r;
}

}  // namespace curvelab
