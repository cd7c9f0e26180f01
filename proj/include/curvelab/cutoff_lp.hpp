#pragma once

#include <cmath>

#include "curvelab/grid.hpp"

namespace curvelab {

// Smooth cutoffs built from h(s) = exp(-1/s), s > 0.
struct CutoffFamily {
  static double mollifier(double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; }

  // Smooth step: 0 for x <= 0, 1 for x >= 1.
  static double step(double x) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    double a = mollifier(x), b = mollifier(1 - x);
    return a / (a + b);
  }

  // Even, 1 on [-1,1], supported in [-2,2].
  double base_bump(double t) const {
    double a = std::abs(t);
    if (a <= 1) return 1.0;
    if (a >= 2) return 0.0;
    double up = mollifier(2 - a), down = mollifier(a - 1);
    return up / (up + down);
  }

  // Supported on 1/2 <= |t| <= 2; equals 1 only at |t| = 1.
  double psi0(double t) const { return base_bump(t) - base_bump(2 * t); }

  double psi(double l, double t) const { return psi0(std::exp2(-l) * t); }

  // 1 on [-1,1], supported in [-3,3].
  double fattened_bump(double t) const { return step((3 - std::abs(t)) / 2); }

  // Radial annulus profile: 1 on [1,2], supported in [1/2,3].
  double plateau_bump(double t) const {
    double a = std::abs(t);
    if (a <= 0.5 || a >= 3) return 0.0;
    if (a < 1) return step(2 * (a - 0.5));
    if (a <= 2) return 1.0;
    return step(3 - a);
  }
};

inline const CutoffFamily& cutoffs() {
  static const CutoffFamily fam;
  return fam;
}

inline double psi(double l, double t) { return cutoffs().psi(l, t); }

namespace detail {
inline void require_2d(const GridFunction& f) { require(f.grid.dims == 2, "a 2D grid function is required"); }

inline void check_band(const TorusGrid& g, double top) {
  if (top > g.nyquist() * (1 + 1e-12)) throw Error("band out of range");
}
}  // namespace detail

// Multiplier psi_k(eta).
inline GridFunction project_second(const GridFunction& f, double k) {
  detail::require_2d(f);
  detail::check_band(f.grid, std::exp2(k + 1));
  return apply_multiplier(f, [k](double, double eta) { return cplx(psi(k, eta)); });
}

// Multiplier psi_k(xi).
inline GridFunction project_first(const GridFunction& f, double k) {
  detail::require_2d(f);
  detail::check_band(f.grid, std::exp2(k + 1));
  return apply_multiplier(f, [k](double xi, double) { return cplx(psi(k, xi)); });
}

// Multiplier plateau_bump(2^{-k} |zeta|): identity on 2^k <= |zeta| <= 2^{k+1}.
inline GridFunction project_annulus(const GridFunction& f, double k) {
  detail::require_2d(f);
  detail::check_band(f.grid, 3 * std::exp2(k));
  double s = std::exp2(-k);
  return apply_multiplier(f, [s](double xi, double eta) {
    return cplx(cutoffs().plateau_bump(s * std::hypot(xi, eta)));
  });
}

// Multiplier psi_k(xi / eta); the eta = 0 row is removed.
inline GridFunction project_cone(const GridFunction& f, double k) {
  detail::require_2d(f);
  return apply_multiplier(f, [k](double xi, double eta) {
    return eta == 0 ? cplx(0) : cplx(psi(k, xi / eta));
  });
}

}  // namespace curvelab
