#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "curvelab/error.hpp"
#include "curvelab/fft.hpp"
#include "curvelab/parallel.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

// Periodic grid on [-L/2, L/2)^dims with n points per axis.
struct TorusGrid {
  int n_points = 0;
  double side_length = 0;
  int dims = 0;

  double spacing() const { return side_length / n_points; }
  double coord(int i) const { return -0.5 * side_length + i * spacing(); }
  std::size_t size() const {
    std::size_t n = static_cast<std::size_t>(n_points);
    return dims == 1 ? n : n * n;
  }
  // Signed lattice index of FFT slot k.
  int signed_index(int k) const { return k < n_points / 2 ? k : k - n_points; }
  double frequency(int k) const { return 2.0 * kPi * signed_index(k) / side_length; }
  double nyquist() const { return kPi * n_points / side_length; }
  double cell_volume() const { return dims == 1 ? spacing() : spacing() * spacing(); }
  bool operator==(const TorusGrid&) const = default;
};

inline TorusGrid make_grid(int n_points, double side_length, int dims) {
  require(is_power_of_two(n_points) && n_points >= 8, "n_points must be a power of two >= 8");
  require(side_length > 0 && std::isfinite(side_length), "side_length must be positive");
  require(dims == 1 || dims == 2, "dims must be 1 or 2");
  return TorusGrid{n_points, side_length, dims};
}

// Samples indexed ix * n + iy (y contiguous) in 2D, ix in 1D.
struct GridFunction {
  TorusGrid grid;
  std::vector<cplx> samples;

  GridFunction() = default;
  explicit GridFunction(const TorusGrid& g) : grid(g), samples(g.size()) {}
  GridFunction(const TorusGrid& g, std::vector<cplx> s) : grid(g), samples(std::move(s)) {
    require(samples.size() == grid.size(), "sample count does not match grid");
  }

  int n() const { return grid.n_points; }
  cplx& at(int ix, int iy) { return samples[static_cast<std::size_t>(ix) * n() + iy]; }
  const cplx& at(int ix, int iy) const { return samples[static_cast<std::size_t>(ix) * n() + iy]; }
};

// Build from a function of the physical coordinates.
inline GridFunction sample(const TorusGrid& g, const std::function<cplx(double, double)>& fn) {
  GridFunction f(g);
  int n = g.n_points;
  if (g.dims == 1) {
    for (int i = 0; i < n; ++i) f.samples[i] = fn(g.coord(i), 0.0);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f.at(i, j) = fn(g.coord(i), g.coord(j));
  }
  return f;
}

// Unnormalized DFT of the samples.
inline std::vector<cplx> spectrum(const GridFunction& f) {
  std::vector<cplx> s = f.samples;
  if (f.grid.dims == 1)
    fft::line(s.data(), f.n(), fft::Direction::forward);
  else
    fft::plane(s.data(), f.n(), fft::Direction::forward);
  return s;
}

inline GridFunction from_spectrum(const TorusGrid& g, std::vector<cplx> s) {
  require(s.size() == g.size(), "spectrum size does not match grid");
  if (g.dims == 1)
    fft::line(s.data(), g.n_points, fft::Direction::backward);
  else
    fft::plane(s.data(), g.n_points, fft::Direction::backward);
  double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : s) v *= scale;
  return GridFunction(g, std::move(s));
}

// Multiply Fourier coefficients by symbol(xi, eta); eta = 0 in 1D.
template <class Symbol>
GridFunction apply_multiplier(const GridFunction& f, Symbol&& symbol) {
  auto s = spectrum(f);
  const auto& g = f.grid;
  int n = g.n_points;
  if (g.dims == 1) {
    for (int k = 0; k < n; ++k) s[k] *= symbol(g.frequency(k), 0.0);
  } else {
    for (int a = 0; a < n; ++a) {
      double xi = g.frequency(a);
      for (int b = 0; b < n; ++b) s[static_cast<std::size_t>(a) * n + b] *= symbol(xi, g.frequency(b));
    }
  }
  return from_spectrum(g, std::move(s));
}

inline double norm_lp(const GridFunction& f, double p) {
  require(p >= 1, "p must be at least 1");
  for (const auto& v : f.samples)
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), "non-finite sample");
  if (std::isinf(p)) {
    double m = 0;
    for (const auto& v : f.samples) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0;
  if (p == 2) {
    for (const auto& v : f.samples) acc += std::norm(v);
  } else {
    for (const auto& v : f.samples) acc += std::pow(std::abs(v), p);
  }
  return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

// Band-limited translate f(x - dx, y - dy).
inline GridFunction spectral_shift(const GridFunction& f, double dx, double dy) {
  return apply_multiplier(f, [&](double xi, double eta) {
    double a = xi * dx + eta * dy;
    return cplx(std::cos(a), -std::sin(a));
  });
}

// Frequency band for random_field.
struct Band {
  enum class Kind { annulus, rectangle, single } kind = Kind::annulus;
  double k = 0;                                   // annulus: 2^k <= |zeta| < 2^{k+1}
  double xi_lo = 0, xi_hi = 0, eta_lo = 0, eta_hi = 0;  // rectangle, inclusive, signed
  double xi0 = 0, eta0 = 0;                       // single: nearest lattice frequency

  static Band annulus(double k) { return Band{Kind::annulus, k}; }
  static Band rectangle(double xl, double xh, double el, double eh) {
    Band b;
    b.kind = Kind::rectangle;
    b.xi_lo = xl, b.xi_hi = xh, b.eta_lo = el, b.eta_hi = eh;
    return b;
  }
  static Band single(double xi, double eta) {
    Band b;
    b.kind = Kind::single;
    b.xi0 = xi, b.eta0 = eta;
    return b;
  }

  bool contains(const TorusGrid& g, double xi, double eta) const {
    const double tol = 1e-9 * (2 * kPi / g.side_length);
    switch (kind) {
      case Kind::annulus: {
        double r = std::hypot(xi, eta), lo = std::exp2(k);
        return r >= lo - tol && r < 2 * lo - tol;
      }
      case Kind::rectangle:
        return xi >= xi_lo - tol && xi <= xi_hi + tol && eta >= eta_lo - tol && eta <= eta_hi + tol;
      case Kind::single:
        return std::abs(xi - xi0) < 0.5 * 2 * kPi / g.side_length &&
               std::abs(eta - eta0) < 0.5 * 2 * kPi / g.side_length;
    }
    return false;
  }
};

// Independent unit complex Gaussian coefficients on the band; `stream` separates trials.
inline GridFunction random_field(const TorusGrid& g, std::uint64_t seed, const Band& band,
                                 std::uint64_t stream = 0) {
  std::vector<cplx> s(g.size());
  int n = g.n_points;
  CounterRng rng(seed, stream);
  std::size_t hits = 0;
  // Draw in signed-lattice order so the result is layout independent.
  for (int sa = -n / 2; sa < n / 2; ++sa) {
    int a = (sa + n) % n;
    for (int sb = (g.dims == 1 ? 0 : -n / 2); sb < (g.dims == 1 ? 1 : n / 2); ++sb) {
      int b = (sb + n) % n;
      double xi = g.frequency(a), eta = g.dims == 1 ? 0.0 : g.frequency(b);
      if (!band.contains(g, xi, eta)) continue;
      cplx c = rng.complex_normal();
      ++hits;
      // Scale so the sample-space amplitude is independent of n.
      std::size_t idx = g.dims == 1 ? static_cast<std::size_t>(a) : static_cast<std::size_t>(a) * n + b;
      s[idx] = c * static_cast<double>(g.size());
    }
  }
  require(hits > 0, "empty band");
  return from_spectrum(g, std::move(s));
}

// Exact band-limited value of f at an arbitrary point (direct trigonometric sum).
inline cplx evaluate_trig(const GridFunction& f, const std::vector<cplx>& spec, double x, double y) {
  const auto& g = f.grid;
  int n = g.n_points;
  double x0 = g.coord(0);
  cplx acc = 0;
  if (g.dims == 1) {
    for (int k = 0; k < n; ++k) acc += spec[k] * std::polar(1.0, g.frequency(k) * (x - x0));
    return acc / static_cast<double>(n);
  }
  std::vector<cplx> ey(n);
  for (int b = 0; b < n; ++b) ey[b] = std::polar(1.0, g.frequency(b) * (y - x0));
  for (int a = 0; a < n; ++a) {
    cplx ex = std::polar(1.0, g.frequency(a) * (x - x0));
    cplx row = 0;
    for (int b = 0; b < n; ++b) row += spec[static_cast<std::size_t>(a) * n + b] * ey[b];
    acc += ex * row;
  }
  return acc / static_cast<double>(g.size());
}

inline GridFunction abs_of(const GridFunction& f) {
  GridFunction r(f.grid);
  for (std::size_t i = 0; i < f.samples.size(); ++i) r.samples[i] = std::abs(f.samples[i]);
  return r;
}

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  require(a.grid == b.grid, "grid mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) m = std::max(m, std::abs(a.samples[i] - b.samples[i]));
  return m;
}

}  // namespace curvelab
