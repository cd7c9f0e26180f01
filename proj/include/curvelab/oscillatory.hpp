#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "curvelab/curve_ops.hpp"
#include "curvelab/cutoff_lp.hpp"
#include "curvelab/fit.hpp"
#include "curvelab/parallel.hpp"
#include "curvelab/quadrature.hpp"

namespace curvelab {

// Which power form the kernel uses. `none`: bump restricted to (0, inf), plain powers.
// `even`/`odd`: two-sided bump with the matching [t]^alpha.
enum class KernelSymmetry { none, even, odd };

struct OscillatoryKernelParams {
  double alpha = 3;
  int l = 0;
  double h = 1;
  double w = 0;
  double xi = 0;
  double lambda = 0.75;
  KernelSymmetry symmetry = KernelSymmetry::none;

  static OscillatoryKernelParams make(double alpha, int l, double h, double w, double xi) {
    return {alpha, l, h, w, xi, alpha / 4, KernelSymmetry::none};
  }

  void validate() const {
    require(alpha > 0 && alpha != 1 && alpha != 2, "alpha must be positive and not 1 or 2");
    require(l >= 0, "l must be nonnegative");
    require(h > 0 && h <= 1, "h must lie in (0, 1]");
    require(std::isfinite(w) && std::isfinite(xi), "w and xi must be finite");
  }
};

namespace detail {

inline quad::Options depth_options(int quad_depth, double rel_tol = 1e-13, double abs_tol = 1e-18) {
  require(quad_depth >= 16, "quad_depth must be at least 16");
  quad::Options o;
  o.min_panels = std::max(1, quad_depth / 16);
  o.rel_tol = rel_tol;
  o.abs_tol = abs_tol;
  return o;
}

// The bump restricted to (0, inf), or the even bump.
inline double kernel_bump(double t, KernelSymmetry s) {
  if (s == KernelSymmetry::none && t <= 0) return 0.0;
  return cutoffs().psi0(t);
}

inline double kernel_power(double t, double alpha, KernelSymmetry s) {
  if (s == KernelSymmetry::odd) return bracket_power(t, alpha, Parity::odd);
  return std::pow(std::abs(t), alpha);
}

inline double kernel_power_deriv(double t, double alpha, KernelSymmetry s) {
  double d = alpha * std::pow(std::abs(t), alpha - 1);
  if (s == KernelSymmetry::odd) return d;
  return t < 0 ? -d : d;
}

// Pieces of {eta : both bump factors can be nonzero}, each with its interior breakpoints.
inline std::vector<std::vector<double>> kernel_pieces(const OscillatoryKernelParams& p) {
  std::vector<int> signs = p.symmetry == KernelSymmetry::none ? std::vector<int>{1} : std::vector<int>{1, -1};
  std::vector<std::vector<double>> pieces;
  const double marks[] = {0.5, 1.0, 2.0};
  for (int s1 : signs)
    for (int s2 : signs) {
      // eta in s1 [1/2, 2], h eta - xi in s2 [1/2, 2]
      double a1 = s1 > 0 ? 0.5 : -2.0, b1 = s1 > 0 ? 2.0 : -0.5;
      double a2 = ((s2 > 0 ? 0.5 : -2.0) + p.xi) / p.h, b2 = ((s2 > 0 ? 2.0 : -0.5) + p.xi) / p.h;
      double a = std::max(a1, a2), b = std::min(b1, b2);
      if (!(b > a)) continue;
      std::vector<double> br{a, b};
      for (double m : marks) {
        double e1 = s1 * m, e2 = (s2 * m + p.xi) / p.h;
        if (e1 > a && e1 < b) br.push_back(e1);
        if (e2 > a && e2 < b) br.push_back(e2);
      }
      pieces.push_back(std::move(br));
    }
  return pieces;
}

}  // namespace detail

// |integral of e^{i(w eta + 2^{al}([eta]^a - [h eta - xi]^a))} psi(eta)/eta psi(h eta - xi)/(h eta - xi)|.
inline double kernel_I_xi(const OscillatoryKernelParams& p, int quad_depth = 1 << 10) {
  p.validate();
  const double big = std::exp2(p.alpha * p.l);
  auto phase = [&](double e) {
    return p.w * e + big * (detail::kernel_power(e, p.alpha, p.symmetry) -
                            detail::kernel_power(p.h * e - p.xi, p.alpha, p.symmetry));
  };
  auto dphase = [&](double e) {
    return p.w + big * (detail::kernel_power_deriv(e, p.alpha, p.symmetry) -
                        p.h * detail::kernel_power_deriv(p.h * e - p.xi, p.alpha, p.symmetry));
  };
  auto weight = [&](double e) {
    double s = p.h * e - p.xi;
    return detail::kernel_bump(e, p.symmetry) / e * detail::kernel_bump(s, p.symmetry) / s;
  };
  auto opt = detail::depth_options(quad_depth);
  cplx total = 0;
  for (const auto& br : detail::kernel_pieces(p)) total += quad::integrate(phase, dphase, weight, br, opt);
  return std::abs(total);
}

// Triangle-inequality bound for kernel_I_xi.
inline double kernel_envelope(const OscillatoryKernelParams& p, int quad_depth = 1 << 10) {
  p.validate();
  auto zero = [](double) { return 0.0; };
  auto weight = [&](double e) {
    double s = p.h * e - p.xi;
    return std::abs(detail::kernel_bump(e, p.symmetry) / e * detail::kernel_bump(s, p.symmetry) / s);
  };
  auto opt = detail::depth_options(quad_depth);
  double total = 0;
  for (const auto& br : detail::kernel_pieces(p)) total += quad::integrate(zero, zero, weight, br, opt).real();
  return total;
}

// Log-spaced |xi| in (2^{-lambda l}, 2], both signs.
inline std::vector<double> lemma_xi_samples(double lambda, int l, int per_sign) {
  require(per_sign >= 2, "per_sign must be at least 2");
  double lo = std::log2(std::exp2(-lambda * l) * (1 + 1e-9)), hi = 1.0;
  std::vector<double> xs;
  for (int i = 0; i < per_sign; ++i) {
    double m = std::exp2(lo + (hi - lo) * i / (per_sign - 1));
    xs.push_back(m);
    xs.push_back(-m);
  }
  return xs;
}

// max over the xi samples of kernel_I_xi.
inline double kernel_sup(OscillatoryKernelParams p, int per_sign = 64, int quad_depth = 1 << 10) {
  auto xs = lemma_xi_samples(p.lambda, p.l, per_sign);
  std::vector<double> vals(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    auto q = p;
    q.xi = xs[i];
    vals[i] = kernel_I_xi(q, quad_depth);
  });
  return *std::max_element(vals.begin(), vals.end());
}

// |integral of e^{i lambda |t|^power} against the base bump|. The base bump is 1 at the
// stationary point t = 0, where the annular cutoff would vanish and hide the decay rate.
inline double vdc_value(double power, double lambda, int quad_depth = 1 << 12) {
  require(power >= 2, "phase power must be at least 2");
  auto phase = [&](double t) { return lambda * std::pow(std::abs(t), power); };
  auto dphase = [&](double t) {
    double d = lambda * power * std::pow(std::abs(t), power - 1);
    return t < 0 ? -d : d;
  };
  auto weight = [](double t) { return cutoffs().base_bump(t); };
  return std::abs(quad::integrate(phase, dphase, weight, {-2.0, -1.0, 0.0, 1.0, 2.0},
                                  detail::depth_options(quad_depth, 1e-12)));
}

inline FitResult vdc_baseline(double power, const std::vector<double>& lambdas, int quad_depth = 1 << 12) {
  require(!lambdas.empty(), "empty range");
  require(power >= 2, "phase power must be at least 2");
  std::vector<std::pair<double, double>> pts(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    require(lambdas[i] > 0, "lambda must be positive for a log-log fit");
    pts[i] = {lambdas[i], vdc_value(power, lambdas[i], quad_depth)};
  });
  return fit_exponent(pts);
}

// ||x -> int g(x-t) e^{i v(x) t + i u(x)[t]^a} psi_l(u(x)^{1/a} t) dt/t||_2 / ||g||_2,
// g read as its trigonometric interpolant.
inline double annulus_decay_1d(const GridFunction& g, const std::function<double(double)>& u_field,
                               const std::function<double(double)>& v_field, double alpha, int l,
                               Parity parity = Parity::even, int quad_depth = 256) {
  require(g.grid.dims == 1, "a 1D grid function is required");
  require(alpha > 0, "alpha must be positive");
  const auto& grid = g.grid;
  const int n = grid.n_points;
  std::vector<double> us(n), vs(n);
  for (int i = 0; i < n; ++i) {
    us[i] = u_field(grid.coord(i));
    vs[i] = v_field(grid.coord(i));
    if (!(us[i] > 0)) throw Error("non-positive u");
    require(std::isfinite(vs[i]), "v must be finite");
  }
  double gn = norm_lp(g, 2);
  if (gn == 0) return 0.0;

  std::map<std::pair<double, double>, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[{us[i], vs[i]}].push_back(i);
  std::vector<std::pair<std::pair<double, double>, std::vector<int>>> work(groups.begin(), groups.end());

  auto spec = spectrum(g);
  const double scale = std::exp2(l), big = std::exp2(alpha * l);
  const double neg_sign = parity == Parity::odd ? -1.0 : 1.0;
  auto opt = detail::depth_options(quad_depth);
  auto weight = [](double r) { return cutoffs().psi0(r) / r; };
  const std::vector<double> breaks{0.5, 1.0, 2.0};

  // K(sigma) = int e^{i(-sigma zeta 2^l r + c_sigma 2^{al} r^a)} psi0(r)/r dr on [1/2, 2].
  auto half_integral = [&](double zeta, double sigma, double c) {
    double lin = -sigma * zeta * scale;
    auto phase = [&](double r) { return lin * r + c * big * std::pow(r, alpha); };
    auto dphase = [&](double r) { return lin + c * big * alpha * std::pow(r, alpha - 1); };
    return quad::integrate(phase, dphase, weight, breaks, opt);
  };

  std::vector<cplx> out(n);
  parallel_for(work.size(), [&](std::size_t gi) {
    auto [u, v] = work[gi].first;
    double root = std::pow(u, -1.0 / alpha);
    std::vector<cplx> kappa(n);
    for (int k = 0; k < n; ++k) {
      double zeta = (grid.frequency(k) - v) * root;
      kappa[k] = half_integral(zeta, 1.0, 1.0) - half_integral(zeta, -1.0, neg_sign);
    }
    for (int i : work[gi].second) {
      double rel = grid.coord(i) - grid.coord(0);
      cplx s = 0;
      for (int k = 0; k < n; ++k) s += spec[k] * kappa[k] * std::polar(1.0, grid.frequency(k) * rel);
      out[i] = s / static_cast<double>(n);
    }
  });
  GridFunction tg(grid);
  tg.samples = std::move(out);
  return norm_lp(tg, 2) / gn;
}

// int_1^2 e^{i(2^k t xi + 2^{2k-j} t^2 eta)} dt.
inline cplx multiplier_mjk(double xi, double eta, int j, int k, int quad_depth = 256) {
  double a = std::ldexp(xi, k), b = std::ldexp(eta, 2 * k - j);
  auto phase = [&](double t) { return a * t + b * t * t; };
  auto dphase = [&](double t) { return a + 2 * b * t; };
  auto one = [](double) { return 1.0; };
  return quad::integrate(phase, dphase, one, {1.0, 2.0}, detail::depth_options(quad_depth, 1e-12));
}

// Product form: (int_1^2 e^{i 2^k t xi} dt)(int_1^2 e^{i 2^{2k-j} tau^2 eta} dtau).
inline cplx multiplier_tilde(double xi, double eta, int j, int k, int quad_depth = 256) {
  double a = std::ldexp(xi, k), b = std::ldexp(eta, 2 * k - j);
  auto one = [](double) { return 1.0; };
  auto opt = detail::depth_options(quad_depth, 1e-12);
  cplx lin = quad::integrate([&](double t) { return a * t; }, [&](double) { return a; }, one, {1.0, 2.0}, opt);
  cplx quadr = quad::integrate([&](double t) { return b * t * t; }, [&](double t) { return 2 * b * t; }, one,
                               {1.0, 2.0}, opt);
  return lin * quadr;
}

// Sum over |j|, |k| <= range of |m^j_k - m~^j_k|.
inline double multiplier_diff_sum(double xi, double eta, int range, int quad_depth = 256) {
  require(xi >= 0.5 && xi <= 2 && eta >= 0.5 && eta <= 2, "xi and eta must lie in [1/2, 2]");
  require(range >= 0, "range must be nonnegative");
  int side = 2 * range + 1;
  std::vector<double> terms(static_cast<std::size_t>(side) * side);
  parallel_for(terms.size(), [&](std::size_t idx) {
    int j = static_cast<int>(idx / side) - range, k = static_cast<int>(idx % side) - range;
    terms[idx] = std::abs(multiplier_mjk(xi, eta, j, k, quad_depth) - multiplier_tilde(xi, eta, j, k, quad_depth));
  });
  double s = 0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace curvelab
