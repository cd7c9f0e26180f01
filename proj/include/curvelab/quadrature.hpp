#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

namespace curvelab::quad {

using cplx = std::complex<double>;

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    double w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0;
  return r;
}

inline const Rule& gl16() {
  static const Rule r = gauss_legendre(16);
  return r;
}

inline const Rule& gl32() {
  static const Rule r = gauss_legendre(32);
  return r;
}

// Composite GL nodes over [a, b] with `panels` equal panels of the given rule.
inline void composite(const Rule& rule, double a, double b, int panels, std::vector<double>& x,
                      std::vector<double>& w) {
  double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double mid = a + (p + 0.5) * width, half = 0.5 * width;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      x.push_back(mid + half * rule.nodes[i]);
      w.push_back(half * rule.weights[i]);
    }
  }
}

struct Options {
  double rel_tol = 1e-12;
  double abs_tol = 0;  // total absolute tolerance spread by width; 0 means rel_tol * L1 mass
  int min_panels = 1;       // initial uniform split of the whole range
  int max_depth = 60;
  long max_panels = 400000;  // hard budget; beyond it panels are accepted as estimated
  double slow_phase = 8.0;  // phase variation handled by plain Gauss-Legendre
  double levin_min = 12.0;  // min |phase'| * width for collocation
};

namespace detail {

constexpr int kLevinPoints = 16;

struct Cheb {
  Eigen::VectorXd x;  // Lobatto points, x[0] = 1, x[n-1] = -1
  Eigen::MatrixXd D;  // differentiation matrix on [-1, 1]
};

inline const Cheb& cheb() {
  static const Cheb c = [] {
    const int n = kLevinPoints;
    const int N = n - 1;
    Cheb c;
    c.x.resize(n);
    for (int j = 0; j < n; ++j) c.x[j] = std::cos(std::numbers::pi * j / N);
    c.D.resize(n, n);
    auto cw = [&](int j) { return (j == 0 || j == N ? 2.0 : 1.0) * (j % 2 ? -1.0 : 1.0); };
    for (int i = 0; i < n; ++i) {
      double diag = 0;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        c.D(i, j) = cw(i) / cw(j) / (c.x[i] - c.x[j]);
        diag -= c.D(i, j);
      }
      c.D(i, i) = diag;
    }
    return c;
  }();
  return c;
}

struct Panel {
  double a, b;
  int depth;
};

template <class Phase, class DPhase, class Weight>
cplx gauss(const Phase& phase, const DPhase&, const Weight& weight, double a, double b,
           double& scale) {
  const Rule& r = gl16();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  cplx acc = 0;
  scale = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double t = mid + half * r.nodes[i];
    double w = weight(t) * r.weights[i] * half;
    acc += w * std::polar(1.0, phase(t));
    scale += std::abs(w);
  }
  return acc;
}

// Solve p' + i phase' p = weight by collocation; integral = [p e^{i phase}]_a^b.
template <class Phase, class DPhase, class Weight>
bool levin(const Phase& phase, const DPhase& dphase, const Weight& weight, double a, double b,
           cplx& value, double& scale) {
  const auto& c = cheb();
  const int n = kLevinPoints;
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Eigen::MatrixXcd A(n, n);
  Eigen::VectorXcd rhs(n);
  scale = 0;
  for (int i = 0; i < n; ++i) {
    double t = mid + half * c.x[i];
    for (int j = 0; j < n; ++j) A(i, j) = cplx(c.D(i, j) / half, 0.0);
    double d = dphase(t);
    A(i, i) += cplx(0.0, d);
    double w = weight(t);
    rhs[i] = w;
    scale = std::max(scale, std::abs(w) / std::abs(d));
  }
  Eigen::VectorXcd p = A.partialPivLu().solve(rhs);
  if (!p.allFinite()) return false;
  value = p[0] * std::polar(1.0, phase(b)) - p[n - 1] * std::polar(1.0, phase(a));
  return true;
}

}  // namespace detail

// Adaptive integral of weight(t) e^{i phase(t)} over [breaks.front(), breaks.back()].
// Breakpoints should include every point where the weight is not smooth.
template <class Phase, class DPhase, class Weight>
cplx integrate(const Phase& phase, const DPhase& dphase, const Weight& weight,
               std::vector<double> breaks, const Options& opt = {}) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.size() < 2) return 0.0;
  double total = breaks.back() - breaks.front();
  std::vector<detail::Panel> stack;
  for (std::size_t i = breaks.size() - 1; i-- > 0;) {
    double a = breaks[i], b = breaks[i + 1];
    if (!(b > a)) continue;
    int pieces = std::max(1, static_cast<int>(std::ceil(opt.min_panels * (b - a) / total)));
    for (int p = pieces - 1; p >= 0; --p)
      stack.push_back({a + (b - a) * p / pieces, a + (b - a) * (p + 1) / pieces, 0});
  }
  // Absolute floor, spread by width.
  double mass = 0;
  for (const auto& pn : stack) {
    double s;
    detail::gauss(phase, dphase, weight, pn.a, pn.b, s);
    mass += s;
  }
  // Never below the rounding level of the mass itself.
  const double rounding = 64 * std::numeric_limits<double>::epsilon() * mass;
  const double floor_density = std::max(opt.abs_tol > 0 ? opt.abs_tol : opt.rel_tol * mass, rounding) / total;
  cplx result = 0;
  const auto& cx = detail::cheb().x;
  long visited = 0;
  while (!stack.empty()) {
    auto pn = stack.back();
    stack.pop_back();
    if (++visited > opt.max_panels) pn.depth = opt.max_depth;
    double a = pn.a, b = pn.b, width = b - a, mid = 0.5 * (a + b);
    double dmin = INFINITY, dmax = 0;
    bool sign_change = false;
    double first = dphase(a);
    for (int i = 0; i < cx.size(); ++i) {
      double d = dphase(mid + 0.5 * width * cx[i]);
      dmin = std::min(dmin, std::abs(d));
      dmax = std::max(dmax, std::abs(d));
      if ((d > 0) != (first > 0)) sign_change = true;
    }
    auto split = [&] {
      stack.push_back({mid, b, pn.depth + 1});
      stack.push_back({a, mid, pn.depth + 1});
    };
    if (dmax * width <= opt.slow_phase) {
      double s0, s1, s2;
      cplx whole = detail::gauss(phase, dphase, weight, a, b, s0);
      cplx left = detail::gauss(phase, dphase, weight, a, mid, s1);
      cplx right = detail::gauss(phase, dphase, weight, mid, b, s2);
      if (std::abs(whole - left - right) <= std::max({opt.rel_tol * (s1 + s2), floor_density * width, 1e-300}) ||
          pn.depth >= opt.max_depth) {
        result += left + right;
      } else {
        split();
      }
      continue;
    }
    if (!sign_change && dmin * width >= opt.levin_min) {
      cplx whole, left, right;
      double s0, s1, s2;
      bool ok = detail::levin(phase, dphase, weight, a, b, whole, s0) &&
                detail::levin(phase, dphase, weight, a, mid, left, s1) &&
                detail::levin(phase, dphase, weight, mid, b, right, s2);
      if (ok && (std::abs(whole - left - right) <= std::max({opt.rel_tol * s0, floor_density * width, 1e-300}) ||
                 pn.depth >= opt.max_depth)) {
        result += left + right;
        continue;
      }
    }
    if (pn.depth >= opt.max_depth) {
      double s;
      result += detail::gauss(phase, dphase, weight, a, b, s);
      continue;
    }
    split();
  }
  return result;
}

}  // namespace curvelab::quad
