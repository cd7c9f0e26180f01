#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "curvelab/cutoff_lp.hpp"
#include "curvelab/grid.hpp"
#include "curvelab/shifted_max.hpp"

namespace curvelab {

enum class Parity { even, odd };

// [t]^alpha
inline double bracket_power(double t, double alpha, Parity parity) {
  double a = std::pow(std::abs(t), alpha);
  return (parity == Parity::odd && t < 0) ? -a : a;
}

using Field2 = std::function<double(double, double)>;

struct CurveField {
  enum class Kind { constant, one_variable, lipschitz, measurable };

  double alpha = 2;
  Parity parity = Parity::even;
  Kind kind = Kind::constant;
  Field2 u;                       // coefficient of [t]^alpha
  Field2 v;                       // optional coefficient of t
  bool v_depends_on_y = false;
  double lipschitz_norm = 0;      // recorded for lipschitz fields
  double constant_value = 0;

  static CurveField constant(double alpha, Parity parity, double c) {
    CurveField f;
    f.alpha = alpha, f.parity = parity, f.kind = Kind::constant, f.constant_value = c;
    f.u = [c](double, double) { return c; };
    return f;
  }
  static CurveField one_variable(double alpha, Parity parity, std::function<double(double)> ux) {
    CurveField f;
    f.alpha = alpha, f.parity = parity, f.kind = Kind::one_variable;
    f.u = [ux](double x, double) { return ux(x); };
    return f;
  }
  static CurveField lipschitz(double alpha, Parity parity, Field2 u, double lip) {
    CurveField f;
    f.alpha = alpha, f.parity = parity, f.kind = Kind::lipschitz, f.lipschitz_norm = lip;
    f.u = std::move(u);
    return f;
  }
  static CurveField measurable(double alpha, Parity parity, Field2 u) {
    CurveField f;
    f.alpha = alpha, f.parity = parity, f.kind = Kind::measurable;
    f.u = std::move(u);
    return f;
  }
  // Curve through z = (x, y) meets (xb, yb) at t = x - xb; |u| clipped to `clip`.
  static CurveField adversarial(double alpha, Parity parity, double xb, double yb, double clip) {
    return measurable(alpha, parity, [=](double x, double y) {
      double d = bracket_power(x - xb, alpha, parity);
      if (d == 0) return 0.0;
      return std::clamp((y - yb) / d, -clip, clip);
    });
  }

  CurveField with_linear(Field2 v_fn, bool depends_on_y) const {
    CurveField f = *this;
    f.v = std::move(v_fn);
    f.v_depends_on_y = depends_on_y;
    return f;
  }

  bool y_independent() const {
    return (kind == Kind::constant || kind == Kind::one_variable) && !(v && v_depends_on_y);
  }
  bool is_constant() const { return kind == Kind::constant && !v; }
  bool is_zero() const { return is_constant() && constant_value == 0; }
};

// Largest sampled difference quotient of u along the axes.
inline double sampled_lipschitz(const CurveField& field, const TorusGrid& g) {
  double h = g.spacing(), best = 0;
  for (int i = 0; i < g.n_points; ++i)
    for (int j = 0; j < g.n_points; ++j) {
      double x = g.coord(i), y = g.coord(j), c = field.u(x, y);
      if (i + 1 < g.n_points) best = std::max(best, std::abs(field.u(x + h, y) - c) / h);
      if (j + 1 < g.n_points) best = std::max(best, std::abs(field.u(x, y + h) - c) / h);
    }
  return best;
}

// Sufficient truncation for Lipschitz fields, eps0 = 1 / (2 ||u||_Lip).
inline double default_eps0(const CurveField& field) {
  if (field.lipschitz_norm <= 0) return kInf;
  return 1.0 / (2.0 * field.lipschitz_norm);
}

struct TruncationScheme {
  double eps0 = 1.0;        // may be infinite for the zero field (periodic kernel)
  int ladder_depth = 1;     // eps_m = 2^{-m} eps0, m < ladder_depth
  int nodes_per_side = 4096;

  double dt(const TorusGrid& g) const {
    return std::isinf(eps0) ? 0.5 * g.side_length / nodes_per_side : eps0 / nodes_per_side;
  }
  double eps(int m) const { return std::ldexp(eps0, -m); }
};

inline void validate(const TruncationScheme& tr, const TorusGrid& g) {
  if (tr.ladder_depth < 1) throw Error("empty ladder");
  require(tr.nodes_per_side >= 1, "nodes_per_side must be positive");
  require(tr.nodes_per_side % (1 << (tr.ladder_depth - 1)) == 0,
          "nodes_per_side must be divisible by 2^(ladder_depth-1)");
  require(tr.eps0 > 0, "eps0 must be positive");
  if (!std::isinf(tr.eps0) && tr.eps0 > 0.25 * g.side_length * (1 + 1e-12))
    throw Error("truncation exceeds safe torus range");
}

// One quadrature node: samples f(x - dx, y - (lin*v(z) + pw*u(z) + dy0)) with `weight`.
struct CurveNode {
  double t = 0;
  double dx = 0;
  double lin = 0;
  double pw = 0;
  double dy0 = 0;
  double weight = 0;
  int shell = 0;
};

using WeightFactor = std::function<double(double u_at_z, const CurveNode&)>;

namespace detail {

struct SampledField {
  bool rows = true;  // one value per x row
  std::vector<double> u, v;
  double u_at(int ix, int iy, int n) const {
    return rows ? u[ix] : u[static_cast<std::size_t>(ix) * n + iy];
  }
  double v_at(int ix, int iy, int n) const {
    if (v.empty()) return 0.0;
    return rows ? v[ix] : v[static_cast<std::size_t>(ix) * n + iy];
  }
};

inline SampledField sample_field(const CurveField& field, const TorusGrid& g) {
  SampledField s;
  int n = g.n_points;
  s.rows = field.y_independent();
  if (s.rows) {
    s.u.resize(n);
    for (int i = 0; i < n; ++i) s.u[i] = field.u(g.coord(i), 0.0);
    if (field.v) {
      s.v.resize(n);
      for (int i = 0; i < n; ++i) s.v[i] = field.v(g.coord(i), 0.0);
    }
  } else {
    s.u.resize(g.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s.u[static_cast<std::size_t>(i) * n + j] = field.u(g.coord(i), g.coord(j));
    if (field.v) {
      s.v.resize(g.size());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s.v[static_cast<std::size_t>(i) * n + j] = field.v(g.coord(i), g.coord(j));
    }
  }
  return s;
}

// e^{-i 2 pi s k / L} for FFT slots k, via one recurrence on the nonnegative half.
inline void phase_table(double s, const TorusGrid& g, std::vector<cplx>& out) {
  int n = g.n_points;
  out.resize(n);
  double a = -2 * kPi * s / g.side_length;
  cplx base(std::cos(a), std::sin(a)), p = 1;
  out[0] = 1;
  for (int k = 1; k <= n / 2; ++k) {
    p *= base;
    if (k % 64 == 0) p = std::polar(1.0, a * k);
    if (k < n / 2) out[k] = p;
    out[n - k] = std::conj(p);
  }
}

using Shells = std::vector<std::vector<cplx>>;

// Constant displacement per node: sum of separable Fourier multipliers.
inline Shells shells_by_multiplier(const GridFunction& f, const SampledField& fld,
                                   const std::vector<CurveNode>& nodes, int shells,
                                   const WeightFactor* wf) {
  const auto& g = f.grid;
  int n = g.n_points;
  double u0 = fld.u.empty() ? 0.0 : fld.u[0], v0 = fld.v.empty() ? 0.0 : fld.v[0];
  auto spec = spectrum(f);
  bool flat = true;  // no y displacement at all
  for (const auto& nd : nodes)
    if (nd.lin * v0 + nd.pw * u0 + nd.dy0 != 0) flat = false;
  Shells out(shells);
  if (g.dims == 1 || flat) {
    std::vector<std::vector<cplx>> mult(shells, std::vector<cplx>(n, 0.0));
    std::vector<cplx> ex;
    for (const auto& nd : nodes) {
      double w = nd.weight * (wf ? (*wf)(u0, nd) : 1.0);
      if (w == 0) continue;
      phase_table(nd.dx, g, ex);
      auto& m = mult[nd.shell];
      for (int a = 0; a < n; ++a) m[a] += w * ex[a];
    }
    for (int s = 0; s < shells; ++s) {
      std::vector<cplx> sp = spec;
      if (g.dims == 1) {
        for (int a = 0; a < n; ++a) sp[a] *= mult[s][a];
      } else {
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) sp[static_cast<std::size_t>(a) * n + b] *= mult[s][a];
      }
      out[s] = from_spectrum(g, std::move(sp)).samples;
    }
    return out;
  }
  for (int s = 0; s < shells; ++s) {
    std::vector<const CurveNode*> mine;
    for (const auto& nd : nodes)
      if (nd.shell == s) mine.push_back(&nd);
    std::vector<cplx> mult(g.size(), 0.0);
    std::vector<std::vector<cplx>> ex(mine.size()), ey(mine.size());
    std::vector<double> w(mine.size());
    for (std::size_t j = 0; j < mine.size(); ++j) {
      const auto& nd = *mine[j];
      w[j] = nd.weight * (wf ? (*wf)(u0, nd) : 1.0);
      phase_table(nd.dx, g, ex[j]);
      phase_table(nd.lin * v0 + nd.pw * u0 + nd.dy0, g, ey[j]);
    }
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t a) {
      cplx* row = mult.data() + a * n;
      for (std::size_t j = 0; j < mine.size(); ++j) {
        if (w[j] == 0) continue;
        cplx c = w[j] * ex[j][a];
        const cplx* e = ey[j].data();
        for (int b = 0; b < n; ++b) row[b] += c * e[b];
      }
    });
    std::vector<cplx> sp = spec;
    for (std::size_t i = 0; i < sp.size(); ++i) sp[i] *= mult[i];
    out[s] = from_spectrum(g, std::move(sp)).samples;
  }
  return out;
}

// Groups nodes by the fractional part of dx / h; one spectral x-shift per group.
inline std::map<long long, std::vector<std::size_t>> x_classes(const std::vector<CurveNode>& nodes,
                                                               double h) {
  std::map<long long, std::vector<std::size_t>> classes;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    double q = nodes[j].dx / h;
    double frac = q - std::floor(q);
    long long key = std::llround(frac * (1LL << 40));
    if (key == (1LL << 40)) key = 0;
    classes[key].push_back(j);
  }
  return classes;
}

inline long long whole_cells(double dx, double h, long long key) {
  double frac = static_cast<double>(key) / static_cast<double>(1LL << 40);
  return std::llround(dx / h - frac);
}

// Fractional x-shift of each row spectrum / sample row: multiply by e^{-i xi frac h}.
inline void shift_rows_x(std::vector<cplx>& data, const TorusGrid& g, double frac_cells) {
  int n = g.n_points;
  fft::along_x(data.data(), n, fft::Direction::forward);
  std::vector<cplx> ph;
  phase_table(frac_cells * g.spacing(), g, ph);
  double scale = 1.0 / n;
  for (int a = 0; a < n; ++a) {
    cplx c = ph[a] * scale;
    cplx* row = data.data() + static_cast<std::size_t>(a) * n;
    for (int b = 0; b < n; ++b) row[b] *= c;
  }
  fft::along_x(data.data(), n, fft::Direction::backward);
}

// y-independent fields: y-displacements are exact eta-phases on row spectra.
inline Shells shells_by_rows(const GridFunction& f, const SampledField& fld,
                             const std::vector<CurveNode>& nodes, int shells,
                             const WeightFactor* wf) {
  const auto& g = f.grid;
  int n = g.n_points;
  double h = g.spacing();
  std::vector<cplx> F = f.samples;
  fft::along_y(F.data(), n, fft::Direction::forward);
  Shells acc(shells, std::vector<cplx>(g.size(), 0.0));
  auto classes = x_classes(nodes, h);
  for (const auto& [key, members] : classes) {
    std::vector<cplx> G = F;
    double frac = static_cast<double>(key) / static_cast<double>(1LL << 40);
    if (key != 0) shift_rows_x(G, g, frac);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ix) {
      std::vector<cplx> ph;
      double u = fld.u_at(static_cast<int>(ix), 0, n), v = fld.v_at(static_cast<int>(ix), 0, n);
      for (std::size_t j : members) {
        const auto& nd = nodes[j];
        double w = nd.weight * (wf ? (*wf)(u, nd) : 1.0);
        if (w == 0) continue;
        long long cells = whole_cells(nd.dx, h, key);
        std::size_t src = static_cast<std::size_t>(((static_cast<long long>(ix) - cells) % n + n) % n);
        phase_table(nd.lin * v + nd.pw * u + nd.dy0, g, ph);
        const cplx* in = G.data() + src * n;
        cplx* out = acc[nd.shell].data() + ix * n;
        for (int b = 0; b < n; ++b) out[b] += w * (in[b] * ph[b]);
      }
    });
  }
  for (auto& a : acc) {
    fft::along_y(a.data(), n, fft::Direction::backward);
    for (auto& v : a) v *= 1.0 / n;
  }
  return acc;
}

constexpr int kUpsample = 8;

// Six-point Lagrange weights at offset s in [0,1) for nodes -2..3.
inline void lagrange6(double s, double w[6]) {
  static const double denom[6] = {-120, 24, -12, 12, -24, 120};
  double d[6];
  for (int k = 0; k < 6; ++k) d[k] = s - (k - 2);
  for (int k = 0; k < 6; ++k) {
    double p = 1;
    for (int m = 0; m < 6; ++m)
      if (m != k) p *= d[m];
    w[k] = p / denom[k];
  }
}

// General fields: y-dependent displacement evaluated by interpolation on an
// 8x band-limited refinement of each row.
inline Shells shells_by_interpolation(const GridFunction& f, const SampledField& fld,
                                      const std::vector<CurveNode>& nodes, int shells,
                                      const WeightFactor* wf) {
  const auto& g = f.grid;
  int n = g.n_points, fine_n = n * kUpsample;
  double h = g.spacing();
  Shells acc(shells, std::vector<cplx>(g.size(), 0.0));
  auto classes = x_classes(nodes, h);
  for (const auto& [key, members] : classes) {
    std::vector<cplx> G = f.samples;
    double frac = static_cast<double>(key) / static_cast<double>(1LL << 40);
    if (key != 0) shift_rows_x(G, g, frac);
    fft::along_y(G.data(), n, fft::Direction::forward);
    std::vector<cplx> fine(static_cast<std::size_t>(n) * fine_n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        int s = g.signed_index(b);
        int slot = s >= 0 ? s : fine_n + s;
        fine[static_cast<std::size_t>(a) * fine_n + slot] = G[static_cast<std::size_t>(a) * n + b] / double(n);
      }
    fft::many(fine.data(), fine_n, n, 1, fine_n, fft::Direction::backward);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ix) {
      double wts[6];
      for (std::size_t j : members) {
        const auto& nd = nodes[j];
        long long cells = whole_cells(nd.dx, h, key);
        std::size_t src = static_cast<std::size_t>(((static_cast<long long>(ix) - cells) % n + n) % n);
        const cplx* row = fine.data() + src * fine_n;
        cplx* out = acc[nd.shell].data() + ix * n;
        for (int iy = 0; iy < n; ++iy) {
          double u = fld.u_at(static_cast<int>(ix), iy, n), v = fld.v_at(static_cast<int>(ix), iy, n);
          double w = nd.weight * (wf ? (*wf)(u, nd) : 1.0);
          if (w == 0) continue;
          double d = nd.lin * v + nd.pw * u + nd.dy0;
          double pos = (iy - d / h) * kUpsample;
          double base = std::floor(pos);
          lagrange6(pos - base, wts);
          long long q0 = static_cast<long long>(base);
          cplx val = 0;
          for (int k = 0; k < 6; ++k) {
            long long q = ((q0 + k - 2) % fine_n + fine_n) % fine_n;
            val += wts[k] * row[q];
          }
          out[iy] += w * val;
        }
      }
    });
  }
  return acc;
}

inline Shells accumulate(const GridFunction& f, const CurveField& field,
                         const std::vector<CurveNode>& nodes, int shells,
                         const WeightFactor* wf = nullptr) {
  auto fld = sample_field(field, f.grid);
  auto uniform = [](const std::vector<double>& a) {
    return std::all_of(a.begin(), a.end(), [&](double x) { return x == a.front(); });
  };
  bool constant = field.kind == CurveField::Kind::constant && fld.rows && uniform(fld.v);
  if (f.grid.dims == 1 || constant) return shells_by_multiplier(f, fld, nodes, shells, wf);
  if (fld.rows) return shells_by_rows(f, fld, nodes, shells, wf);
  return shells_by_interpolation(f, fld, nodes, shells, wf);
}

// Symmetric nodes +-(j+1/2) dt, j < M, with ladder shells (innermost = depth-1).
inline std::vector<CurveNode> symmetric_nodes(const TruncationScheme& tr, const TorusGrid& g,
                                              double alpha, Parity parity, double u_scale) {
  int M = tr.nodes_per_side;
  double dt = tr.dt(g);
  std::vector<CurveNode> nodes;
  nodes.reserve(2 * M);
  for (int j = 0; j < M; ++j) {
    int shell = 0;
    while (shell + 1 < tr.ladder_depth && j < (M >> (shell + 1))) ++shell;
    for (int sgn : {1, -1}) {
      CurveNode nd;
      nd.t = sgn * (j + 0.5) * dt;
      nd.dx = nd.t;
      nd.lin = nd.t;
      nd.pw = u_scale * bracket_power(nd.t, alpha, parity);
      nd.shell = shell;
      nodes.push_back(nd);
    }
  }
  return nodes;
}

}  // namespace detail

enum class AverageMode {
  symmetric,  // (1/2eps) int_{-eps}^{eps}
  annular,    // weight plateau_bump(t) on [1/2, 3], curve (u t, u t^alpha)
};

inline GridFunction average_along_curve(const GridFunction& f, const CurveField& field,
                                        double u_scale, double eps,
                                        AverageMode mode = AverageMode::symmetric,
                                        int nodes_per_side = 4096) {
  detail::require_2d(f);
  require(eps > 0, "eps must be positive");
  if (mode == AverageMode::symmetric) {
    TruncationScheme tr{eps, 1, nodes_per_side};
    validate(tr, f.grid);
    auto nodes = detail::symmetric_nodes(tr, f.grid, field.alpha, field.parity, u_scale);
    for (auto& nd : nodes) nd.weight = 1.0 / (2.0 * nodes_per_side);
    auto shells = detail::accumulate(f, field, nodes, 1);
    return GridFunction(f.grid, std::move(shells[0]));
  }
  std::vector<CurveNode> nodes;
  double width = 2.5 / nodes_per_side;
  for (int j = 0; j < nodes_per_side; ++j) {
    CurveNode nd;
    nd.t = 0.5 + (j + 0.5) * width;
    nd.dx = u_scale * nd.t;
    nd.dy0 = u_scale * std::pow(nd.t, field.alpha);
    nd.weight = cutoffs().plateau_bump(nd.t) * width;
    nodes.push_back(nd);
  }
  auto flat = CurveField::constant(field.alpha, field.parity, 0.0);
  auto shells = detail::accumulate(f, flat, nodes, 1);
  return GridFunction(f.grid, std::move(shells[0]));
}

// sup over the dyadic eps-ladder of averages of |f|.
inline GridFunction maximal_along_curve(const GridFunction& f, const CurveField& field,
                                        const TruncationScheme& tr) {
  detail::require_2d(f);
  validate(tr, f.grid);
  require(!std::isinf(tr.eps0), "maximal operator needs finite eps0");
  auto nodes = detail::symmetric_nodes(tr, f.grid, field.alpha, field.parity, 1.0);
  for (auto& nd : nodes) nd.weight = 1.0;
  auto shells = detail::accumulate(abs_of(f), field, nodes, tr.ladder_depth);
  GridFunction out(f.grid);
  std::vector<cplx> cum(f.grid.size(), 0.0);
  for (int m = tr.ladder_depth - 1; m >= 0; --m) {
    double count = 2.0 * (tr.nodes_per_side >> m);
    for (std::size_t i = 0; i < cum.size(); ++i) {
      cum[i] += shells[m][i];
      double a = std::abs(cum[i]) / count;
      if (a > out.samples[i].real()) out.samples[i] = a;
    }
  }
  return out;
}

// Principal value sum f(x - t, y - v t - u [t]^alpha) dt / t on symmetric nodes.
// eps0 = infinity is admitted for the zero field, using the periodic kernel.
inline GridFunction hilbert_along_curve(const GridFunction& f, const CurveField& field,
                                        const TruncationScheme& tr) {
  detail::require_2d(f);
  validate(tr, f.grid);
  bool periodic = std::isinf(tr.eps0);
  if (periodic) require(field.is_zero(), "infinite truncation requires the zero field");
  double dt = tr.dt(f.grid), L = f.grid.side_length;
  auto nodes = detail::symmetric_nodes(TruncationScheme{tr.eps0, 1, tr.nodes_per_side}, f.grid,
                                       field.alpha, field.parity, 1.0);
  for (auto& nd : nodes)
    nd.weight = periodic ? dt * (kPi / L) / std::tan(kPi * nd.t / L) : dt / nd.t;
  auto shells = detail::accumulate(f, field, nodes, 1);
  return GridFunction(f.grid, std::move(shells[0]));
}

// sup over j in [j_lo, j_hi] of the maximal operator along (t, 2^j [t]^alpha).
inline GridFunction dyadic_monomial_maximal(const GridFunction& f, double alpha, Parity parity,
                                            int j_lo, int j_hi, const TruncationScheme& tr) {
  if (j_hi < j_lo) throw Error("empty ranges");
  GridFunction out(f.grid);
  for (int j = j_lo; j <= j_hi; ++j) {
    auto m = maximal_along_curve(f, CurveField::constant(alpha, parity, std::ldexp(1.0, j)), tr);
    for (std::size_t i = 0; i < out.samples.size(); ++i)
      if (m.samples[i].real() > out.samples[i].real()) out.samples[i] = m.samples[i];
  }
  return out;
}

namespace detail {
inline std::pair<double, double> positive_range(const CurveField& field, const TorusGrid& g) {
  auto s = sample_field(field, g);
  double lo = kInf, hi = 0;
  for (double u : s.u) {
    if (!(u > 0)) throw Error("non-positive u");
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  return {lo, hi};
}
}  // namespace detail

// int f(x - t, y - u(x)[t]^alpha) psi_j(u(x)^{1/alpha} t) dt / t.
inline GridFunction truncated_piece(const GridFunction& f, const CurveField& field, int j,
                                    int nodes_per_side = 0) {
  detail::require_2d(f);
  auto [umin, umax] = detail::positive_range(field, f.grid);
  double a = std::ldexp(0.5, j) * std::pow(umax, -1.0 / field.alpha);
  double b = std::ldexp(2.0, j) * std::pow(umin, -1.0 / field.alpha);
  int K = nodes_per_side > 0
              ? nodes_per_side
              : std::max(64, static_cast<int>(std::ceil((b - a) / (0.25 * f.grid.spacing()))));
  double width = (b - a) / K;
  std::vector<CurveNode> nodes;
  for (int i = 0; i < K; ++i)
    for (int sgn : {1, -1}) {
      CurveNode nd;
      nd.t = sgn * (a + (i + 0.5) * width);
      nd.dx = nd.t;
      nd.pw = bracket_power(nd.t, field.alpha, field.parity);
      nd.weight = width / nd.t;
      nodes.push_back(nd);
    }
  double alpha = field.alpha;
  WeightFactor wf = [alpha, j](double u, const CurveNode& nd) {
    return psi(j, std::pow(u, 1.0 / alpha) * std::abs(nd.t));
  };
  auto shells = detail::accumulate(f, field, nodes, 1, &wf);
  return GridFunction(f.grid, std::move(shells[0]));
}

// Geometry of the rectangles I_m x J_m covering the curve piece at scale j.
struct RectangleCover {
  int j = 0;
  int tau = 0;
  double lambda_xj = 0;
  double delta_xj = 0;
  int n_j = 0;
  double c_alpha = 1;
  std::vector<double> sigma1, sigma2;
};

inline RectangleCover make_rectangle_cover(double u, double alpha, int j, double c_alpha = 1.0) {
  require(u > 0, "non-positive u");
  RectangleCover rc;
  rc.j = j;
  rc.c_alpha = c_alpha;
  rc.lambda_xj = std::ldexp(1.0, j) * std::pow(u, -1.0 / alpha);
  rc.delta_xj = std::exp2(-(alpha - 1) * j) * std::pow(u, -1.0 / alpha);
  rc.n_j = static_cast<int>(std::ceil(1.5 * rc.lambda_xj / rc.delta_xj - 1e-9));
  for (int m = 0; m < rc.n_j; ++m) {
    rc.sigma1.push_back(std::exp2(alpha * j - 1) + m);
    // I_m starts at lambda/2, so J_m sits at height u (lambda/2 + m delta)^alpha.
    rc.sigma2.push_back(c_alpha * std::pow(std::ldexp(0.5, j) + std::exp2(-(alpha - 1) * j) * m, alpha));
  }
  return rc;
}

// Weighted sum of shifted strong-maximal averages dominating |truncated_piece|.
// Constant u only; shifts are converted to cells of the dyadic lengths nearest
// delta (x) and 1 (y), on the periodic grid.
inline GridFunction rectangle_majorant(const GridFunction& f, const CurveField& field, int j,
                                       int tau_window) {
  detail::require_2d(f);
  auto [umin, umax] = detail::positive_range(field, f.grid);
  require(umin == umax, "rectangle majorant requires a constant coefficient");
  require(tau_window >= 0, "tau_window must be nonnegative");
  auto rc = make_rectangle_cover(umin, field.alpha, j);
  double h = f.grid.spacing();
  auto dyadic_cells = [h](double len) {
    return std::ldexp(1.0, std::max(0, static_cast<int>(std::lround(std::log2(len / h)))));
  };
  double cell_x = dyadic_cells(rc.delta_xj) * h, cell_y = dyadic_cells(1.0) * h;
  auto absf = abs_of(f);
  std::map<long long, GridFunction> inner;  // M_2 results keyed by y-shift
  auto m2 = [&](long long s) -> const GridFunction& {
    auto it = inner.find(s);
    if (it == inner.end()) {
      // Apply M_2 only, via n1 = 0 on a per-row basis.
      GridFunction r(f.grid);
      int n = f.n();
      parallel_for(static_cast<std::size_t>(n), [&](std::size_t ix) {
        std::vector<double> row(n);
        for (int iy = 0; iy < n; ++iy) row[iy] = absf.at(static_cast<int>(ix), iy).real();
        auto out = shifted_max_1d(row, s, Boundary::periodic);
        for (int iy = 0; iy < n; ++iy) r.at(static_cast<int>(ix), iy) = out[iy];
      });
      it = inner.emplace(s, std::move(r)).first;
    }
    return it->second;
  };
  auto m1 = [&](const GridFunction& g, long long s) {
    GridFunction r(g.grid);
    int n = g.n();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iy) {
      std::vector<double> col(n);
      for (int ix = 0; ix < n; ++ix) col[ix] = g.at(ix, static_cast<int>(iy)).real();
      auto out = shifted_max_1d(col, s, Boundary::periodic);
      for (int ix = 0; ix < n; ++ix) r.at(ix, static_cast<int>(iy)) = out[ix];
    });
    return r;
  };
  GridFunction total(f.grid);
  double scale_y = cell_y;  // sigma2 is measured in units of |J| = 1
  for (int tau = -tau_window; tau <= tau_window; ++tau) {
    double wt = std::pow(1.0 + std::abs(tau), -10.0) / rc.n_j;
    for (int m = 0; m < rc.n_j; ++m) {
      double tm = rc.sigma1[m] * rc.delta_xj;
      long long n1 = std::llround(tm / cell_x);
      for (int sgn : {1, -1}) {
        double ys = (field.parity == Parity::odd && sgn < 0) ? -rc.sigma2[m] : rc.sigma2[m];
        long long n2 = std::llround((ys + tau) / scale_y);
        auto term = m1(m2(n2), sgn * n1);
        for (std::size_t i = 0; i < total.samples.size(); ++i) total.samples[i] += wt * term.samples[i];
      }
    }
  }
  return total;
}

// x -> max over (u1, u2) of |p.v. int g(x - t) e^{i u1 t + i u2 [t]^alpha} dt / t|.
inline GridFunction carleson_sup(const GridFunction& g, double alpha, Parity parity,
                                 const std::vector<double>& u1_ladder,
                                 const std::vector<double>& u2_ladder, const TruncationScheme& tr) {
  require(g.grid.dims == 1, "a 1D grid function is required");
  if (u1_ladder.empty() || u2_ladder.empty()) throw Error("empty ladders");
  validate(tr, g.grid);
  require(!std::isinf(tr.eps0), "carleson_sup needs finite eps0");
  const auto& grid = g.grid;
  int n = grid.n_points, M = tr.nodes_per_side;
  double dt = tr.dt(grid);
  auto spec = spectrum(g);
  // Node phase tables are shared by every ladder pair.
  std::vector<std::vector<cplx>> table(2 * M);
  std::vector<double> ts(2 * M);
  for (int j = 0; j < M; ++j)
    for (int s = 0; s < 2; ++s) {
      double t = (s ? -1 : 1) * (j + 0.5) * dt;
      ts[2 * j + s] = t;
      detail::phase_table(t, grid, table[2 * j + s]);
    }
  std::vector<std::pair<double, double>> pairs;
  for (double a : u1_ladder)
    for (double b : u2_ladder) pairs.emplace_back(a, b);
  std::vector<std::vector<double>> mods(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    auto [u1, u2] = pairs[p];
    std::vector<cplx> mult(n, 0.0);
    for (int k = 0; k < 2 * M; ++k) {
      double t = ts[k];
      cplx c = std::polar(dt / t, u1 * t + u2 * bracket_power(t, alpha, parity));
      const cplx* e = table[k].data();
      for (int a = 0; a < n; ++a) mult[a] += c * e[a];
    }
    std::vector<cplx> s = spec;
    for (int a = 0; a < n; ++a) s[a] *= mult[a];
    fft::line(s.data(), n, fft::Direction::backward);
    mods[p].resize(n);
    for (int a = 0; a < n; ++a) mods[p][a] = std::abs(s[a]) / n;
  });
  GridFunction out(grid);
  for (const auto& m : mods)
    for (int a = 0; a < n; ++a)
      if (m[a] > out.samples[a].real()) out.samples[a] = m[a];
  return out;
}

}  // namespace curvelab
