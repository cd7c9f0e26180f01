#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <utility>
#include <vector>

#include "curvelab/cutoff_lp.hpp"
#include "curvelab/parallel.hpp"
#include "curvelab/quadrature.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

using Point2 = std::array<double, 2>;

struct Interval {
  double lo = 0, hi = 0;
  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

inline double interval_distance(const Interval& a, const Interval& b) {
  return std::max({0.0, b.lo - a.hi, a.lo - b.hi});
}

// Caps [m delta, (m + 1) delta) covering [0, 1].
struct CapDecomposition {
  double delta = 1;
  std::vector<Interval> caps;

  std::size_t cap_of(double xi) const {
    auto m = static_cast<std::size_t>(std::floor(xi / delta));
    return std::min(m, caps.size() - 1);
  }
};

inline CapDecomposition make_caps(double delta) {
  require(delta > 0 && delta <= 1, "delta must lie in (0, 1]");
  int e = 0;
  require(std::frexp(delta, &e) == 0.5, "delta must be a power of two");
  auto count = static_cast<std::size_t>(std::llround(1 / delta));
  CapDecomposition d;
  d.delta = delta;
  for (std::size_t m = 0; m < count; ++m) d.caps.push_back({m * delta, (m + 1) * delta});
  d.caps.back().hi = 1.0;
  return d;
}

// w(x) = (1 + |x - c| / radius)^{-N}, zero beyond the cutoff radius.
struct DecouplingWeight {
  Point2 center{0, 0};
  double radius = 1;
  int decay_power = 10;
  double cutoff_radius = 4;

  static DecouplingWeight for_delta(double delta, Point2 center = {0, 0}) {
    double r = 1 / (delta * delta);
    return {center, r, 10, 4 * r};
  }

  double operator()(double x1, double x2) const {
    double d = std::hypot(x1 - center[0], x2 - center[1]);
    if (d > cutoff_radius) return 0.0;
    return std::pow(1 + d / radius, -decay_power);
  }
};

// Piecewise constant coefficients on equal cells of [lo, hi).
struct Coefficients {
  Interval support;
  std::vector<cplx> values;

  double cell_width() const { return support.length() / static_cast<double>(values.size()); }
  Interval cell(std::size_t i) const {
    double w = cell_width();
    return {support.lo + i * w, i + 1 == values.size() ? support.hi : support.lo + (i + 1) * w};
  }
  cplx operator()(double xi) const {
    if (xi < support.lo || xi >= support.hi) return 0.0;
    auto i = static_cast<std::size_t>((xi - support.lo) / cell_width());
    return values[std::min(i, values.size() - 1)];
  }
  double l2_norm() const {
    double s = 0;
    for (auto v : values) s += std::norm(v);
    return std::sqrt(s * cell_width());
  }

  // Independent complex Gaussian values per cell.
  static Coefficients gaussian(Interval support, std::size_t cells, std::uint64_t seed, std::uint64_t stream) {
    require(cells > 0 && support.length() > 0, "empty cap");
    Coefficients c{support, std::vector<cplx>(cells)};
    CounterRng rng(seed, stream);
    for (auto& v : c.values) v = rng.complex_normal();
    return c;
  }
};

// Square lattice {(i s, j s) : |i|, |j| <= half} around the origin.
struct Lattice {
  double spacing = 1;
  int half = 0;

  int side() const { return 2 * half + 1; }
  double coord(int i) const { return (i - half) * spacing; }
  double extent() const { return half * spacing; }
  double cell_area() const { return spacing * spacing; }

  static Lattice covering(double radius, double spacing) {
    require(spacing > 0 && radius >= 0, "invalid lattice");
    return {spacing, static_cast<int>(std::ceil(radius / spacing - 1e-12))};
  }
};

namespace detail {

// Quadrature nodes on the parabola parameter with a group label per node.
struct ParabolaNodes {
  std::vector<double> xi;
  std::vector<cplx> weight;
  std::vector<int> group;
  int groups = 0;
};

constexpr double kMaxPanelPhase = 24.0;

// Gauss-Legendre panels of at most kMaxPanelPhase radians for points within max_norm.
inline int panel_count(double width, double max_norm, double support_hi, int min_nodes) {
  double rate = max_norm * (1 + 2 * std::max(1.0, std::abs(support_hi)));
  int by_phase = static_cast<int>(std::ceil(width * rate / kMaxPanelPhase));
  int by_depth = (min_nodes + 31) / 32;
  return std::max({1, by_phase, by_depth});
}

inline void add_panels(ParabolaNodes& nodes, Interval iv, const std::function<cplx(double)>& g, int group,
                       double max_norm, int min_nodes) {
  const auto& r = quad::gl32();
  int panels = panel_count(iv.length(), max_norm, std::max(std::abs(iv.lo), std::abs(iv.hi)), min_nodes);
  double w = iv.length() / panels;
  for (int p = 0; p < panels; ++p) {
    double a = iv.lo + p * w, mid = a + 0.5 * w;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      double x = mid + 0.5 * w * r.nodes[i];
      nodes.xi.push_back(x);
      nodes.weight.push_back(0.5 * w * r.weights[i] * g(x));
      nodes.group.push_back(group);
    }
  }
}

// Nodes for piecewise constant coefficients; group = label(cell index).
inline ParabolaNodes coefficient_nodes(const Coefficients& c, double max_norm, int min_nodes_per_cell,
                                       const std::function<int(std::size_t)>& label, int groups) {
  ParabolaNodes nodes;
  nodes.groups = groups;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    cplx v = c.values[i];
    add_panels(nodes, c.cell(i), [v](double) { return v; }, label(i), max_norm, min_nodes_per_cell);
  }
  return nodes;
}

// Calls visit(row0, rows, fields) for blocks of lattice rows, where fields[g] is a
// rows x side matrix holding sum over group-g nodes of weight e^{i(x1 xi + x2 xi^2)},
// x1 along columns and x2 along rows. Blocks run in parallel; visit must only
// write to storage owned by its block.
template <class Visit>
void sweep_lattice(const ParabolaNodes& nodes, const Lattice& lat, int block_rows, Visit&& visit) {
  const int side = lat.side();
  // Column tables per group: weight_n e^{i x1 xi_n}.
  std::vector<std::vector<int>> members(nodes.groups);
  for (std::size_t n = 0; n < nodes.xi.size(); ++n) members[nodes.group[n]].push_back(static_cast<int>(n));
  std::vector<Eigen::MatrixXcd> columns(nodes.groups);
  for (int g = 0; g < nodes.groups; ++g) {
    const auto& mem = members[g];
    columns[g].resize(static_cast<Eigen::Index>(mem.size()), side);
    for (std::size_t a = 0; a < mem.size(); ++a)
      for (int m = 0; m < side; ++m)
        columns[g](static_cast<Eigen::Index>(a), m) = nodes.weight[mem[a]] * std::polar(1.0, lat.coord(m) * nodes.xi[mem[a]]);
  }
  const int blocks = (side + block_rows - 1) / block_rows;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    int row0 = static_cast<int>(b) * block_rows, rows = std::min(block_rows, side - row0);
    std::vector<Eigen::MatrixXcd> fields(nodes.groups);
    for (int g = 0; g < nodes.groups; ++g) {
      const auto& mem = members[g];
      if (mem.empty()) {
        fields[g] = Eigen::MatrixXcd::Zero(rows, side);
        continue;
      }
      Eigen::MatrixXcd phase(rows, static_cast<Eigen::Index>(mem.size()));
      for (int r = 0; r < rows; ++r) {
        double x2 = lat.coord(row0 + r);
        for (std::size_t a = 0; a < mem.size(); ++a) {
          double xi = nodes.xi[mem[a]];
          phase(r, static_cast<Eigen::Index>(a)) = std::polar(1.0, x2 * xi * xi);
        }
      }
      fields[g].noalias() = phase * columns[g];
    }
    visit(row0, rows, fields);
  });
}

}  // namespace detail

// E g(x) = int_cap g(xi) e^{i(x1 xi + x2 xi^2)} d xi at each point.
inline std::vector<cplx> extension(const std::function<cplx(double)>& g, Interval cap, const std::vector<Point2>& points,
                                   int quad_depth = 64) {
  require(cap.hi > cap.lo, "empty cap");
  require(quad_depth >= 1, "quad_depth must be positive");
  double max_norm = 1;
  for (const auto& p : points) max_norm = std::max(max_norm, std::hypot(p[0], p[1]));
  detail::ParabolaNodes nodes;
  nodes.groups = 1;
  detail::add_panels(nodes, cap, g, 0, max_norm, quad_depth);
  std::vector<cplx> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    cplx s = 0;
    for (std::size_t n = 0; n < nodes.xi.size(); ++n) {
      double xi = nodes.xi[n];
      s += nodes.weight[n] * std::polar(1.0, points[i][0] * xi + points[i][1] * xi * xi);
    }
    out[i] = s;
  });
  return out;
}

struct DecouplingOptions {
  double lattice_spacing = 1;
  int min_nodes_per_cell = 32;
  int block_rows = 16;
};

// Per-trial ratios ||E_[0,1] g||_{L^p(w)} / (sum_caps ||E_cap g||_{L^p(w)}^2)^{1/2}, where trial t
// scales the cap-m piece of `base` by factors[t][m].
inline std::vector<double> decoupling_ratios(const Coefficients& base, const CapDecomposition& caps, double p,
                                             const std::vector<std::vector<cplx>>& factors,
                                             const DecouplingOptions& opt = {}) {
  require(p >= 2 && p <= 4, "p must lie in [2, 4]");
  require(base.support == (Interval{0, 1}), "coefficients must live on [0, 1]");
  const int ncaps = static_cast<int>(caps.caps.size());
  auto weight = DecouplingWeight::for_delta(caps.delta);
  auto lat = Lattice::covering(weight.cutoff_radius, opt.lattice_spacing);
  auto nodes = detail::coefficient_nodes(
      base, weight.cutoff_radius * std::sqrt(2.0), opt.min_nodes_per_cell,
      [&](std::size_t i) { return static_cast<int>(caps.cap_of(base.cell(i).lo + 0.25 * base.cell_width())); }, ncaps);
  const std::size_t trials = factors.size();
  for (const auto& f : factors) require(static_cast<int>(f.size()) == ncaps, "one factor per cap is required");

  const int side = lat.side();
  const int blocks = (side + opt.block_rows - 1) / opt.block_rows;
  // Per block: trial sums of w |sum_m c_m F_m|^p, then per-cap sums of w |F_m|^p.
  std::vector<std::vector<double>> whole(blocks, std::vector<double>(trials, 0.0));
  std::vector<std::vector<double>> pieces(blocks, std::vector<double>(ncaps, 0.0));
  Eigen::MatrixXcd coef(static_cast<Eigen::Index>(trials), ncaps);
  for (std::size_t t = 0; t < trials; ++t)
    for (int m = 0; m < ncaps; ++m) coef(static_cast<Eigen::Index>(t), m) = factors[t][m];

  detail::sweep_lattice(nodes, lat, opt.block_rows, [&](int row0, int rows, const std::vector<Eigen::MatrixXcd>& fields) {
    auto b = static_cast<std::size_t>(row0 / opt.block_rows);
    Eigen::MatrixXd w(rows, side);
    for (int r = 0; r < rows; ++r)
      for (int m = 0; m < side; ++m) w(r, m) = weight(lat.coord(m), lat.coord(row0 + r));
    for (int m = 0; m < ncaps; ++m) pieces[b][m] = (w.array() * fields[m].array().abs().pow(p)).sum();
    // Stack fields as caps x points and combine all trials with one product.
    Eigen::MatrixXcd stacked(ncaps, static_cast<Eigen::Index>(rows) * side);
    for (int m = 0; m < ncaps; ++m)
      stacked.row(m) = Eigen::Map<const Eigen::RowVectorXcd>(fields[m].data(), fields[m].size());
    Eigen::MatrixXcd sums = coef * stacked;
    Eigen::Map<const Eigen::RowVectorXd> wflat(w.data(), w.size());
    for (std::size_t t = 0; t < trials; ++t)
      whole[b][t] = (wflat.array() * sums.row(static_cast<Eigen::Index>(t)).array().abs().pow(p)).sum();
  });

  std::vector<double> cap_norm_p(ncaps, 0.0), total(trials, 0.0);
  for (int b = 0; b < blocks; ++b) {
    for (int m = 0; m < ncaps; ++m) cap_norm_p[m] += pieces[b][m];
    for (std::size_t t = 0; t < trials; ++t) total[t] += whole[b][t];
  }
  std::vector<double> ratios(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    double den = 0;
    for (int m = 0; m < ncaps; ++m)
      den += std::norm(factors[t][m]) * std::pow(cap_norm_p[m] * lat.cell_area(), 2.0 / p);
    if (!(den > 0)) throw Error("denominator zero");
    ratios[t] = std::pow(total[t] * lat.cell_area(), 1.0 / p) / std::sqrt(den);
  }
  return ratios;
}

// Ratio for one coefficient function on [0, 1].
inline double decoupling_ratio(const Coefficients& g, double delta, double p, const DecouplingOptions& opt = {}) {
  auto caps = make_caps(delta);
  std::vector<std::vector<cplx>> one{std::vector<cplx>(caps.caps.size(), cplx(1, 0))};
  return decoupling_ratios(g, caps, p, one, opt).front();
}

// Max ratio over trials of independent Gaussian values per delta-cell.
inline double decoupling_ratio_random(double delta, double p, int trials, std::uint64_t seed,
                                      const DecouplingOptions& opt = {}) {
  require(trials >= 1, "at least one trial is required");
  auto caps = make_caps(delta);
  Coefficients ones{{0, 1}, std::vector<cplx>(caps.caps.size(), cplx(1, 0))};
  std::vector<std::vector<cplx>> factors(trials);
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    factors[t].resize(caps.caps.size());
    for (auto& v : factors[t]) v = rng.complex_normal();
  }
  auto r = decoupling_ratios(ones, caps, p, factors, opt);
  return *std::max_element(r.begin(), r.end());
}

// Approximate bytes held by decoupling_ratios at peak.
inline double decoupling_memory_bytes(double delta, int trials, const DecouplingOptions& opt = {}) {
  auto weight = DecouplingWeight::for_delta(delta);
  auto lat = Lattice::covering(weight.cutoff_radius, opt.lattice_spacing);
  double side = lat.side(), caps = 1 / delta;
  double per_cap_nodes = 32.0 * detail::panel_count(delta, weight.cutoff_radius * std::sqrt(2.0), 1.0, opt.min_nodes_per_cell);
  double tables = caps * per_cap_nodes * side * 16;
  double block = (2 * caps + trials) * opt.block_rows * side * 16 * thread_count();
  return tables + block;
}

// ||(E_R1 g1 E_R2 g2)^{1/2}||_{L^4(lattice)} / (||g1||_2 ||g2||_2)^{1/2}.
inline double bilinear_ratio(const Coefficients& g1, const Coefficients& g2, double nu, const Lattice& lat,
                             int min_nodes_per_cell = 32) {
  require(nu > 0, "nu must be positive");
  if (interval_distance(g1.support, g2.support) < nu) throw Error("transversality");
  double n1 = g1.l2_norm(), n2 = g2.l2_norm();
  if (n1 == 0 || n2 == 0) return 0.0;
  double max_norm = lat.extent() * std::sqrt(2.0);
  auto a = detail::coefficient_nodes(g1, max_norm, min_nodes_per_cell, [](std::size_t) { return 0; }, 2);
  auto b = detail::coefficient_nodes(g2, max_norm, min_nodes_per_cell, [](std::size_t) { return 1; }, 2);
  a.xi.insert(a.xi.end(), b.xi.begin(), b.xi.end());
  a.weight.insert(a.weight.end(), b.weight.begin(), b.weight.end());
  a.group.insert(a.group.end(), b.group.begin(), b.group.end());
  const int block_rows = 16, side = lat.side();
  std::vector<double> partial((side + block_rows - 1) / block_rows, 0.0);
  detail::sweep_lattice(a, lat, block_rows, [&](int row0, int, const std::vector<Eigen::MatrixXcd>& f) {
    partial[row0 / block_rows] = (f[0].array() * f[1].array()).abs2().sum();
  });
  double s = 0;
  for (double v : partial) s += v;
  return std::pow(s * lat.cell_area(), 0.25) / std::sqrt(n1 * n2);
}

namespace detail {

// Midpoint weights plateau(t) dt on [1/2, 3] with 2^level nodes, built once per level.
inline const std::vector<double>& plateau_table(int level) {
  constexpr int kLevels = 31;
  require(level >= 0 && level < kLevels, "node count out of range");
  static std::array<std::once_flag, kLevels> once;
  static std::array<std::vector<double>, kLevels> tables;
  std::call_once(once[level], [level] {
    std::size_t count = std::size_t{1} << level;
    double dt = 2.5 / static_cast<double>(count);
    auto& t = tables[level];
    t.resize(count);
    for (std::size_t j = 0; j < count; ++j) t[j] = cutoffs().plateau_bump(0.5 + (j + 0.5) * dt) * dt;
  });
  return tables[level];
}

}  // namespace detail

// int e^{-i u (t xi + t^alpha eta)} plateau(t) dt on [1/2, 3] by the midpoint rule, with a
// power-of-two node count at least 2.5 times the sampling rate of the phase.
inline cplx smoothing_multiplier(double xi, double eta, double u, double alpha) {
  double rate = u * (std::abs(xi) + alpha * std::pow(3.0, alpha - 1) * std::abs(eta));
  double want = std::max(256.0, 1.25 * 2.5 * rate / kPi);
  int level = std::max(8, static_cast<int>(std::ceil(std::log2(want))));
  const auto& w = detail::plateau_table(level);
  const std::size_t count = w.size();
  double dt = 2.5 / static_cast<double>(count);
  cplx acc = 0;
  if (alpha == 2) {
    // Quadratic phase: constant second difference, re-anchored every 64 nodes.
    double t0 = 0.5 + 0.5 * dt;
    cplx z, step, curve = std::polar(1.0, -u * eta * 2 * dt * dt);
    for (std::size_t j = 0; j < count; ++j) {
      if (j % 64 == 0) {
        double t = t0 + j * dt;
        z = std::polar(1.0, -u * (t * xi + t * t * eta));
        step = std::polar(1.0, -u * (dt * xi + (2 * t * dt + dt * dt) * eta));
      }
      acc += w[j] * z;
      z *= step;
      step *= curve;
    }
  } else {
    for (std::size_t j = 0; j < count; ++j) {
      double t = 0.5 + (j + 0.5) * dt;
      acc += w[j] * std::polar(1.0, -u * (t * xi + std::pow(t, alpha) * eta));
    }
  }
  return acc;
}

inline std::vector<double> smoothing_ladder(int u_samples) {
  require(u_samples >= 2, "u ladder needs at least two samples");
  std::vector<double> u(u_samples);
  for (int i = 0; i < u_samples; ++i) u[i] = 1 + static_cast<double>(i) / (u_samples - 1);
  return u;
}

// sup over the u ladder of |A_u P_k f| for each input, sharing the multiplier tables.
inline std::vector<GridFunction> smoothing_sup(const std::vector<GridFunction>& fs, int k, double alpha,
                                               int u_samples) {
  require(!fs.empty(), "no input fields");
  const auto& grid = fs.front().grid;
  require(grid.dims == 2, "a 2D grid is required");
  require(alpha > 0 && alpha != 1, "alpha must be positive and not 1");
  if (!(u_samples > std::exp2(k) / 8)) throw Error("u-ladder under-resolved");
  detail::check_band(grid, 3 * std::exp2(k));
  const int n = grid.n_points;
  const double scale = std::exp2(k);

  // Frequencies where the projection can be nonzero, with the projection symbol folded in.
  std::vector<std::size_t> support;
  std::vector<double> cut;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double c = cutoffs().plateau_bump(std::hypot(grid.frequency(a), grid.frequency(b)) / scale);
      if (c > 0) {
        support.push_back(static_cast<std::size_t>(a) * n + b);
        cut.push_back(c);
      }
    }
  std::vector<std::vector<cplx>> specs;
  for (const auto& f : fs) {
    require(f.grid == grid, "inputs must share a grid");
    specs.push_back(spectrum(f));
  }
  std::vector<std::vector<double>> sup(fs.size(), std::vector<double>(grid.size(), 0.0));
  // The weight is real, so the symbol at -zeta is the conjugate of the symbol at zeta.
  std::vector<long> where(grid.size(), -1);
  for (std::size_t i = 0; i < support.size(); ++i) where[support[i]] = static_cast<long>(i);
  std::vector<std::size_t> lead, mirror;
  for (std::size_t i = 0; i < support.size(); ++i) {
    std::size_t idx = support[i];
    std::size_t a = idx / n, b = idx % n, m = ((n - a) % n) * n + (n - b) % n;
    if (where[m] < 0 || m >= idx) {
      lead.push_back(i);
      mirror.push_back(where[m] < 0 || m == idx ? i : static_cast<std::size_t>(where[m]));
    }
  }
  std::vector<cplx> mult(support.size());
  for (double u : smoothing_ladder(u_samples)) {
    parallel_for(lead.size(), [&](std::size_t q) {
      std::size_t i = lead[q], idx = support[i];
      int a = static_cast<int>(idx / n), b = static_cast<int>(idx % n);
      cplx m = smoothing_multiplier(grid.frequency(a), grid.frequency(b), u, alpha);
      mult[i] = cut[i] * m;
      if (mirror[q] != i) mult[mirror[q]] = cut[mirror[q]] * std::conj(m);
    });
    parallel_for(fs.size(), [&](std::size_t t) {
      std::vector<cplx> s(grid.size(), cplx(0, 0));
      for (std::size_t i = 0; i < support.size(); ++i) s[support[i]] = specs[t][support[i]] * mult[i];
      auto au = from_spectrum(grid, std::move(s));
      for (std::size_t j = 0; j < au.samples.size(); ++j) sup[t][j] = std::max(sup[t][j], std::abs(au.samples[j]));
    });
  }
  std::vector<GridFunction> out;
  for (auto& s : sup) {
    GridFunction g(grid);
    for (std::size_t j = 0; j < s.size(); ++j) g.samples[j] = s[j];
    out.push_back(std::move(g));
  }
  return out;
}

// Per-trial ||sup_u |A_u P_k f|||_p / ||P_k f||_p for random annulus-2^k fields; trial t uses stream t.
inline std::vector<double> local_smoothing_ratios(int k, double p, double alpha, int u_samples, const TorusGrid& grid,
                                                  int trials, std::uint64_t seed) {
  require(grid.dims == 2, "a 2D grid is required");
  require(p > 2, "p must exceed 2");
  require(trials >= 1, "at least one trial is required");
  if (!(u_samples > std::exp2(k) / 8)) throw Error("u-ladder under-resolved");
  detail::check_band(grid, 3 * std::exp2(k));
  std::vector<GridFunction> fs;
  for (int t = 0; t < trials; ++t)
    fs.push_back(project_annulus(random_field(grid, seed, Band::annulus(k), static_cast<std::uint64_t>(t)), k));
  for (const auto& f : fs) require(norm_lp(f, p) > 0, "empty band");
  auto sups = smoothing_sup(fs, k, alpha, u_samples);
  std::vector<double> out(trials);
  for (int t = 0; t < trials; ++t) out[t] = norm_lp(sups[t], p) / norm_lp(fs[t], p);
  return out;
}

// Max over trials of local_smoothing_ratios.
inline double local_smoothing_decay(int k, double p, double alpha, int u_samples, const TorusGrid& grid, int trials,
                                    std::uint64_t seed) {
  auto r = local_smoothing_ratios(k, p, alpha, u_samples, grid, trials, seed);
  return *std::max_element(r.begin(), r.end());
}

}  // namespace curvelab
