#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <functional>
#include <tuple>

#include "curvelab/decoupling.hpp"

using namespace curvelab;

namespace {

using boost::math::quadrature::gauss_kronrod;

cplx kronrod_extension(const std::function<cplx(double)>& g, Interval iv, Point2 x) {
  auto re = [&](double xi) { return (g(xi) * std::polar(1.0, x[0] * xi + x[1] * xi * xi)).real(); };
  auto im = [&](double xi) { return (g(xi) * std::polar(1.0, x[0] * xi + x[1] * xi * xi)).imag(); };
  return {gauss_kronrod<double, 61>::integrate(re, iv.lo, iv.hi, 15, 1e-13),
          gauss_kronrod<double, 61>::integrate(im, iv.lo, iv.hi, 15, 1e-13)};
}

std::vector<Point2> random_points(std::uint64_t seed, int count, double radius) {
  CounterRng rng(seed, 0);
  std::vector<Point2> pts(count);
  for (auto& p : pts) p = {radius * (2 * rng.uniform() - 1), radius * (2 * rng.uniform() - 1)};
  return pts;
}

cplx smooth_g(double xi) { return cplx(std::cos(3 * xi), std::sin(xi * xi)) * (1 + xi); }

std::vector<Point2> lattice_points(const Lattice& lat) {
  std::vector<Point2> pts;
  for (int i = 0; i < lat.side(); ++i)
    for (int j = 0; j < lat.side(); ++j) pts.push_back({lat.coord(j), lat.coord(i)});
  return pts;
}

// Extension of piecewise constant coefficients, one smooth integral per cell inside `part`.
std::vector<cplx> cellwise_extension(const Coefficients& g, Interval part, const std::vector<Point2>& pts) {
  std::vector<cplx> out(pts.size(), 0.0);
  for (std::size_t c = 0; c < g.values.size(); ++c) {
    auto cell = g.cell(c);
    if (cell.lo < part.lo || cell.hi > part.hi || g.values[c] == cplx(0)) continue;
    auto v = extension([](double) { return cplx(1); }, cell, pts, 256);
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] += g.values[c] * v[i];
  }
  return out;
}

double weighted_norm(const std::vector<cplx>& vals, const std::vector<Point2>& pts, const DecouplingWeight& w,
                     double area, double p) {
  double s = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += w(pts[i][0], pts[i][1]) * std::pow(std::abs(vals[i]), p);
  return std::pow(s * area, 1 / p);
}

}  // namespace

TEST(Caps, CoverAndCount) {
  for (double d : {1.0, 0.5, 0.125, 1.0 / 32}) {
    auto c = make_caps(d);
    ASSERT_EQ(c.caps.size(), static_cast<std::size_t>(std::llround(1 / d)));
    EXPECT_EQ(c.caps.front().lo, 0.0);
    EXPECT_EQ(c.caps.back().hi, 1.0);
    for (std::size_t m = 1; m < c.caps.size(); ++m) EXPECT_EQ(c.caps[m].lo, c.caps[m - 1].hi);
    EXPECT_EQ(c.cap_of(0.999), c.caps.size() - 1);
  }
  EXPECT_THROW(make_caps(0.3), Error);
  EXPECT_THROW(make_caps(0), Error);
  EXPECT_THROW(make_caps(2), Error);
}

TEST(Weight, RangeAndMonotone) {
  auto w = DecouplingWeight::for_delta(0.25, {3, -2});
  EXPECT_EQ(w(3, -2), 1.0);
  EXPECT_EQ(w.cutoff_radius, 64.0);
  double prev = 1;
  for (double r = 0; r <= 64; r += 0.5) {
    double v = w(3 + r, -2);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_EQ(w(3 + 65, -2), 0.0);
}

TEST(Extension, TrivialCases) {
  auto pts = random_points(1, 20, 30);
  for (auto v : extension([](double) { return cplx(0); }, {0, 1}, pts)) EXPECT_EQ(v, cplx(0));
  auto one = extension([](double) { return cplx(1); }, {0, 1}, {{0, 0}});
  EXPECT_NEAR(std::abs(one[0] - cplx(1)), 0.0, 1e-15);
  EXPECT_THROW(extension(smooth_g, {0.5, 0.5}, pts), Error);
  // Modulus bound.
  double l1 = gauss_kronrod<double, 61>::integrate([](double x) { return std::abs(smooth_g(x)); }, 0, 1, 15, 1e-13);
  for (auto v : extension(smooth_g, {0, 1}, pts)) EXPECT_LE(std::abs(v), l1 * (1 + 1e-12));
}

TEST(Extension, MatchesKronrod) {
  auto pts = random_points(2, 30, 60);
  auto vals = extension(smooth_g, {0.25, 0.75}, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    EXPECT_LT(std::abs(vals[i] - kronrod_extension(smooth_g, {0.25, 0.75}, pts[i])), 1e-11);
}

TEST(Extension, LinearOverCaps) {
  auto pts = random_points(3, 100, 200);
  auto whole = extension(smooth_g, {0, 1}, pts);
  std::vector<cplx> sum(pts.size(), 0.0);
  for (const auto& cap : make_caps(0.125).caps) {
    auto part = extension(smooth_g, cap, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) sum[i] += part[i];
  }
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(whole[i] - sum[i]), 1e-12);
}

TEST(Extension, ParabolicRescaling) {
  const double d = 0.25;
  auto pts = random_points(4, 20, 100);
  auto small = extension(smooth_g, {0, d}, pts);
  std::vector<Point2> sheared;
  for (auto p : pts) sheared.push_back({d * p[0], d * d * p[1]});
  auto big = extension([&](double x) { return smooth_g(d * x); }, {0, 1}, sheared);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(small[i] - d * big[i]), 1e-10);
}

TEST(Decoupling, SingleCapAndOneCap) {
  Coefficients g{{0, 1}, std::vector<cplx>(8, 0.0)};
  g.values[5] = cplx(0.3, -1.2);
  EXPECT_NEAR(decoupling_ratio(g, 0.125, 4), 1.0, 1e-12);
  EXPECT_NEAR(decoupling_ratio(g, 0.125, 3), 1.0, 1e-12);
  auto r = Coefficients::gaussian({0, 1}, 4, 9, 0);
  EXPECT_NEAR(decoupling_ratio(r, 1.0, 4), 1.0, 1e-12);
  Coefficients zero{{0, 1}, std::vector<cplx>(4, 0.0)};
  EXPECT_THROW(decoupling_ratio(zero, 0.25, 4), Error);
  EXPECT_THROW(decoupling_ratio(r, 0.25, 5), Error);
}

TEST(Decoupling, PhaseAndScaleInvariant) {
  auto g = Coefficients::gaussian({0, 1}, 8, 21, 0);
  double base = decoupling_ratio(g, 0.25, 4);
  auto h = g;
  for (auto& v : h.values) v *= std::polar(3.5, 1.1);
  EXPECT_NEAR(decoupling_ratio(h, 0.25, 4), base, 1e-12 * base);
}

TEST(Decoupling, MatchesDirectEvaluation) {
  const double delta = 0.5, p = 3;
  auto g = Coefficients::gaussian({0, 1}, 4, 13, 0);
  auto w = DecouplingWeight::for_delta(delta);
  auto lat = Lattice::covering(w.cutoff_radius, 1);
  auto pts = lattice_points(lat);
  double num = weighted_norm(cellwise_extension(g, {0, 1}, pts), pts, w, lat.cell_area(), p), den = 0;
  for (const auto& cap : make_caps(delta).caps)
    den += std::pow(weighted_norm(cellwise_extension(g, cap, pts), pts, w, lat.cell_area(), p), 2);
  double ref = num / std::sqrt(den);
  EXPECT_NEAR(decoupling_ratio(g, delta, p), ref, 1e-9 * ref);
}

TEST(Decoupling, RandomModeIsSeeded) {
  double a = decoupling_ratio_random(0.25, 4, 6, 77), b = decoupling_ratio_random(0.25, 4, 6, 77);
  EXPECT_EQ(a, b);
  EXPECT_GT(a, 0.0);
  EXPECT_LE(a, 2.0);  // at most sqrt(#caps)
}

TEST(Bilinear, TrivialAndSymmetric) {
  auto lat = Lattice::covering(16, 1);
  auto g1 = Coefficients::gaussian({0, 0.25}, 8, 3, 0), g2 = Coefficients::gaussian({0.5, 0.75}, 8, 3, 1);
  Coefficients zero{{0, 0.25}, std::vector<cplx>(8, 0.0)};
  EXPECT_EQ(bilinear_ratio(zero, g2, 0.25, lat), 0.0);
  EXPECT_NEAR(bilinear_ratio(g1, g2, 0.25, lat), bilinear_ratio(g2, g1, 0.25, lat), 1e-13);
  EXPECT_THROW(bilinear_ratio(g1, g2, 0.3, lat), Error);
  auto close = Coefficients::gaussian({0.3, 0.5}, 8, 3, 2);
  EXPECT_THROW(bilinear_ratio(g1, close, 0.1, lat), Error);
}

TEST(Bilinear, MatchesDirectEvaluation) {
  auto lat = Lattice::covering(8, 0.5);
  auto g1 = Coefficients::gaussian({0, 0.25}, 8, 4, 0), g2 = Coefficients::gaussian({0.5, 0.75}, 8, 4, 1);
  auto pts = lattice_points(lat);
  auto e1 = cellwise_extension(g1, g1.support, pts), e2 = cellwise_extension(g2, g2.support, pts);
  double s = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += std::norm(e1[i] * e2[i]);
  double ref = std::pow(s * lat.cell_area(), 0.25) / std::sqrt(g1.l2_norm() * g2.l2_norm());
  EXPECT_NEAR(bilinear_ratio(g1, g2, 0.25, lat), ref, 1e-6 * ref);
}

TEST(LocalSmoothing, MultiplierMatchesKronrod) {
  for (auto [xi, eta, u] : {std::tuple{40.0, -12.0, 1.3}, std::tuple{-300.0, 200.0, 1.9}, std::tuple{0.0, 5.0, 1.0}}) {
    for (double alpha : {2.0, 2.5}) {
      auto ph = [&](double t) { return -u * (t * xi + std::pow(t, alpha) * eta); };
      auto w = [](double t) { return cutoffs().plateau_bump(t); };
      double re = 0, im = 0;
      for (auto [a, b] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}, std::pair{2.0, 3.0}}) {
        re += gauss_kronrod<double, 61>::integrate([&](double t) { return w(t) * std::cos(ph(t)); }, a, b, 15, 1e-13);
        im += gauss_kronrod<double, 61>::integrate([&](double t) { return w(t) * std::sin(ph(t)); }, a, b, 15, 1e-13);
      }
      EXPECT_LT(std::abs(smoothing_multiplier(xi, eta, u, alpha) - cplx(re, im)), 1e-9) << xi << " " << alpha;
    }
  }
}

TEST(LocalSmoothing, PlaneWaveSupIsMaxOfSymbol) {
  auto g = make_grid(64, 2 * kPi, 2);
  const int k = 3;
  double xi = 6, eta = -7;  // radius ~9.2, inside the plateau [8, 16]
  auto f = sample(g, [&](double x, double y) { return std::polar(1.0, xi * x + eta * y); });
  auto sup = smoothing_sup({f}, k, 2, 9).front();
  double expect = 0;
  for (double u : smoothing_ladder(9)) expect = std::max(expect, std::abs(smoothing_multiplier(xi, eta, u, 2)));
  for (auto v : sup.samples) EXPECT_NEAR(v.real(), expect, 1e-10);
}

TEST(LocalSmoothing, ErrorsAndBounds) {
  auto g = make_grid(64, 2 * kPi, 2);
  EXPECT_THROW(local_smoothing_decay(3, 4, 2, 1, g, 1, 0), Error);  // ladder under-resolved
  EXPECT_THROW(local_smoothing_decay(3, 2, 2, 8, g, 1, 0), Error);
  EXPECT_THROW(local_smoothing_decay(5, 4, 2, 8, g, 1, 0), Error);  // band out of range
  auto coarse = make_grid(16, kPi / 2, 2);  // spacing 4: nothing near radius 1
  EXPECT_THROW(local_smoothing_decay(0, 4, 2, 4, coarse, 1, 0), Error);
  double r = local_smoothing_decay(3, 4, 2, 8, g, 2, 5);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 2.5);  // the symbol is bounded by the mass of the plateau bump
  EXPECT_EQ(r, local_smoothing_decay(3, 4, 2, 8, g, 2, 5));
}
