#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "curvelab/quadrature.hpp"

using namespace curvelab;
using cplx = std::complex<double>;

namespace {

cplx kronrod(const std::function<double(double)>& phase, const std::function<double(double)>& w,
             double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  auto re = [&](double t) { return w(t) * std::cos(phase(t)); };
  auto im = [&](double t) { return w(t) * std::sin(phase(t)); };
  double err;
  return {gauss_kronrod<double, 61>::integrate(re, a, b, 15, 1e-12, &err),
          gauss_kronrod<double, 61>::integrate(im, a, b, 15, 1e-12, &err)};
}

}  // namespace

TEST(GaussLegendre, IntegratesPolynomials) {
  auto r = quad::gauss_legendre(16);
  double sum = 0;
  for (double w : r.weights) sum += w;
  EXPECT_NEAR(sum, 2.0, 1e-14);
  for (int d = 0; d <= 31; ++d) {
    double s = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
    double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
    EXPECT_NEAR(s, exact, 1e-14) << d;
  }
}

TEST(Integrate, SlowPhaseAgainstKronrod) {
  auto phase = [](double t) { return 3 * t * t; };
  auto dphase = [](double t) { return 6 * t; };
  auto w = [](double t) { return std::exp(-t) / (1 + t * t); };
  cplx v = quad::integrate(phase, dphase, w, {-1.0, 2.0});
  cplx ref = kronrod(phase, w, -1, 2);
  EXPECT_LT(std::abs(v - ref), 1e-12);
}

TEST(Integrate, FastLinearPhaseClosedForm) {
  for (double lam : {50.0, 1e3, 1e6, 1e9}) {
    auto phase = [&](double t) { return lam * t; };
    auto dphase = [&](double) { return lam; };
    auto w = [](double) { return 1.0; };
    cplx v = quad::integrate(phase, dphase, w, {1.0, 2.0});
    cplx exact = (std::polar(1.0, 2 * lam) - std::polar(1.0, lam)) / cplx(0, lam);
    EXPECT_LT(std::abs(v - exact), 1e-11 * std::abs(exact)) << lam;
  }
}

TEST(Integrate, StationaryPointAgainstKronrod) {
  double lam = 400;
  auto phase = [&](double t) { return lam * (t - 0.3) * (t - 0.3); };
  auto dphase = [&](double t) { return 2 * lam * (t - 0.3); };
  auto w = [](double t) { return std::cos(t); };
  cplx v = quad::integrate(phase, dphase, w, {-1.0, 1.0});
  cplx ref = kronrod(phase, w, -1, 1);
  EXPECT_LT(std::abs(v - ref), 1e-10);
}
