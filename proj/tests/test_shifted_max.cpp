#include <gtest/gtest.h>

#include "curvelab/shifted_max.hpp"

using namespace curvelab;

namespace {

// Enumerates every dyadic interval containing x explicitly.
std::vector<double> brute_shifted_max(const std::vector<double>& f, long long n) {
  long long len = static_cast<long long>(f.size());
  std::vector<double> out(len, 0.0);
  for (long long x = 0; x < len; ++x) {
    for (int level = 0; (1LL << level) <= len; ++level) {
      auto I = DyadicInterval::containing(x, level).shifted(n);
      double s = 0;
      for (long long y = I.begin(); y < I.end(); ++y)
        if (y >= 0 && y < len) s += std::abs(f[y]);
      out[x] = std::max(out[x], s / I.length());
    }
  }
  return out;
}

// Dyadic Hardy-Littlewood maximal function: max over nested aligned blocks.
std::vector<double> dyadic_hl(const std::vector<double>& f) {
  std::size_t len = f.size();
  std::vector<double> out(len, 0.0);
  for (std::size_t x = 0; x < len; ++x) {
    for (std::size_t w = 1; w <= len; w *= 2) {
      std::size_t start = x / w * w;
      double s = 0;
      for (std::size_t y = start; y < start + w; ++y) s += f[y];
      out[x] = std::max(out[x], s / w);
    }
  }
  return out;
}

std::vector<double> random_nonneg(std::size_t len, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<double> v(len);
  for (auto& x : v) x = rng.uniform();
  return v;
}

}  // namespace

TEST(Dyadic, ShiftInvolution) {
  for (int level = 0; level < 6; ++level)
    for (long long m = -20; m <= 20; ++m)
      for (long long n = -9; n <= 9; ++n) {
        DyadicInterval I{level, m};
        EXPECT_EQ(I.shifted(n).shifted(-n), I);
        EXPECT_EQ(I.shifted(n).length(), I.length());
        EXPECT_EQ(I.shifted(n).begin(), I.begin() - n * I.length());
      }
  EXPECT_TRUE(DyadicInterval::containing(-1, 2).contains(-1));
  EXPECT_TRUE(DyadicInterval::containing(13, 3).contains(13));
}

TEST(ShiftedMax, UnitCellCellByCell) {
  std::vector<double> f(8, 0.0);
  f[5] = 1;
  auto out = shifted_max_1d(f, 0);
  auto ref = brute_shifted_max(f, 0);
  for (int x = 0; x < 8; ++x) EXPECT_DOUBLE_EQ(out[x], ref[x]);
  EXPECT_DOUBLE_EQ(out[5], 1.0);
  EXPECT_DOUBLE_EQ(out[4], 0.5);
  EXPECT_DOUBLE_EQ(out[6], 0.25);
  EXPECT_DOUBLE_EQ(out[0], 0.125);
}

TEST(ShiftedMax, MatchesBruteForceForShifts) {
  for (long long n : {-5LL, -1LL, 0LL, 1LL, 2LL, 3LL, 7LL, 40LL}) {
    auto f = random_nonneg(32, 100 + n);
    auto out = shifted_max_1d(f, n);
    auto ref = brute_shifted_max(f, n);
    for (std::size_t x = 0; x < f.size(); ++x) EXPECT_NEAR(out[x], ref[x], 1e-14);
  }
}

TEST(ShiftedMax, ZeroAndBounds) {
  std::vector<double> z(16, 0.0);
  for (double v : shifted_max_1d(z, 3)) EXPECT_EQ(v, 0.0);
  auto f = random_nonneg(64, 3);
  double fmax = *std::max_element(f.begin(), f.end());
  for (long long n : {0LL, 1LL, 5LL, -9LL})
    for (double v : shifted_max_1d(f, n)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, fmax + 1e-15);
    }
}

TEST(ShiftedMax, AgreesWithDyadicHardyLittlewood) {
  for (int t = 0; t < 10; ++t) {
    auto f = random_nonneg(128, 50 + t);
    auto out = shifted_max_1d(f, 0);
    auto ref = dyadic_hl(f);
    for (std::size_t x = 0; x < f.size(); ++x) EXPECT_NEAR(out[x], ref[x], 1e-14);
  }
}

TEST(ShiftedMax, Monotone) {
  auto f = random_nonneg(64, 7), g = random_nonneg(64, 8);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += f[i];
  for (long long n : {0LL, 2LL, -3LL}) {
    auto a = shifted_max_1d(f, n), b = shifted_max_1d(g, n);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(a[i], b[i] + 1e-15);
  }
}

TEST(ShiftedMax, PeriodicWraps) {
  std::vector<double> f(8, 0.0);
  f[0] = 1;
  auto out = shifted_max_1d(f, 1, Boundary::periodic);
  EXPECT_DOUBLE_EQ(out[1], 1.0);  // cell 1 shifted by one cell lands on cell 0
  auto wrapped = shifted_max_1d(f, -7, Boundary::periodic);
  EXPECT_DOUBLE_EQ(wrapped[1], 1.0);
}

TEST(ShiftedMax2d, DyadicRectangleAndSeparable) {
  auto g = make_grid(8, 1.0, 2);
  GridFunction f(g);
  for (int i = 4; i < 8; ++i)
    for (int j = 2; j < 4; ++j) f.at(i, j) = 1;
  auto out = shifted_max_2d(f, 0, 0);
  for (int i = 4; i < 8; ++i)
    for (int j = 2; j < 4; ++j) EXPECT_DOUBLE_EQ(out.at(i, j).real(), 1.0);

  auto a = random_nonneg(8, 1), b = random_nonneg(8, 2);
  GridFunction s(g);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) s.at(i, j) = a[i] * b[j];
  auto ma = shifted_max_1d(a, 2), mb = shifted_max_1d(b, -1);
  auto ms = shifted_max_2d(s, 2, -1);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_NEAR(ms.at(i, j).real(), ma[i] * mb[j], 1e-14);
}

TEST(ShiftedMax2d, BruteForceDoubleApplication) {
  auto g = make_grid(8, 1.0, 2);
  GridFunction f(g);
  CounterRng rng(77, 0);
  for (auto& v : f.samples) v = rng.uniform();
  auto out = shifted_max_2d(f, 2, 3);
  std::vector<std::vector<double>> rows(8, std::vector<double>(8));
  for (int i = 0; i < 8; ++i) {
    std::vector<double> r(8);
    for (int j = 0; j < 8; ++j) r[j] = f.at(i, j).real();
    rows[i] = brute_shifted_max(r, 3);
  }
  for (int j = 0; j < 8; ++j) {
    std::vector<double> c(8);
    for (int i = 0; i < 8; ++i) c[i] = rows[i][j];
    auto mc = brute_shifted_max(c, 2);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(out.at(i, j).real(), mc[i], 1e-14);
  }
}

TEST(VectorValued, Errors) {
  std::vector<std::vector<double>> zero(3, std::vector<double>(16, 0.0));
  EXPECT_THROW(vv_norm_ratio(zero, 2, 2, 2), Error);
}

TEST(VectorValued, ConstantArrayAtMostOne) {
  std::vector<std::vector<double>> fam{std::vector<double>(64, 2.5)};
  for (long long n : {0LL, 1LL, 4LL, 30LL}) EXPECT_LE(vv_norm_ratio(fam, n, 2, 2), 1.0 + 1e-14);
}

TEST(VectorValued, LogSquaredEnvelopeSmall) {
  std::vector<std::vector<double>> fam;
  for (int k = 0; k < 6; ++k) fam.push_back(random_nonneg(256, 900 + k));
  double r1 = vv_norm_ratio(fam, 1, 2, 2);
  double base = r1 / std::pow(std::log(3.0), 2);
  for (long long n : {1LL, 2LL, 4LL, 16LL, 64LL}) {
    double r = vv_norm_ratio(fam, n, 2, 2);
    EXPECT_LE(r / std::pow(std::log(2.0 + n), 2), 3 * base);
  }
}
