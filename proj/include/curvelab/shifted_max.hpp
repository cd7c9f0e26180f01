#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "curvelab/grid.hpp"

namespace curvelab {

// [2^level * index, 2^level * (index + 1))
struct DyadicInterval {
  int level = 0;
  long long index = 0;

  long long begin() const { return index << level; }
  long long end() const { return (index + 1) << level; }
  long long length() const { return 1LL << level; }
  DyadicInterval shifted(long long n) const { return {level, index - n}; }
  bool contains(long long x) const { return x >= begin() && x < end(); }
  bool operator==(const DyadicInterval&) const = default;

  static DyadicInterval containing(long long x, int level) {
    long long len = 1LL << level;
    long long m = x >= 0 ? x / len : -((-x + len - 1) / len);
    return {level, m};
  }
};

enum class Boundary {
  zero,      // outside mass is zero, normalization stays |I|
  periodic,  // the array is one period
};

// Max over dyadic levels of the mean of |f| over I^(n), I the level interval containing x.
inline std::vector<double> shifted_max_1d(std::span<const double> f, long long n,
                                          Boundary boundary = Boundary::zero) {
  const long long len = static_cast<long long>(f.size());
  require(is_power_of_two(len), "array length must be a power of two");
  // Block sums built pairwise, so a mean never exceeds the block maximum.
  std::vector<double> block(f.size());
  for (long long i = 0; i < len; ++i) block[i] = std::abs(f[i]);
  std::vector<double> out(f.size(), 0.0);
  for (long long width = 1, count = len; count >= 1; width *= 2, count /= 2) {
    for (long long m = 0; m < count; ++m) {
      long long src = m - n;
      if (boundary == Boundary::periodic) src = ((src % count) + count) % count;
      double value = (src >= 0 && src < count) ? block[src] / static_cast<double>(width) : 0.0;
      for (long long x = m * width; x < (m + 1) * width; ++x) out[x] = std::max(out[x], value);
    }
    for (long long m = 0; m < count / 2; ++m) block[m] = block[2 * m] + block[2 * m + 1];
  }
  return out;
}

// M_1^(n1) applied after M_2^(n2), on |f|.
inline GridFunction shifted_max_2d(const GridFunction& f, double n1, double n2,
                                   Boundary boundary = Boundary::zero) {
  require(f.grid.dims == 2, "a 2D grid function is required");
  int n = f.n();
  long long s1 = std::llround(n1), s2 = std::llround(n2);
  std::vector<double> tmp(f.samples.size());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ix) {
    std::vector<double> row(n);
    for (int iy = 0; iy < n; ++iy) row[iy] = std::abs(f.at(static_cast<int>(ix), iy));
    auto r = shifted_max_1d(row, s2, boundary);
    std::copy(r.begin(), r.end(), tmp.begin() + ix * n);
  });
  GridFunction out(f.grid);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t iy) {
    std::vector<double> col(n);
    for (int ix = 0; ix < n; ++ix) col[ix] = tmp[static_cast<std::size_t>(ix) * n + iy];
    auto c = shifted_max_1d(col, s1, boundary);
    for (int ix = 0; ix < n; ++ix) out.at(ix, static_cast<int>(iy)) = c[ix];
  });
  return out;
}

// ||(sum_k (M^(n) f_k)^q)^{1/q}||_p / ||(sum_k |f_k|^q)^{1/q}||_p, q = inf uses max.
inline double vv_norm_ratio(const std::vector<std::vector<double>>& family, long long n, double p,
                            double q) {
  require(!family.empty(), "trivial family");
  require(p > 1 && std::isfinite(p), "p must lie in (1, inf)");
  require(q > 1, "q must lie in (1, inf]");
  std::size_t len = family.front().size();
  std::vector<double> num(len, 0.0), den(len, 0.0);
  for (const auto& fk : family) {
    require(fk.size() == len, "family arrays must share a length");
    auto mk = shifted_max_1d(fk, n);
    for (std::size_t i = 0; i < len; ++i) {
      double a = mk[i], b = std::abs(fk[i]);
      if (std::isinf(q)) {
        num[i] = std::max(num[i], a);
        den[i] = std::max(den[i], b);
      } else {
        num[i] += std::pow(a, q);
        den[i] += std::pow(b, q);
      }
    }
  }
  double sn = 0, sd = 0;
  for (std::size_t i = 0; i < len; ++i) {
    double a = std::isinf(q) ? num[i] : std::pow(num[i], 1.0 / q);
    double b = std::isinf(q) ? den[i] : std::pow(den[i], 1.0 / q);
    sn += std::pow(a, p);
    sd += std::pow(b, p);
  }
  if (sd == 0) throw Error("trivial family");
  return std::pow(sn / sd, 1.0 / p);
}

}  // namespace curvelab
