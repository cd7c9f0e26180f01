#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace curvelab::fft {

using cplx = std::complex<double>;

enum class Direction : int { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int, int, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

inline PlanCache& cache() {
  static PlanCache c;
  return c;
}

// Planning is serialized; execution through fftw_execute_dft on fresh arrays is
// thread-safe and bitwise reproducible for a given plan.
inline fftw_plan plan_for(int n, int howmany, int stride, int dist, Direction dir) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  auto key = std::make_tuple(n, howmany, stride, dist, static_cast<int>(dir));
  auto it = c.plans.find(key);
  if (it != c.plans.end()) return it->second;
  std::size_t extent = static_cast<std::size_t>(howmany - 1) * dist +
                       static_cast<std::size_t>(n - 1) * stride + 1;
  std::vector<cplx> scratch(extent);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  int dims[1] = {n};
  fftw_plan p = fftw_plan_many_dft(1, dims, howmany, buf, nullptr, stride, dist, buf, nullptr,
                                   stride, dist, static_cast<int>(dir),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  c.plans.emplace(key, p);
  return p;
}

}  // namespace detail

// Unnormalized in-place transforms of `howmany` interleaved length-n sequences.
inline void many(cplx* data, int n, int howmany, int stride, int dist, Direction dir) {
  fftw_plan p = detail::plan_for(n, howmany, stride, dist, dir);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
}

inline void line(cplx* data, int n, Direction dir) { many(data, n, 1, 1, n, dir); }

// Row-major n x n array, index ix * n + iy.
inline void along_y(cplx* data, int n, Direction dir) { many(data, n, n, 1, n, dir); }
inline void along_x(cplx* data, int n, Direction dir) { many(data, n, n, n, 1, dir); }

inline void plane(cplx* data, int n, Direction dir) {
  along_y(data, n, dir);
  along_x(data, n, dir);
}

}  // namespace curvelab::fft
