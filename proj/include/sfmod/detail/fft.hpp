#pragma once

// Thin RAII layer over FFTW. Plans are created once per (nx, ny, direction)
// with FFTW_ESTIMATE and reused through fftw_execute_dft, which is safe to call
// concurrently on distinct buffers. Only plan creation needs the lock.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace sfmod::detail {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : size(n), data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  std::size_t size;
  fftw_complex* data;
};

class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int nx, int ny, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(nx, ny, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    FftwBuffer scratch(static_cast<std::size_t>(nx) * ny);
    // Row-major: the slow index is y.
    fftw_plan plan =
        fftw_plan_dft_2d(ny, nx, scratch.data, scratch.data, sign, FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

/// Unnormalised in-place 2-D DFT of a row-major nx*ny array (wrap-around layout).
/// sign = FFTW_FORWARD (-1) or FFTW_BACKWARD (+1).
inline void dft2d(std::span<std::complex<double>> values, int nx, int ny, int sign) {
  fftw_plan plan = PlanCache::instance().get(nx, ny, sign);
  FftwBuffer buffer(values.size());
  std::memcpy(buffer.data, values.data(), sizeof(fftw_complex) * values.size());
  fftw_execute_dft(plan, buffer.data, buffer.data);
  std::memcpy(static_cast<void*>(values.data()), buffer.data, sizeof(fftw_complex) * values.size());
}

/// Swap quadrants so that index n/2 moves to 0 (even sizes: shift == inverse shift).
inline void swap_halves(std::span<std::complex<double>> values, int nx, int ny) {
  const int hx = nx / 2;
  const int hy = ny / 2;
  for (int iy = 0; iy < hy; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int jx = (ix + hx) % nx;
      const int jy = iy + hy;
      std::swap(values[static_cast<std::size_t>(iy) * nx + ix],
                values[static_cast<std::size_t>(jy) * nx + jx]);
    }
  }
}

}  // namespace sfmod::detail
