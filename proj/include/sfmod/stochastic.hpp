#pragma once

// Monte-Carlo walker oracle for the storage propagator.
//
// Each walker starts on a pixel centre r0 drawn with probability |psi(r0)| / sum|psi|,
// carries the weight (psi(r0)/|psi(r0)|) exp(-i k.r0) sum|psi| / n, takes one Gaussian
// displacement of variance 2 D t per axis, and is deposited at rf with the weight
// multiplied by exp(+i k.rf) using bilinear splatting on the periodic grid.
//
// Random numbers come from a counter-based generator keyed by (seed, walker, stream),
// so walker i sees the same draws regardless of how walkers are split across workers.

#include <sfmod/detail/parallel.hpp>
#include <sfmod/fieldcore.hpp>
#include <sfmod/propagator.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace sfmod {

namespace rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ splitmix64(index)) + stream * 0xD1B54A32D192ED03ULL);
}

/// Uniform double in [0, 1).
constexpr double uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  return static_cast<double>(counter_hash(seed, index, stream) >> 11) * 0x1.0p-53;
}

/// Pair of independent standard normals (Box-Muller).
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index) {
  const double u1 = 1.0 - uniform(seed, index, 1);  // (0, 1]
  const double u2 = uniform(seed, index, 2);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace rng

struct WalkerEnsemble {
  std::uint64_t seed = 0;
  StorageParams params;
  std::vector<Vec2> start;        // r0
  std::vector<Vec2> end;          // rf, not wrapped
  std::vector<cplx> base_weight;  // k-independent part: phase(psi(r0)) sum|psi| / n
  std::vector<cplx> weight;       // base_weight * gauge_factor(k, r0, rf)

  std::size_t n_walkers() const { return start.size(); }
};

/// exp(-i k.r0) exp(+i k.rf); exactly 1 for k = 0.
inline cplx gauge_factor(Vec2 k, Vec2 r0, Vec2 rf) {
  return std::polar(1.0, -dot(k, r0)) * std::polar(1.0, dot(k, rf));
}

namespace detail {

class WalkerSource {
public:
  WalkerSource(const ComplexField& input, const StorageParams& p, std::size_t n, std::uint64_t seed)
      : grid_(input.grid()), values_(input.vector()), seed_(seed), sigma_(diffusion_length(p)),
        k_(kperp_from_angles(p)) {
    if (n < 1) throw invalid_input("mc_store: n_walkers must be >= 1");
    cdf_.resize(values_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      acc += std::abs(values_[i]);
      cdf_[i] = acc;
    }
    if (!(acc > 0.0)) throw invalid_input("mc_store: input field is identically zero (no sampling measure)");
    mass_per_walker_ = acc / static_cast<double>(n);
  }

  struct Walk {
    Vec2 start;
    Vec2 end;
    cplx base;
    cplx weight;
  };

  Walk walk(std::uint64_t i) const {
    const double target = rng::uniform(seed_, i, 0) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    if (it == cdf_.end()) --it;
    const auto pixel = static_cast<std::size_t>(it - cdf_.begin());
    const int ix = static_cast<int>(pixel % static_cast<std::size_t>(grid_.nx));
    const int iy = static_cast<int>(pixel / static_cast<std::size_t>(grid_.nx));
    const Vec2 r0 = grid_.position(ix, iy);
    const auto [gx, gy] = rng::normal_pair(seed_, i);
    const Vec2 rf{r0.x + sigma_ * gx, r0.y + sigma_ * gy};
    const cplx v = values_[pixel];
    const cplx base = (v / std::abs(v)) * mass_per_walker_;
    return {r0, rf, base, base * gauge_factor(k_, r0, rf)};
  }

  const GridSpec& grid() const { return grid_; }

private:
  GridSpec grid_;
  const std::vector<cplx>& values_;
  std::uint64_t seed_;
  double sigma_;
  Vec2 k_;
  std::vector<double> cdf_;
  double mass_per_walker_ = 0.0;
};

inline void splat(std::vector<cplx>& acc, const GridSpec& g, Vec2 r, cplx w) {
  const double fx = r.x / g.dx + g.nx / 2;
  const double fy = r.y / g.dy + g.ny / 2;
  const double x0 = std::floor(fx);
  const double y0 = std::floor(fy);
  const double ax = fx - x0;
  const double ay = fy - y0;
  auto wrap = [](double i, int n) {
    long v = static_cast<long>(i) % n;
    return static_cast<int>(v < 0 ? v + n : v);
  };
  const int ix0 = wrap(x0, g.nx);
  const int iy0 = wrap(y0, g.ny);
  const int ix1 = (ix0 + 1) % g.nx;
  const int iy1 = (iy0 + 1) % g.ny;
  acc[g.index(ix0, iy0)] += ((1 - ax) * (1 - ay)) * w;
  acc[g.index(ix1, iy0)] += (ax * (1 - ay)) * w;
  acc[g.index(ix0, iy1)] += ((1 - ax) * ay) * w;
  acc[g.index(ix1, iy1)] += (ax * ay) * w;
}

// Walkers are split into this many contiguous chunks, each with its own buffer,
// merged in chunk order. Fixing the chunk count (not the worker count) keeps the
// floating-point summation order, and hence the output bits, independent of threading.
inline constexpr std::size_t kChunks = 8;

template <class PerWalker>
std::vector<cplx> deposit_chunks(const GridSpec& g, std::size_t n, PerWalker&& per_walker) {
  const std::size_t chunks = std::min<std::size_t>(kChunks, n);
  std::vector<std::vector<cplx>> buffers(chunks);
  parallel_for(static_cast<int>(chunks), [&](int c0, int c1) {
    for (int c = c0; c < c1; ++c) {
      auto& buf = buffers[static_cast<std::size_t>(c)];
      buf.assign(g.size(), cplx{});
      const std::size_t begin = n * static_cast<std::size_t>(c) / chunks;
      const std::size_t end = n * (static_cast<std::size_t>(c) + 1) / chunks;
      for (std::size_t i = begin; i < end; ++i) {
        const auto [pos, w] = per_walker(i);
        splat(buf, g, pos, w);
      }
    }
  });
  std::vector<cplx> out(g.size(), cplx{});
  for (const auto& buf : buffers)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += buf[i];
  return out;
}

}  // namespace detail

inline WalkerEnsemble sample_walkers(const ComplexField& input, const StorageParams& p, std::size_t n,
                                     std::uint64_t seed) {
  p.validate();
  const detail::WalkerSource source(input, p, n, seed);
  WalkerEnsemble e;
  e.seed = seed;
  e.params = p;
  e.start.resize(n);
  e.end.resize(n);
  e.base_weight.resize(n);
  e.weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = source.walk(i);
    e.start[i] = w.start;
    e.end[i] = w.end;
    e.base_weight[i] = w.base;
    e.weight[i] = w.weight;
  }
  return e;
}

/// Bilinear deposition of an ensemble's final weights (same summation order as mc_store).
inline ComplexField deposit(const WalkerEnsemble& e, const GridSpec& g) {
  g.validate();
  auto out = detail::deposit_chunks(g, e.n_walkers(), [&](std::size_t i) {
    return std::pair{e.end[i], e.weight[i]};
  });
  return ComplexField(g, std::move(out));
}

inline ComplexField mc_store(const ComplexField& input, const StorageParams& p, std::size_t n_walkers,
                             std::uint64_t seed) {
  p.validate();
  const detail::WalkerSource source(input, p, n_walkers, seed);
  const GridSpec& g = input.grid();
  auto out = detail::deposit_chunks(g, n_walkers, [&](std::size_t i) {
    const auto w = source.walk(i);
    return std::pair{w.end, w.weight};
  });
  return ComplexField(g, std::move(out));
}

struct ConvergenceRow {
  std::size_t n = 0;
  double l2_error = 0.0;  // relative to store_spectral
};

inline std::vector<ConvergenceRow> mc_convergence(const ComplexField& input, const StorageParams& p,
                                                  const std::vector<std::size_t>& n_list, std::uint64_t seed) {
  if (n_list.empty()) throw invalid_input("mc_convergence: n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw invalid_input("mc_convergence: walker counts must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw invalid_input("mc_convergence: n_list must be ascending");
  }
  const ComplexField reference = store_spectral(input, p);
  std::vector<ConvergenceRow> rows;
  rows.reserve(n_list.size());
  for (std::size_t n : n_list) rows.push_back({n, relative_l2(mc_store(input, p, n, seed), reference)});
  return rows;
}

/// Least-squares slope of log(error) against log(n).
inline double loglog_slope(const std::vector<ConvergenceRow>& rows) {
  if (rows.size() < 2) throw invalid_input("loglog_slope: need at least two rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.l2_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace sfmod
