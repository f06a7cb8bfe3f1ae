#pragma once

// Storage propagator for a coherence diffusing under
//   d/dt psi = D (grad - i k)^2 psi,
// in four independent realisations:
//   store_spectral      filter exp(-D t |q - k|^2) applied in q-space (main path);
//   store_fd            explicit central-difference time stepping of the PDE;
//   store_green         real-space convolution with the gauged heat kernel;
//   two_point_solution  closed form for two delta sources.

#include <sfmod/detail/parallel.hpp>
#include <sfmod/fieldcore.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace sfmod {

struct StorageParams {
  double D = 25e-4;         // m^2/s
  double t = 3e-6;          // s
  double alpha = 0.0;       // rad, direction of k from the x axis
  double beta = 0.0;        // rad, control/probe angular deviation
  double lambda_c = 795e-9; // m

  void validate() const {
    if (!(D > 0.0) || !std::isfinite(D)) throw invalid_input("storage: D must be positive");
    if (!(t >= 0.0) || !std::isfinite(t)) throw invalid_input("storage: t must be >= 0");
    if (!(beta >= 0.0) || !(beta < 0.1)) throw invalid_input("storage: beta must be in [0, 0.1) rad");
    if (!(lambda_c > 0.0) || !std::isfinite(lambda_c)) throw invalid_input("storage: lambda_c must be positive");
    if (!std::isfinite(alpha)) throw invalid_input("storage: alpha must be finite");
  }
};

/// Small-angle transverse wavevector offset beta * (2 pi / lambda_c) * (cos alpha, sin alpha).
inline Vec2 kperp_from_angles(const StorageParams& p) {
  p.validate();
  const double k = p.beta * 2.0 * std::numbers::pi / p.lambda_c;
  return {k * std::cos(p.alpha), k * std::sin(p.alpha)};
}

/// Standard deviation of the Gaussian filter in q-space, 1 / sqrt(2 D t).
inline double bandwidth(const StorageParams& p) {
  p.validate();
  if (p.t == 0.0) throw invalid_input("bandwidth: undefined for t = 0 (storage is the identity)");
  return 1.0 / std::sqrt(2.0 * p.D * p.t);
}

/// Real-space diffusion length sqrt(2 D t) (per-axis standard deviation of the kernel).
inline double diffusion_length(const StorageParams& p) { return std::sqrt(2.0 * p.D * p.t); }

struct FilterProfile {
  GridSpec grid;
  std::vector<double> transmissivity;

  double at(int mx, int my) const { return transmissivity[grid.index(mx, my)]; }
};

/// G(q) = exp(-D t |q - k|^2) at a single angular spatial frequency.
inline double transmissivity(Vec2 q, const StorageParams& p) {
  const Vec2 d = q - kperp_from_angles(p);
  return std::exp(-p.D * p.t * dot(d, d));
}

inline FilterProfile filter_profile(const StorageParams& p, const GridSpec& g) {
  g.validate();
  const Vec2 k = kperp_from_angles(p);
  FilterProfile f{g, std::vector<double>(g.size())};
  for (int my = 0; my < g.ny; ++my)
    for (int mx = 0; mx < g.nx; ++mx) {
      const Vec2 d = g.wavevector(mx, my) - k;
      f.transmissivity[g.index(mx, my)] = std::exp(-p.D * p.t * dot(d, d));
    }
  return f;
}

/// The periodic box must hold the kernel (>= 8 sigma per axis) and the q-lattice must
/// resolve the pass band (Nyquist > |k| + 3 / sigma).
inline void check_grid_margins(const GridSpec& g, const StorageParams& p) {
  g.validate();
  p.validate();
  if (p.t == 0.0) return;
  const double sigma = diffusion_length(p);
  const double need = 8.0 * sigma;
  if (g.extent_x() < need || g.extent_y() < need) {
    throw invalid_input("grid margin: extent " + std::to_string(g.extent_x()) + " x " +
                        std::to_string(g.extent_y()) + " m is below the required minimum " +
                        std::to_string(need) + " m (8 sqrt(2 D t))");
  }
  const double kmax = norm(kperp_from_angles(p)) + 3.0 / sigma;
  if (g.nyquist_x() <= kmax || g.nyquist_y() <= kmax) {
    throw invalid_input("grid margin: Nyquist frequency " + std::to_string(std::min(g.nyquist_x(), g.nyquist_y())) +
                        " m^-1 must exceed |k| + 3/sqrt(2Dt) = " + std::to_string(kmax) + " m^-1");
  }
}

/// Pipeline-assembly check: the field's footprint (intensity >= 1e-3 of peak) plus a
/// 4 sqrt(2 D t) margin on every side has to fit inside the grid.
inline void check_footprint_margin(const ComplexField& field, const StorageParams& p) {
  const GridSpec& g = field.grid();
  check_grid_margins(g, p);
  const double peak = field.max_intensity();
  if (peak == 0.0) return;
  double hx = 0.0;
  double hy = 0.0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      if (std::norm(field.at(ix, iy)) >= 1e-3 * peak) {
        hx = std::max(hx, std::abs(g.x(ix)) + 0.5 * g.dx);
        hy = std::max(hy, std::abs(g.y(iy)) + 0.5 * g.dy);
      }
  const double margin = 4.0 * diffusion_length(p);
  const double need_x = 2.0 * (hx + margin);
  const double need_y = 2.0 * (hy + margin);
  if (need_x > g.extent_x() || need_y > g.extent_y()) {
    throw invalid_input("grid margin: pattern footprint plus 4 sqrt(2Dt) needs at least " +
                        std::to_string(need_x) + " x " + std::to_string(need_y) + " m; grid is " +
                        std::to_string(g.extent_x()) + " x " + std::to_string(g.extent_y()) + " m");
  }
}

inline ComplexField apply_filter(const SpectralField& spectrum, const FilterProfile& filter) {
  std::vector<cplx> v(spectrum.values().begin(), spectrum.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= filter.transmissivity[i];
  return inverse_ft(SpectralField(spectrum.grid(), std::move(v)));
}

/// Spectral storage reusing a precomputed forward transform of the input.
inline ComplexField store_spectral(const SpectralField& spectrum, const StorageParams& p) {
  check_grid_margins(spectrum.grid(), p);
  return apply_filter(spectrum, filter_profile(p, spectrum.grid()));
}

inline ComplexField store_spectral(const ComplexField& input, const StorageParams& p) {
  check_grid_margins(input.grid(), p);
  if (p.t == 0.0) return input;
  return apply_filter(forward_ft(input), filter_profile(p, input.grid()));
}

namespace detail {

// D (lap - 2 i k.grad - |k|^2) with second-order central differences, periodic.
class GaugedLaplacian {
public:
  GaugedLaplacian(const GridSpec& g, double D, Vec2 k)
      : g_(g),
        cx_(D / (g.dx * g.dx)),
        cy_(D / (g.dy * g.dy)),
        gx_(D * k.x / g.dx),
        gy_(D * k.y / g.dy),
        c0_(-D * (2.0 / (g.dx * g.dx) + 2.0 / (g.dy * g.dy) + dot(k, k))) {}

  /// Upper bound of the operator's spectral radius.
  double spectral_radius() const { return std::abs(c0_) + 2.0 * (cx_ + cy_) + std::abs(gx_) + std::abs(gy_); }

  void apply(const std::vector<cplx>& u, std::vector<cplx>& out) const {
    const int nx = g_.nx;
    const int ny = g_.ny;
    parallel_for(ny, [&](int y0, int y1) {
      for (int iy = y0; iy < y1; ++iy) {
        const cplx* row = &u[static_cast<std::size_t>(iy) * nx];
        const cplx* up = &u[static_cast<std::size_t>((iy + 1) % ny) * nx];
        const cplx* down = &u[static_cast<std::size_t>((iy + ny - 1) % ny) * nx];
        cplx* o = &out[static_cast<std::size_t>(iy) * nx];
        for (int ix = 0; ix < nx; ++ix) {
          const cplx right = row[ix + 1 < nx ? ix + 1 : 0];
          const cplx left = row[ix > 0 ? ix - 1 : nx - 1];
          const cplx diff_x = right - left;
          const cplx diff_y = up[ix] - down[ix];
          // -2 i D k.grad u = -i (gx diff_x + gy diff_y) with grad = diff / (2 d)
          const cplx drift = gx_ * diff_x + gy_ * diff_y;
          const cplx lap = cx_ * (right + left) + cy_ * (up[ix] + down[ix]) + c0_ * row[ix];
          o[ix] = cplx(lap.real() + drift.imag(), lap.imag() - drift.real());
        }
      }
    });
  }

private:
  GridSpec g_;
  double cx_, cy_, gx_, gy_, c0_;
};

}  // namespace detail

/// Explicit Heun (second-order Runge-Kutta) integration of the gauged diffusion PDE.
/// The internal step is the largest value <= dt_max that also satisfies
/// D dt / min(dx, dy)^2 <= 0.2 and divides t evenly.
inline ComplexField store_fd(const ComplexField& input, const StorageParams& p, double dt_max) {
  p.validate();
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) {
    throw invalid_input("store_fd: dt_max must be positive and finite (got " + std::to_string(dt_max) + ")");
  }
  if (p.t == 0.0) return input;
  const GridSpec& g = input.grid();
  const Vec2 k = kperp_from_angles(p);
  const detail::GaugedLaplacian op(g, p.D, k);

  const double h_min = std::min(g.dx, g.dy);
  double h = std::min(dt_max, 0.2 * h_min * h_min / p.D);
  h = std::min(h, 1.8 / op.spectral_radius());  // Heun is stable for |lambda h| <= 2 on the real axis
  const double steps_real = std::ceil(p.t / h);
  if (steps_real > 1e7) {
    throw invalid_input("store_fd: stability bound needs " + std::to_string(steps_real) +
                        " steps (limit 1e7); increase the grid pitch or dt_max");
  }
  const long steps = std::max(1L, static_cast<long>(steps_real));
  const double dt = p.t / static_cast<double>(steps);

  std::vector<cplx> u(input.values().begin(), input.values().end());
  std::vector<cplx> k1(u.size()), k2(u.size()), trial(u.size());
  for (long s = 0; s < steps; ++s) {
    op.apply(u, k1);
    for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + dt * k1[i];
    op.apply(trial, k2);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += 0.5 * dt * (k1[i] + k2[i]);
  }
  return ComplexField(g, std::move(u));
}

namespace detail {

// Periodised 1-D factor of the gauged heat kernel, indexed by pixel offset d:
//   K[d] = sum_n pitch / sqrt(4 pi D t) exp(i k s_n) exp(-s_n^2 / (4 D t)),  s_n = d pitch + n L.
inline std::vector<cplx> green_kernel_1d(int n, double pitch, double k, double D, double t) {
  const double L = n * pitch;
  const double four_dt = 4.0 * D * t;
  const double sigma = std::sqrt(2.0 * D * t);
  const int images = static_cast<int>(std::ceil(12.0 * sigma / L)) + 1;
  const double norm_factor = pitch / std::sqrt(std::numbers::pi * four_dt);
  std::vector<cplx> kernel(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const double base = (d < n / 2 ? d : d - n) * pitch;
    cplx acc = 0.0;
    for (int m = -images; m <= images; ++m) {
      const double s = base + m * L;
      acc += std::polar(std::exp(-s * s / four_dt), k * s);
    }
    kernel[static_cast<std::size_t>(d)] = norm_factor * acc;
  }
  return kernel;
}

}  // namespace detail

/// Direct real-space convolution with N exp(i k.(r - r')) exp(-|r - r'|^2 / (4 D t)),
/// N = 1 / (4 pi D t), on the periodic grid (kernel summed over periodic images).
/// The 2-D kernel factorises into x and y parts, so the convolution runs as two 1-D passes.
inline ComplexField store_green(const ComplexField& input, const StorageParams& p) {
  check_grid_margins(input.grid(), p);
  if (p.t == 0.0) return input;
  const GridSpec& g = input.grid();
  const Vec2 k = kperp_from_angles(p);
  const auto kx = detail::green_kernel_1d(g.nx, g.dx, k.x, p.D, p.t);
  const auto ky = detail::green_kernel_1d(g.ny, g.dy, k.y, p.D, p.t);
  const auto& in = input.vector();
  const int nx = g.nx;
  const int ny = g.ny;

  std::vector<cplx> pass(in.size());
  detail::parallel_for(ny, [&](int y0, int y1) {
    for (int iy = y0; iy < y1; ++iy) {
      const cplx* row = &in[static_cast<std::size_t>(iy) * nx];
      for (int ix = 0; ix < nx; ++ix) {
        cplx acc = 0.0;
        for (int jx = 0; jx < nx; ++jx) acc += kx[static_cast<std::size_t>((ix - jx + nx) % nx)] * row[jx];
        pass[static_cast<std::size_t>(iy) * nx + ix] = acc;
      }
    }
  });

  std::vector<cplx> out(in.size());
  detail::parallel_for(ny, [&](int y0, int y1) {
    std::vector<cplx> acc(static_cast<std::size_t>(nx));
    for (int iy = y0; iy < y1; ++iy) {
      std::fill(acc.begin(), acc.end(), cplx{});
      for (int jy = 0; jy < ny; ++jy) {
        const cplx w = ky[static_cast<std::size_t>((iy - jy + ny) % ny)];
        const cplx* src = &pass[static_cast<std::size_t>(jy) * nx];
        for (int ix = 0; ix < nx; ++ix) acc[static_cast<std::size_t>(ix)] += w * src[ix];
      }
      std::copy(acc.begin(), acc.end(), out.begin() + static_cast<std::ptrdiff_t>(iy) * nx);
    }
  });
  return ComplexField(g, std::move(out));
}

/// Unnormalised two-delta solution
///   exp(-i k.(r - r1) - |r - r1|^2 / (4 D t)) + exp(-i k.(r - r2) - |r - r2|^2 / (4 D t)).
/// Only its modulus and zeros are meaningful; the phase sign follows the printed form.
inline cplx two_point_solution(Vec2 r1, Vec2 r2, Vec2 r, const StorageParams& p) {
  if (!(p.t > 0.0)) throw invalid_input("two_point_solution: t must be > 0");
  const Vec2 k = kperp_from_angles(p);
  const double four_dt = 4.0 * p.D * p.t;
  auto term = [&](Vec2 src) {
    const Vec2 d = r - src;
    return std::polar(std::exp(-dot(d, d) / four_dt), -dot(k, d));
  };
  return term(r1) + term(r2);
}

/// k.(r1 - r2) wrapped to (-pi, pi].
inline double phase_difference(Vec2 r1, Vec2 r2, const StorageParams& p) {
  return wrap_angle(dot(kperp_from_angles(p), r1 - r2));
}

}  // namespace sfmod
