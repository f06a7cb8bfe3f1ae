#pragma once

// Transverse-plane grids, complex fields and the Fourier-transform contract.
//
// Conventions used everywhere in the library:
//   * row-major storage, index = iy * nx + ix;
//   * the origin r = 0 sits at pixel (nx/2, ny/2): x(ix) = (ix - nx/2) * dx;
//   * spectra are stored centred as well: q_x(m) = 2 pi (m - nx/2) / (nx dx);
//   * forward transform  psi~(q) = sum_r psi(r) exp(-i q.r) dx dy,
//     inverse transform  psi(r)  = sum_q psi~(q) exp(+i q.r) dqx dqy / (2 pi)^2.

#include <sfmod/detail/fft.hpp>
#include <sfmod/error.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace sfmod {

using cplx = std::complex<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

struct GridSpec {
  int nx = 512;
  int ny = 512;
  double dx = 4e-6;  // m
  double dy = 4e-6;  // m

  void validate() const {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
      throw invalid_input("grid: nx and ny must be even and >= 8 (got " + std::to_string(nx) +
                          "x" + std::to_string(ny) + ")");
    }
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
      throw invalid_input("grid: pixel pitch must be positive and finite");
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
  }

  double x(int ix) const { return (ix - nx / 2) * dx; }
  double y(int iy) const { return (iy - ny / 2) * dy; }
  Vec2 position(int ix, int iy) const { return {x(ix), y(iy)}; }

  double dqx() const { return 2.0 * std::numbers::pi / (nx * dx); }
  double dqy() const { return 2.0 * std::numbers::pi / (ny * dy); }
  double qx(int mx) const { return (mx - nx / 2) * dqx(); }
  double qy(int my) const { return (my - ny / 2) * dqy(); }
  Vec2 wavevector(int mx, int my) const { return {qx(mx), qy(my)}; }

  double extent_x() const { return nx * dx; }
  double extent_y() const { return ny * dy; }
  double nyquist_x() const { return std::numbers::pi / dx; }
  double nyquist_y() const { return std::numbers::pi / dy; }
  double pixel_area() const { return dx * dy; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

namespace detail {

inline void require_finite(std::span<const cplx> values, const GridSpec& grid, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) {
      const auto ix = static_cast<int>(i % static_cast<std::size_t>(grid.nx));
      const auto iy = static_cast<int>(i / static_cast<std::size_t>(grid.nx));
      throw invalid_input(std::string(what) + ": non-finite value at index (" + std::to_string(ix) +
                          ", " + std::to_string(iy) + ")");
    }
  }
}

inline void require_size(std::size_t n, const GridSpec& grid, const char* what) {
  if (n != grid.size()) {
    throw invalid_input(std::string(what) + ": " + std::to_string(n) +
                        " values do not match a " + std::to_string(grid.nx) + "x" +
                        std::to_string(grid.ny) + " grid");
  }
}

}  // namespace detail

/// Immutable sampled field psi(r) on a GridSpec.
class ComplexField {
public:
  ComplexField(GridSpec grid, std::vector<cplx> values)
      : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    detail::require_size(values_.size(), grid_, "field");
    detail::require_finite(values_, grid_, "field");
  }

  static ComplexField zeros(const GridSpec& grid) {
    grid.validate();
    return ComplexField(grid, std::vector<cplx>(grid.size()));
  }

  /// Sample f(r) at every pixel centre.
  template <class F>
  static ComplexField sample(const GridSpec& grid, F&& f) {
    grid.validate();
    std::vector<cplx> v(grid.size());
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) v[grid.index(ix, iy)] = cplx(f(grid.position(ix, iy)));
    return ComplexField(grid, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  const std::vector<cplx>& vector() const { return values_; }
  cplx at(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
  cplx at_origin() const { return at(grid_.nx / 2, grid_.ny / 2); }

  /// sum |psi|^2 dx dy
  double energy() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * grid_.pixel_area();
  }
  double l2_norm() const { return std::sqrt(energy()); }

  double max_intensity() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::norm(v));
    return m;
  }

  std::vector<double> intensity() const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = std::norm(values_[i]);
    return out;
  }

private:
  GridSpec grid_;
  std::vector<cplx> values_;
};

/// Centred spectrum psi~(q) on the q-lattice conjugate to a GridSpec.
class SpectralField {
public:
  SpectralField(GridSpec grid, std::vector<cplx> values)
      : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    detail::require_size(values_.size(), grid_, "spectrum");
    detail::require_finite(values_, grid_, "spectrum");
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  const std::vector<cplx>& vector() const { return values_; }
  cplx at(int mx, int my) const { return values_[grid_.index(mx, my)]; }
  Vec2 wavevector(int mx, int my) const { return grid_.wavevector(mx, my); }

  /// Bin holding -q for the bin (mx, my), with the Nyquist row/column mapping to itself.
  std::pair<int, int> mirror_bin(int mx, int my) const {
    return {(grid_.nx - mx) % grid_.nx, (grid_.ny - my) % grid_.ny};
  }

  /// sum |psi~|^2 dqx dqy / (2 pi)^2 ; equals ComplexField::energy() by Parseval.
  double energy() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return s * grid_.dqx() * grid_.dqy() / (two_pi * two_pi);
  }

private:
  GridSpec grid_;
  std::vector<cplx> values_;
};

inline SpectralField forward_ft(const ComplexField& field) {
  const GridSpec& g = field.grid();
  std::vector<cplx> work(field.values().begin(), field.values().end());
  detail::swap_halves(work, g.nx, g.ny);
  detail::dft2d(work, g.nx, g.ny, FFTW_FORWARD);
  detail::swap_halves(work, g.nx, g.ny);
  const double scale = g.pixel_area();
  for (auto& v : work) v *= scale;
  return SpectralField(g, std::move(work));
}

inline ComplexField inverse_ft(const SpectralField& spectrum) {
  const GridSpec& g = spectrum.grid();
  std::vector<cplx> work(spectrum.values().begin(), spectrum.values().end());
  detail::swap_halves(work, g.nx, g.ny);
  detail::dft2d(work, g.nx, g.ny, FFTW_BACKWARD);
  detail::swap_halves(work, g.nx, g.ny);
  const double scale = 1.0 / (static_cast<double>(g.size()) * g.pixel_area());
  for (auto& v : work) v *= scale;
  return ComplexField(g, std::move(work));
}

/// ||a - b|| / ||b|| over the shared grid.
inline double relative_l2(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw invalid_input("relative_l2: size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num / den);
}

inline double relative_l2(const ComplexField& a, const ComplexField& reference) {
  if (!(a.grid() == reference.grid())) throw invalid_input("relative_l2: grid mismatch");
  return relative_l2(a.values(), reference.values());
}

/// Pointwise product exp(i sign k.r) * psi(r).
inline ComplexField apply_phase_ramp(const ComplexField& field, Vec2 k, double sign) {
  const GridSpec& g = field.grid();
  std::vector<cplx> v(field.values().begin(), field.values().end());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      v[g.index(ix, iy)] *= std::polar(1.0, sign * dot(k, g.position(ix, iy)));
  return ComplexField(g, std::move(v));
}

/// Periodic bilinear interpolation of a row-major raster at a physical position.
template <class T>
T interpolate(std::span<const T> raster, const GridSpec& g, Vec2 r) {
  const double fx = r.x / g.dx + g.nx / 2;
  const double fy = r.y / g.dy + g.ny / 2;
  const double x0 = std::floor(fx);
  const double y0 = std::floor(fy);
  const double ax = fx - x0;
  const double ay = fy - y0;
  auto wrap = [](long i, int n) { return static_cast<int>(((i % n) + n) % n); };
  const int ix0 = wrap(static_cast<long>(x0), g.nx);
  const int iy0 = wrap(static_cast<long>(y0), g.ny);
  const int ix1 = (ix0 + 1) % g.nx;
  const int iy1 = (iy0 + 1) % g.ny;
  return (1 - ax) * (1 - ay) * raster[g.index(ix0, iy0)] + ax * (1 - ay) * raster[g.index(ix1, iy0)] +
         (1 - ax) * ay * raster[g.index(ix0, iy1)] + ax * ay * raster[g.index(ix1, iy1)];
}

inline cplx interpolate(const ComplexField& field, Vec2 r) {
  return interpolate<cplx>(field.values(), field.grid(), r);
}

/// Same as interpolate() but on the centred q-lattice.
inline cplx interpolate(const SpectralField& spectrum, Vec2 q) {
  const GridSpec& g = spectrum.grid();
  // A q-lattice with pitch dq behaves like a real-space lattice with pitch dq.
  GridSpec qgrid{g.nx, g.ny, g.dqx(), g.dqy()};
  return interpolate<cplx>(spectrum.values(), qgrid, q);
}

}  // namespace sfmod
