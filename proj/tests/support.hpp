#pragma once

#include <sfmod/fieldcore.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace testsupport {

using sfmod::ComplexField;
using sfmod::cplx;
using sfmod::GridSpec;
using sfmod::Vec2;

inline constexpr double pi = std::numbers::pi;

/// Sum of `blobs` complex Gaussians with random centre, waist, amplitude and phase.
inline ComplexField random_blobs(const GridSpec& g, std::mt19937_64& rng, int blobs = 3, double w_min = 60e-6,
                                 double w_max = 120e-6, double spread = 120e-6) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Blob {
    Vec2 c;
    double w;
    cplx a;
  };
  std::vector<Blob> list;
  for (int b = 0; b < blobs; ++b) {
    const Vec2 c{spread * (2.0 * u(rng) - 1.0), spread * (2.0 * u(rng) - 1.0)};
    const double w = w_min + (w_max - w_min) * u(rng);
    const cplx a = std::polar(0.5 + u(rng), 2.0 * pi * u(rng));
    list.push_back({c, w, a});
  }
  return ComplexField::sample(g, [&](Vec2 r) {
    cplx v = 0.0;
    for (const auto& b : list) {
      const Vec2 d = r - b.c;
      v += b.a * std::exp(-sfmod::dot(d, d) / (2.0 * b.w * b.w));
    }
    return v;
  });
}

/// Independent complex Gaussian noise per pixel.
inline ComplexField random_noise(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> v(g.size());
  for (auto& x : v) x = {n(rng), n(rng)};
  return ComplexField(g, std::move(v));
}

/// exp(i q.r) for the lattice frequency stored at (mx, my).
inline ComplexField plane_wave(const GridSpec& g, int mx, int my) {
  const Vec2 q = g.wavevector(mx, my);
  return ComplexField::sample(g, [&](Vec2 r) { return std::polar(1.0, sfmod::dot(q, r)); });
}

/// Field rotated by +90 degrees about the origin on a square grid: out(x, y) = in(y, -x).
inline ComplexField rotate90(const ComplexField& f) {
  const GridSpec& g = f.grid();
  std::vector<cplx> v(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) v[g.index(ix, iy)] = f.at(iy, (g.nx - ix) % g.nx);
  return ComplexField(g, std::move(v));
}

/// Distance between two orientations modulo `period`.
inline double angle_distance(double a, double b, double period = 2.0 * pi) {
  double d = std::fmod(a - b, period);
  if (d < 0) d += period;
  return std::min(d, period - d);
}

}  // namespace testsupport
