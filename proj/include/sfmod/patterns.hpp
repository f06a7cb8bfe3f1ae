#pragma once

// Deterministic input fields: double petals, crossed-bar grids, bitmap letters and
// Laguerre-Gaussian modes.

#include <sfmod/fieldcore.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sfmod {

/// Two Gaussian petals. Each petal has intensity exp(-r^2 / waist^2) (waist is the
/// 1/e intensity radius). The petal axis is the x axis rotated clockwise by theta, so
/// theta = 0 puts the petals on x and theta = pi/2 puts them on y.
struct DoublePetal {
  double waist = 100e-6;
  double separation = 475e-6;
  double theta = 0.0;
};

/// n_bars vertical plus n_bars horizontal bars, centred on the origin.
struct GridPattern {
  double bar_spacing = 420e-6;
  double bar_width = 140e-6;
  int n_bars = 4;
};

/// Glyph from the built-in 5x7 font, scaled so the 7 rows span `height`.
struct Letter {
  char glyph = 'E';
  double height = 1e-3;
};

/// psi_pl(r) exp(i l phi) with the standard LG radial profile of beam waist `waist`.
struct LGMode {
  int p = 0;
  int l = 1;
  double waist = 150e-6;
};

using PatternSpec = std::variant<DoublePetal, GridPattern, Letter, LGMode>;

namespace font {

struct Glyph {
  char c;
  std::array<std::string_view, 7> rows;  // row 0 is the top row
};

inline constexpr std::array<Glyph, 26> glyphs{{
    {'A', {"01110", "10001", "10001", "11111", "10001", "10001", "10001"}},
    {'B', {"11110", "10001", "10001", "11110", "10001", "10001", "11110"}},
    {'C', {"01110", "10001", "10000", "10000", "10000", "10001", "01110"}},
    {'D', {"11100", "10010", "10001", "10001", "10001", "10010", "11100"}},
    {'E', {"11111", "10000", "10000", "11110", "10000", "10000", "11111"}},
    {'F', {"11111", "10000", "10000", "11110", "10000", "10000", "10000"}},
    {'G', {"01110", "10001", "10000", "10111", "10001", "10001", "01111"}},
    {'H', {"10001", "10001", "10001", "11111", "10001", "10001", "10001"}},
    {'I', {"01110", "00100", "00100", "00100", "00100", "00100", "01110"}},
    {'J', {"00111", "00010", "00010", "00010", "00010", "10010", "01100"}},
    {'K', {"10001", "10010", "10100", "11000", "10100", "10010", "10001"}},
    {'L', {"10000", "10000", "10000", "10000", "10000", "10000", "11111"}},
    {'M', {"10001", "11011", "10101", "10101", "10001", "10001", "10001"}},
    {'N', {"10001", "10001", "11001", "10101", "10011", "10001", "10001"}},
    {'O', {"01110", "10001", "10001", "10001", "10001", "10001", "01110"}},
    {'P', {"11110", "10001", "10001", "11110", "10000", "10000", "10000"}},
    {'Q', {"01110", "10001", "10001", "10001", "10101", "10010", "01101"}},
    {'R', {"11110", "10001", "10001", "11110", "10100", "10010", "10001"}},
    {'S', {"01111", "10000", "10000", "01110", "00001", "00001", "11110"}},
    {'T', {"11111", "00100", "00100", "00100", "00100", "00100", "00100"}},
    {'U', {"10001", "10001", "10001", "10001", "10001", "10001", "01110"}},
    {'V', {"10001", "10001", "10001", "10001", "10001", "01010", "00100"}},
    {'W', {"10001", "10001", "10001", "10101", "10101", "10101", "01010"}},
    {'X', {"10001", "10001", "01010", "00100", "01010", "10001", "10001"}},
    {'Y', {"10001", "10001", "10001", "01010", "00100", "00100", "00100"}},
    {'Z', {"11111", "00001", "00010", "00100", "01000", "10000", "11111"}},
}};

inline std::string supported() {
  std::string s;
  for (const auto& g : glyphs) s += g.c;
  return s;
}

inline const Glyph* find(char c) {
  for (const auto& g : glyphs)
    if (g.c == c) return &g;
  return nullptr;
}

}  // namespace font

namespace detail {

/// Separable periodic Gaussian blur with a standard deviation of one pixel.
inline std::vector<double> blur_one_pixel(const std::vector<double>& in, int nx, int ny) {
  constexpr int radius = 4;
  std::array<double, 2 * radius + 1> kernel{};
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += kernel[i + radius] = std::exp(-0.5 * i * i);
  for (auto& k : kernel) k /= sum;

  std::vector<double> tmp(in.size()), out(in.size());
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * in[static_cast<std::size_t>(iy) * nx + (ix + i + nx) % nx];
      tmp[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>((iy + i + ny) % ny) * nx + ix];
      out[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  return out;
}

template <class Inside>
ComplexField smoothed_mask(const GridSpec& g, Inside&& inside) {
  std::vector<double> mask(g.size(), 0.0);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) mask[g.index(ix, iy)] = inside(g.position(ix, iy)) ? 1.0 : 0.0;
  auto smooth = blur_one_pixel(mask, g.nx, g.ny);
  const double peak = *std::max_element(smooth.begin(), smooth.end());
  if (!(peak > 0.0)) throw invalid_input("pattern: mask does not cover any pixel centre");
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = smooth[i] / peak;
  return ComplexField(g, std::move(v));
}

inline ComplexField peak_normalised(const GridSpec& g, std::vector<cplx> v) {
  double peak = 0.0;
  for (const auto& c : v) peak = std::max(peak, std::abs(c));
  if (!(peak > 0.0)) throw invalid_input("pattern: generated field is identically zero");
  for (auto& c : v) c /= peak;
  return ComplexField(g, std::move(v));
}

inline void require_length(double value, double limit, const char* what) {
  if (!(value > 0.0) || !(value < limit)) {
    throw invalid_input(std::string("pattern: ") + what + " must be in (0, " + std::to_string(limit) +
                        ") m, got " + std::to_string(value));
  }
}

}  // namespace detail

/// Unnormalised LG radial factor (sqrt2 rho)^|l| L_p^|l|(2 rho^2) exp(-rho^2), rho = r / waist.
inline double lg_radial(int p, int l, double rho) {
  const unsigned al = static_cast<unsigned>(std::abs(l));
  return std::pow(std::numbers::sqrt2 * rho, static_cast<double>(al)) *
         std::assoc_laguerre(static_cast<unsigned>(p), al, 2.0 * rho * rho) * std::exp(-rho * rho);
}

/// rho = r / waist of the largest |lg_radial|; 0 for the fundamental Gaussian.
inline double lg_peak_radius(int p, int l) {
  double best_rho = 0.0;
  double best = 0.0;
  for (int i = 0; i <= 40000; ++i) {
    const double rho = i * 1e-4;
    const double v = std::abs(lg_radial(p, l, rho));
    if (v > best) {
      best = v;
      best_rho = rho;
    }
  }
  return best_rho;
}

/// Axis-aligned half extent of the pattern's support (m), used for fit checks.
inline Vec2 pattern_half_extent(const PatternSpec& spec) {
  return std::visit(
      [](const auto& s) -> Vec2 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DoublePetal>) {
          const double cx = 0.5 * s.separation * std::abs(std::cos(s.theta));
          const double cy = 0.5 * s.separation * std::abs(std::sin(s.theta));
          return {cx + 3.0 * s.waist, cy + 3.0 * s.waist};
        } else if constexpr (std::is_same_v<T, GridPattern>) {
          const double e = 0.5 * (s.n_bars - 1) * s.bar_spacing + 0.5 * s.bar_width;
          return {e, e};
        } else if constexpr (std::is_same_v<T, Letter>) {
          return {0.5 * s.height * 5.0 / 7.0, 0.5 * s.height};
        } else {
          // LG amplitude is below 1e-3 of its peak beyond this radius for the supported range.
          const double r = s.waist * (std::sqrt(static_cast<double>(2 * s.p + std::abs(s.l) + 1)) + 2.7);
          return {r, r};
        }
      },
      spec);
}

inline void validate(const PatternSpec& spec, const GridSpec& grid) {
  grid.validate();
  const double limit = std::min(grid.extent_x(), grid.extent_y());
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DoublePetal>) {
          detail::require_length(s.waist, limit, "waist");
          detail::require_length(s.separation, limit, "separation");
          if (!std::isfinite(s.theta)) throw invalid_input("pattern: theta must be finite");
        } else if constexpr (std::is_same_v<T, GridPattern>) {
          detail::require_length(s.bar_spacing, limit, "bar_spacing");
          detail::require_length(s.bar_width, limit, "bar_width");
          if (s.n_bars < 1) throw invalid_input("pattern: n_bars must be >= 1");
          if (s.bar_width >= s.bar_spacing && s.n_bars > 1)
            throw invalid_input("pattern: bar_width must be smaller than bar_spacing");
        } else if constexpr (std::is_same_v<T, Letter>) {
          if (!font::find(s.glyph)) {
            throw invalid_input(std::string("pattern: unsupported glyph '") + s.glyph +
                                "'; supported: " + font::supported());
          }
          detail::require_length(s.height, limit, "height");
        } else {
          if (s.p < 0 || s.p > 5) throw invalid_input("pattern: LG radial index p must be in [0, 5]");
          if (std::abs(s.l) > 10) throw invalid_input("pattern: LG azimuthal index |l| must be <= 10");
          detail::require_length(s.waist, limit, "waist");
        }
      },
      spec);
  const Vec2 half = pattern_half_extent(spec);
  if (half.x > 0.5 * grid.extent_x() || half.y > 0.5 * grid.extent_y()) {
    throw invalid_input("pattern: footprint " + std::to_string(2 * half.x) + " x " +
                        std::to_string(2 * half.y) + " m does not fit the grid");
  }
}

inline ComplexField generate(const DoublePetal& s, const GridSpec& g) {
  const Vec2 c = (0.5 * s.separation) * Vec2{std::cos(s.theta), -std::sin(s.theta)};
  const double inv = 1.0 / (2.0 * s.waist * s.waist);
  std::vector<cplx> v(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Vec2 r = g.position(ix, iy);
      const Vec2 a = r - c;
      const Vec2 b = r + c;
      v[g.index(ix, iy)] = std::exp(-dot(a, a) * inv) + std::exp(-dot(b, b) * inv);
    }
  return detail::peak_normalised(g, std::move(v));
}

inline ComplexField generate(const GridPattern& s, const GridSpec& g) {
  const double half_len = 0.5 * (s.n_bars - 1) * s.bar_spacing + 0.5 * s.bar_width;
  const double hw = 0.5 * s.bar_width;
  auto on_bar = [&](double across, double along) {
    if (std::abs(along) > half_len) return false;
    for (int k = 0; k < s.n_bars; ++k) {
      const double centre = (k - 0.5 * (s.n_bars - 1)) * s.bar_spacing;
      if (std::abs(across - centre) < hw) return true;
    }
    return false;
  };
  return detail::smoothed_mask(g, [&](Vec2 r) { return on_bar(r.x, r.y) || on_bar(r.y, r.x); });
}

inline ComplexField generate(const Letter& s, const GridSpec& g) {
  const font::Glyph* glyph = font::find(s.glyph);
  if (!glyph) {
    throw invalid_input(std::string("pattern: unsupported glyph '") + s.glyph +
                        "'; supported: " + font::supported());
  }
  const double cell = s.height / 7.0;
  return detail::smoothed_mask(g, [&](Vec2 r) {
    const double col = std::floor(r.x / cell + 2.5);
    const double row = std::floor(3.5 - r.y / cell);
    if (col < 0 || col > 4 || row < 0 || row > 6) return false;
    return glyph->rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] == '1';
  });
}

inline cplx lg_value(const LGMode& s, Vec2 r) {
  const double rho = norm(r) / s.waist;
  const double phi = std::atan2(r.y, r.x);
  return lg_radial(s.p, s.l, rho) * std::polar(1.0, s.l * phi);
}

inline ComplexField generate(const LGMode& s, const GridSpec& g) {
  std::vector<cplx> v(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) v[g.index(ix, iy)] = lg_value(s, g.position(ix, iy));
  return detail::peak_normalised(g, std::move(v));
}

inline ComplexField generate(const PatternSpec& spec, const GridSpec& grid) {
  validate(spec, grid);
  return std::visit([&](const auto& s) { return generate(s, grid); }, spec);
}

struct LgSpectrumCheck {
  int winding = 0;
  /// Azimuthal rotation of the spectral spiral relative to the real-space spiral (rad),
  /// i.e. the measured phase offset (net of the exp(i p pi) radial sign) divided by l.
  /// Defined modulo 2 pi / |l|; reported as 0 for l = 0.
  double spiral_offset = 0.0;
  /// Measured phase offset between the spectral and real-space azimuthal profiles,
  /// net of exp(i p pi), wrapped to (-pi, pi].
  double phase_offset = 0.0;
};

inline LgSpectrumCheck lg_spectrum_check(int p, int l, double waist, const GridSpec& grid) {
  const LGMode mode{p, l, waist};
  const ComplexField field = generate(PatternSpec{mode}, grid);
  const SpectralField spectrum = forward_ft(field);

  double rho = lg_peak_radius(p, l);
  if (rho < 0.1) rho = std::numbers::sqrt2 / 2.0;
  const double r_ring = rho * waist;
  const double q_ring = 2.0 * rho / waist;  // FT of an LG mode is the same mode with waist 2 / w
  const double q_pixels = q_ring / std::max(grid.dqx(), grid.dqy());
  const double r_pixels = r_ring / std::max(grid.dx, grid.dy);
  if (q_pixels < 3.0 || r_pixels < 3.0) {
    throw invalid_input("lg_spectrum_check: ring radius under-resolved (" + std::to_string(q_pixels) +
                        " spectral px, " + std::to_string(r_pixels) + " real px; need >= 3)");
  }

  constexpr int samples = 720;
  double winding_sum = 0.0;
  cplx offset_acc = 0.0;
  double previous = 0.0;
  double first = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / samples;
    const Vec2 u{std::cos(phi), std::sin(phi)};
    const cplx sv = interpolate(spectrum, q_ring * u);
    const cplx rv = interpolate(field, r_ring * u);
    const double arg_s = std::arg(sv);
    if (j == 0) {
      first = arg_s;
    } else {
      winding_sum += wrap_angle(arg_s - previous);
    }
    previous = arg_s;
    offset_acc += std::polar(1.0, arg_s - std::arg(rv));
  }
  winding_sum += wrap_angle(first - previous);

  LgSpectrumCheck out;
  out.winding = static_cast<int>(std::lround(winding_sum / (2.0 * std::numbers::pi)));
  if (l != 0) {
    out.phase_offset = wrap_angle(std::arg(offset_acc) - p * std::numbers::pi);
    out.spiral_offset = out.phase_offset / l;
  }
  return out;
}

}  // namespace sfmod
