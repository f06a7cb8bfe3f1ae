#pragma once

// Image metrics, spectral diagnostics, beta sweeps and k-vector design.

#include <sfmod/fieldcore.hpp>
#include <sfmod/optimize.hpp>
#include <sfmod/patterns.hpp>
#include <sfmod/propagator.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sfmod {

struct Psnr {
  double db = 0.0;
  bool identical = false;  // MSE == 0; db is +inf
};

struct DefectResult {
  double angle = 0.0;        // azimuth of the intensity deficit, (-pi, pi]
  bool has_defect = false;   // false when the ring varies by less than 5%
  double contrast = 0.0;     // (max - min) / max on the ring
};

struct Metrics {
  std::optional<double> visibility;
  std::optional<Psnr> psnr;
  std::optional<DefectResult> defect;
};

/// (I_max - I_c) / (I_max + I_c) with I_c the intensity at the origin and I_max the
/// largest intensity on the line through the origin along `axis`, |s| <= separation.
inline double visibility(const ComplexField& field, Vec2 axis, double separation) {
  const double len = norm(axis);
  if (!(len > 0.0)) throw invalid_input("visibility: axis must be non-zero");
  if (!(separation > 0.0)) throw invalid_input("visibility: separation must be positive");
  const Vec2 u = (1.0 / len) * axis;
  const GridSpec& g = field.grid();
  const auto intensity = field.intensity();
  const double ic = std::norm(field.at_origin());
  const double step = 0.25 * std::min(g.dx, g.dy);
  const int n = static_cast<int>(std::ceil(separation / step));
  double imax = ic;
  for (int j = -n; j <= n; ++j) {
    const double s = j * separation / n;
    imax = std::max(imax, interpolate<double>(intensity, g, s * u));
  }
  if (!(imax > 0.0)) throw invalid_input("visibility: field is empty along the axis (I_max = 0)");
  return std::clamp((imax - ic) / (imax + ic), 0.0, 1.0);
}

/// PSNR of intensity images after normalising each to unit peak.
inline Psnr psnr(const ComplexField& retrieved, const ComplexField& reference) {
  if (!(retrieved.grid() == reference.grid())) throw invalid_input("psnr: grid mismatch");
  const double pa = retrieved.max_intensity();
  const double pb = reference.max_intensity();
  if (!(pa > 0.0) || !(pb > 0.0)) throw invalid_input("psnr: empty image");
  double sum = 0.0;
  const auto a = retrieved.values();
  const auto b = reference.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::norm(a[i]) / pa - std::norm(b[i]) / pb;
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(1.0 / mse), false};
}

/// |forward_ft(field)| as a real-valued spectrum.
inline SpectralField sf_spectrum(const ComplexField& field) {
  const SpectralField s = forward_ft(field);
  std::vector<cplx> mag(s.values().size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(s.values()[i]);
  return SpectralField(s.grid(), std::move(mag));
}

struct SfAxis {
  double angle = 0.0;        // orientation mod pi, in [0, pi)
  bool dominant = false;     // false when the eigenvalue ratio is below 1.1
  double eigen_ratio = 1.0;  // major / minor second moment
};

/// Principal axis of the second-moment tensor of |psi~(q)|^2 outside |q| < dc_exclusion.
inline SfAxis dominant_sf_axis(const ComplexField& field, double dc_exclusion) {
  const SpectralField s = forward_ft(field);
  const GridSpec& g = s.grid();
  double mxx = 0, myy = 0, mxy = 0;
  for (int my = 0; my < g.ny; ++my)
    for (int mx = 0; mx < g.nx; ++mx) {
      const Vec2 q = g.wavevector(mx, my);
      if (norm(q) < dc_exclusion) continue;
      const double w = std::norm(s.at(mx, my));
      mxx += w * q.x * q.x;
      myy += w * q.y * q.y;
      mxy += w * q.x * q.y;
    }
  if (!(mxx + myy > 0.0)) throw invalid_input("dominant_sf_axis: no spectral energy outside the DC mask");
  const double mean = 0.5 * (mxx + myy);
  const double dev = std::hypot(0.5 * (mxx - myy), mxy);
  const double major = mean + dev;
  const double minor = mean - dev;
  SfAxis out;
  out.eigen_ratio = minor > 0.0 ? major / minor : std::numeric_limits<double>::infinity();
  out.dominant = out.eigen_ratio >= 1.1;
  double a = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a -= std::numbers::pi;
  out.angle = a;
  return out;
}

struct AxisEnergy {
  double qx_axis = 0.0;  // bins within half_width bins of the q_x axis (q_y ~ 0)
  double qy_axis = 0.0;  // bins within half_width bins of the q_y axis (q_x ~ 0)
};

/// Spectral energy |psi~|^2 concentrated along the two q axes, DC disc excluded.
inline AxisEnergy sf_axis_energy(const ComplexField& field, double dc_exclusion, int half_width = 1) {
  const SpectralField s = forward_ft(field);
  const GridSpec& g = s.grid();
  AxisEnergy e;
  for (int my = 0; my < g.ny; ++my)
    for (int mx = 0; mx < g.nx; ++mx) {
      if (norm(g.wavevector(mx, my)) < dc_exclusion) continue;
      const double w = std::norm(s.at(mx, my));
      if (std::abs(my - g.ny / 2) <= half_width) e.qx_axis += w;
      if (std::abs(mx - g.nx / 2) <= half_width) e.qy_axis += w;
    }
  return e;
}

/// Azimuth of the intensity deficit on the circle of radius ring_radius, from the
/// centre of mass of (I_max - I(phi)).
inline DefectResult defect_angle(const ComplexField& field, double ring_radius) {
  const GridSpec& g = field.grid();
  if (!(ring_radius > 0.0) || ring_radius >= 0.5 * std::min(g.extent_x(), g.extent_y())) {
    throw invalid_input("defect_angle: ring radius must lie inside the grid");
  }
  constexpr int samples = 720;
  const auto intensity = field.intensity();
  std::vector<double> ring(samples);
  for (int j = 0; j < samples; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / samples;
    ring[static_cast<std::size_t>(j)] =
        interpolate<double>(intensity, g, ring_radius * Vec2{std::cos(phi), std::sin(phi)});
  }
  const auto [lo, hi] = std::minmax_element(ring.begin(), ring.end());
  DefectResult out;
  if (!(*hi > 0.0)) throw invalid_input("defect_angle: ring is dark");
  out.contrast = (*hi - *lo) / *hi;
  if (out.contrast < 0.05) return out;
  cplx acc = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / samples;
    acc += (*hi - ring[static_cast<std::size_t>(j)]) * std::polar(1.0, phi);
  }
  out.has_defect = true;
  out.angle = std::arg(acc);
  return out;
}

struct SweepRow {
  double beta = 0.0;  // rad
  double t = 0.0;     // s
  double visibility = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grouped by t (input order), beta ascending within a group
  PatternSpec pattern;
  double alpha = 0.0;
  GridSpec grid;

  /// beta of the largest visibility among rows with storage time t.
  double argmax_beta(double t) const {
    double best = -1.0;
    double arg = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows)
      if (r.t == t && r.visibility > best) {
        best = r.visibility;
        arg = r.beta;
      }
    return arg;
  }
};

inline SweepResult sweep_beta(const PatternSpec& pattern, double alpha, std::vector<double> betas,
                              const std::vector<double>& times, double D, const GridSpec& grid,
                              double lambda_c = 795e-9) {
  const auto* petal = std::get_if<DoublePetal>(&pattern);
  if (!petal) throw invalid_input("sweep_beta: visibility needs a double_petal pattern");
  if (betas.empty()) throw invalid_input("sweep_beta: beta list is empty");
  if (times.empty()) throw invalid_input("sweep_beta: time list is empty");
  std::sort(betas.begin(), betas.end());

  const ComplexField input = generate(pattern, grid);
  const double t_max = *std::max_element(times.begin(), times.end());
  StorageParams probe{D, t_max, alpha, betas.back(), lambda_c};
  check_footprint_margin(input, probe);

  const SpectralField spectrum = forward_ft(input);
  const Vec2 axis{std::cos(petal->theta), -std::sin(petal->theta)};
  SweepResult result{{}, pattern, alpha, grid};
  for (double t : times)
    for (double b : betas) {
      const StorageParams p{D, t, alpha, b, lambda_c};
      const ComplexField out = t == 0.0 ? input : store_spectral(spectrum, p);
      result.rows.push_back({b, t, visibility(out, axis, petal->separation)});
    }
  return result;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "beta_mrad,t_us,visibility\n";
  char line[128];
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.10f\n", row.beta * 1e3, row.t * 1e6, row.visibility);
    os << line;
  }
}

struct RecommendOptions {
  double beta_max = 5e-3;     // rad
  double resolution = 1e-5;   // rad (0.01 mrad)
  double coarse_step = 2.5e-4;
  double tie_db = 0.01;       // PSNR differences below this resolve to the smaller beta
  double dc_exclusion = 0.0;  // m^-1; 0 selects sqrt(ln 2 / (D t)), where exp(-D t q^2) = 1/2
};

struct Recommendation {
  double alpha = 0.0;
  double beta = 0.0;
  double predicted_psnr_gain = 0.0;  // dB, designed vs beta = 0
  double psnr_collinear = 0.0;
  double psnr_designed = 0.0;
  bool isotropic = false;
  double eigen_ratio = 1.0;
  std::string note;
};

namespace detail {

inline double finite_db(const Psnr& p) { return p.identical ? 1e3 : p.db; }

}  // namespace detail

/// Choose k: the direction from the dominant spatial-frequency axis, the magnitude by
/// maximising PSNR over beta in [0, beta_max]. A coarse scan picks the best bracket
/// (PSNR(beta) has several lobes), then golden-section search refines inside it.
inline Recommendation recommend_kperp(const ComplexField& image, double D, double t, double lambda_c,
                                      const RecommendOptions& opt = {}) {
  const StorageParams base{D, t, 0.0, 0.0, lambda_c};
  base.validate();
  if (!(t > 0.0)) throw invalid_input("recommend_kperp: t must be > 0");
  if (!(image.max_intensity() > 0.0)) throw invalid_input("recommend_kperp: image is empty");
  check_footprint_margin(image, StorageParams{D, t, 0.0, opt.beta_max, lambda_c});

  const double dc = opt.dc_exclusion > 0.0 ? opt.dc_exclusion : std::sqrt(std::numbers::ln2 / (D * t));
  const SfAxis axis = dominant_sf_axis(image, dc);
  const SpectralField spectrum = forward_ft(image);
  auto score = [&](double alpha, double beta) {
    return detail::finite_db(psnr(store_spectral(spectrum, {D, t, alpha, beta, lambda_c}), image));
  };

  Recommendation rec;
  rec.eigen_ratio = axis.eigen_ratio;
  rec.psnr_collinear = score(0.0, 0.0);
  if (!axis.dominant) {
    rec.isotropic = true;
    rec.psnr_designed = rec.psnr_collinear;
    rec.note = "no dominant spatial-frequency axis (eigenvalue ratio " + std::to_string(axis.eigen_ratio) +
               " < 1.1); collinear storage recommended";
    return rec;
  }
  rec.alpha = axis.angle;
  auto f = [&](double beta) { return score(rec.alpha, beta); };

  const int coarse = static_cast<int>(std::floor(opt.beta_max / opt.coarse_step + 1e-9));
  double best_beta = 0.0;
  double best_value = rec.psnr_collinear;
  for (int j = 1; j <= coarse; ++j) {
    const double b = j * opt.coarse_step;
    const double v = f(b);
    if (v > best_value + opt.tie_db) {
      best_value = v;
      best_beta = b;
    }
  }
  const double lo = std::max(0.0, best_beta - opt.coarse_step);
  const double hi = std::min(opt.beta_max, best_beta + opt.coarse_step);
  const ScalarOptimum refined = golden_section_maximize(f, lo, hi, opt.resolution);
  if (refined.value > best_value) {
    best_value = refined.value;
    best_beta = refined.x;
  }
  rec.beta = best_beta;
  rec.psnr_designed = best_value;
  rec.predicted_psnr_gain = best_value - rec.psnr_collinear;
  if (rec.beta == 0.0) rec.note = "no beta improves on collinear storage";
  return rec;
}

}  // namespace sfmod
