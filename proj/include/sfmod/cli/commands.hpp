#pragma once

// Subcommand implementations behind tools/sfmod. Each command writes its files into
// config.out_dir, starting with a normalised echo of the configuration (config.toml),
// and returns the JSON report it printed.

#include <sfmod/analysis.hpp>
#include <sfmod/cli/config.hpp>
#include <sfmod/io.hpp>
#include <sfmod/stochastic.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace sfmod::cli {

using json = nlohmann::ordered_json;

struct CommandResult {
  std::vector<std::filesystem::path> files;
  json report;
};

namespace detail {

class Outputs {
public:
  explicit Outputs(const RunConfig& c) : dir_(c.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw invalid_input("cannot create output directory '" + dir_.string() + "': " + ec.message());
    write_text("config.toml", echo_config(c));
  }

  std::filesystem::path path(const std::string& name) {
    auto p = dir_ / name;
    files_.push_back(p);
    return p;
  }

  void write_text(const std::string& name, const std::string& text) {
    const auto p = path(name);
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw invalid_input("cannot open '" + p.string() + "' for writing: " + std::strerror(errno));
    os << text;
    os.flush();
    if (!os) throw invalid_input("write to '" + p.string() + "' failed");
  }

  void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

  std::vector<std::filesystem::path> files() const { return files_; }

private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

inline ComplexField load_input(const RunConfig& c) {
  if (c.input_path) return io::read_field(*c.input_path);
  return generate(c.pattern, c.grid);
}

inline std::vector<double> magnitude(std::span<const cplx> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
  return out;
}

inline json db_or_null(const Psnr& p) { return p.identical ? json(nullptr) : json(p.db); }

inline json storage_json(const StorageParams& p) {
  const Vec2 k = kperp_from_angles(p);
  json j;
  j["D_cm2_per_s"] = p.D * 1e4;
  j["t_us"] = p.t * 1e6;
  j["alpha_rad"] = p.alpha;
  j["beta_mrad"] = p.beta * 1e3;
  j["lambda_c_nm"] = p.lambda_c * 1e9;
  j["kperp_m_inv"] = {k.x, k.y};
  j["bandwidth_m_inv"] = p.t > 0.0 ? json(bandwidth(p)) : json(nullptr);
  return j;
}

inline void say(bool quiet, const std::string& line) {
  if (!quiet) std::cout << line << '\n';
}

}  // namespace detail

/// Input field, its intensity image and its spatial-frequency magnitude image.
inline CommandResult cmd_generate(const RunConfig& c, bool quiet = false) {
  c.validate();
  detail::Outputs out(c);
  const ComplexField input = detail::load_input(c);
  const GridSpec& g = input.grid();
  io::write_field(out.path("input.field"), input);
  io::write_intensity_pgm(out.path("input_intensity.pgm"), input);
  const auto spectrum = detail::magnitude(sf_spectrum(input).values());
  io::write_pgm(out.path("input_spectrum.pgm"), spectrum, g.nx, g.ny);

  json report;
  report["command"] = "generate";
  report["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy}};
  report["energy"] = input.energy();
  out.write_json("generate.json", report);
  detail::say(quiet, "generate: wrote " + std::to_string(out.files().size()) + " files to " + c.out_dir.string());
  return {out.files(), report};
}

/// Stored-and-retrieved field with the metrics that apply to the pattern type.
inline CommandResult cmd_store(const RunConfig& c, bool quiet = false) {
  c.validate();
  detail::Outputs out(c);
  const ComplexField input = detail::load_input(c);
  const GridSpec& g = input.grid();
  const StorageParams& p = c.storage;
  check_footprint_margin(input, p);

  const ComplexField retrieved = store_spectral(input, p);
  io::write_field(out.path("retrieved.field"), retrieved);
  io::write_intensity_pgm(out.path("retrieved_intensity.pgm"), retrieved);
  const FilterProfile filter = filter_profile(p, g);
  io::write_pgm(out.path("filter_profile.pgm"), filter.transmissivity, g.nx, g.ny);

  json metrics;
  const Psnr q = psnr(retrieved, input);
  metrics["psnr_db"] = detail::db_or_null(q);
  metrics["psnr_identical"] = q.identical;
  if (!c.input_path) {
    if (const auto* petal = std::get_if<DoublePetal>(&c.pattern)) {
      const Vec2 axis{std::cos(petal->theta), -std::sin(petal->theta)};
      metrics["visibility"] = visibility(retrieved, axis, petal->separation);
      metrics["visibility_input"] = visibility(input, axis, petal->separation);
    }
    if (const auto* lg = std::get_if<LGMode>(&c.pattern)) {
      double rho = lg_peak_radius(lg->p, lg->l);
      if (rho < 0.1) rho = std::numbers::sqrt2 / 2.0;
      const DefectResult d = defect_angle(retrieved, rho * lg->waist);
      metrics["defect"] = {{"ring_radius_um", rho * lg->waist * 1e6},
                           {"has_defect", d.has_defect},
                           {"angle_rad", d.has_defect ? json(d.angle) : json(nullptr)},
                           {"contrast", d.contrast}};
    }
  }
  const double dc = p.t > 0.0 ? 0.5 * bandwidth(p) : 2.0 * std::max(g.dqx(), g.dqy());
  const AxisEnergy e = sf_axis_energy(retrieved, dc);
  metrics["anisotropy"] = {{"dc_exclusion_m_inv", dc},
                           {"qx_axis_energy", e.qx_axis},
                           {"qy_axis_energy", e.qy_axis},
                           {"qy_over_qx", e.qx_axis > 0.0 ? json(e.qy_axis / e.qx_axis) : json(nullptr)}};

  json report;
  report["command"] = "store";
  report["storage"] = detail::storage_json(p);
  report["metrics"] = metrics;
  out.write_json("metrics.json", report);
  detail::say(quiet, "store: " + metrics.dump());
  return {out.files(), report};
}

/// Visibility against beta for each storage time; CSV grouped by time.
inline CommandResult cmd_sweep(const RunConfig& c, bool quiet = false) {
  c.validate();
  if (c.betas.empty()) throw invalid_input("sweep: sweep.betas_mrad is empty");
  if (c.times.empty()) throw invalid_input("sweep: sweep.times_us is empty");
  if (c.input_path) throw invalid_input("sweep: needs a generated double_petal pattern, not a file");
  detail::Outputs out(c);
  const SweepResult r = sweep_beta(c.pattern, c.storage.alpha, c.betas, c.times, c.storage.D, c.grid,
                                   c.storage.lambda_c);
  {
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    out.write_text("sweep.csv", csv.str());
  }
  if (c.sweep_images) {
    const ComplexField input = generate(c.pattern, c.grid);
    const SpectralField spectrum = forward_ft(input);
    for (const auto& row : r.rows) {
      char name[96];
      std::snprintf(name, sizeof name, "sweep_b%.4fmrad_t%.4fus.pgm", row.beta * 1e3, row.t * 1e6);
      const StorageParams p{c.storage.D, row.t, c.storage.alpha, row.beta, c.storage.lambda_c};
      io::write_intensity_pgm(out.path(name), row.t == 0.0 ? input : store_spectral(spectrum, p));
    }
  }
  json report;
  report["command"] = "sweep";
  report["rows"] = r.rows.size();
  json argmax = json::array();
  std::vector<double> seen;
  for (const auto& row : r.rows) {
    if (std::find(seen.begin(), seen.end(), row.t) != seen.end()) continue;
    seen.push_back(row.t);
    argmax.push_back({{"t_us", row.t * 1e6}, {"argmax_beta_mrad", r.argmax_beta(row.t) * 1e3}});
  }
  report["argmax"] = argmax;
  out.write_json("sweep.json", report);
  detail::say(quiet, "sweep: " + argmax.dump());
  return {out.files(), report};
}

/// Walker-oracle convergence against the spectral propagator.
inline CommandResult cmd_mc_validate(const RunConfig& c, bool quiet = false) {
  c.validate();
  detail::Outputs out(c);
  const ComplexField input = detail::load_input(c);
  check_footprint_margin(input, c.storage);
  const auto rows = mc_convergence(input, c.storage, c.n_list, c.seed);

  std::ostringstream csv;
  csv << "n_walkers,l2_error\n";
  char line[96];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%.10e\n", r.n, r.l2_error);
    csv << line;
  }
  out.write_text("convergence.csv", csv.str());
  const ComplexField final_field = mc_store(input, c.storage, rows.back().n, c.seed);
  io::write_intensity_pgm(out.path("mc_intensity.pgm"), final_field);

  json report;
  report["command"] = "mc-validate";
  report["seed"] = c.seed;
  report["storage"] = detail::storage_json(c.storage);
  report["final_n"] = rows.back().n;
  report["final_l2_error"] = rows.back().l2_error;
  if (rows.size() >= 2) {
    const double slope = loglog_slope(rows);
    report["loglog_slope"] = slope;
    report["slope_in_expected_range"] = slope >= -0.65 && slope <= -0.35;
  } else {
    report["loglog_slope"] = nullptr;
    report["slope_in_expected_range"] = nullptr;
  }
  out.write_json("mc_summary.json", report);
  detail::say(quiet, "mc-validate: " + report.dump());
  return {out.files(), report};
}

/// Recommended (alpha, beta) for an image with retrieved images before and after.
inline CommandResult cmd_design(const RunConfig& c, bool quiet = false) {
  c.validate();
  detail::Outputs out(c);
  const ComplexField image = detail::load_input(c);
  const StorageParams& base = c.storage;
  const Recommendation rec = recommend_kperp(image, base.D, base.t, base.lambda_c);
  const SpectralField spectrum = forward_ft(image);
  const ComplexField before = store_spectral(spectrum, {base.D, base.t, 0.0, 0.0, base.lambda_c});
  const ComplexField after = store_spectral(spectrum, {base.D, base.t, rec.alpha, rec.beta, base.lambda_c});
  io::write_intensity_pgm(out.path("before_intensity.pgm"), before);
  io::write_intensity_pgm(out.path("after_intensity.pgm"), after);

  json report;
  report["command"] = "design";
  report["t_us"] = base.t * 1e6;
  report["alpha_rad"] = rec.alpha;
  report["beta_mrad"] = rec.beta * 1e3;
  report["predicted_psnr_gain_db"] = rec.predicted_psnr_gain;
  report["psnr_collinear_db"] = rec.psnr_collinear;
  report["psnr_designed_db"] = rec.psnr_designed;
  report["isotropic"] = rec.isotropic;
  report["eigen_ratio"] = std::isfinite(rec.eigen_ratio) ? json(rec.eigen_ratio) : json(nullptr);
  report["note"] = rec.note;
  out.write_json("design.json", report);
  detail::say(quiet, "design: " + report.dump());
  return {out.files(), report};
}

}  // namespace sfmod::cli
