#pragma once

// File formats:
//   raw field : one JSON header line {"nx":..,"ny":..,"dx":..,"dy":..}\n followed by
//               nx*ny little-endian float64 (re, im) pairs, row-major (iy outer).
//   PGM       : binary P5, maxval 65535 (big-endian samples),
//               normalised to the maximum value; the top image row is the largest y.

#include <sfmod/fieldcore.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace sfmod::io {

namespace detail {

inline void put_le_f64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  os.write(bytes, 8);
}

inline double get_le_f64(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  if (!is) throw invalid_input("raw field: truncated data block");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw invalid_input("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  return os;
}

inline void check_written(std::ostream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw invalid_input("write to '" + path.string() + "' failed");
}

}  // namespace detail

inline void write_field(std::ostream& os, const ComplexField& field) {
  const GridSpec& g = field.grid();
  nlohmann::ordered_json header;
  header["nx"] = g.nx;
  header["ny"] = g.ny;
  header["dx"] = g.dx;
  header["dy"] = g.dy;
  os << header.dump() << '\n';
  for (const auto& v : field.values()) {
    detail::put_le_f64(os, v.real());
    detail::put_le_f64(os, v.imag());
  }
}

inline ComplexField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw invalid_input("raw field: missing JSON header line");
  GridSpec g;
  try {
    const auto header = nlohmann::json::parse(line);
    g.nx = header.at("nx").get<int>();
    g.ny = header.at("ny").get<int>();
    g.dx = header.at("dx").get<double>();
    g.dy = header.at("dy").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(std::string("raw field: bad header: ") + e.what());
  }
  g.validate();
  std::vector<cplx> v(g.size());
  for (auto& c : v) {
    const double re = detail::get_le_f64(is);
    const double im = detail::get_le_f64(is);
    c = {re, im};
  }
  return ComplexField(g, std::move(v));
}

inline void write_field(const std::filesystem::path& path, const ComplexField& field) {
  auto os = detail::open_out(path);
  write_field(os, field);
  detail::check_written(os, path);
}

inline ComplexField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw invalid_input("cannot open '" + path.string() + "': " + std::strerror(errno));
  return read_field(is);
}

/// 16-bit PGM of a non-negative nx*ny raster normalised to its maximum.
inline void write_pgm(std::ostream& os, std::span<const double> raster, int nx, int ny) {
  if (raster.size() != static_cast<std::size_t>(nx) * ny) throw invalid_input("pgm: size mismatch");
  const double peak = raster.empty() ? 0.0 : *std::max_element(raster.begin(), raster.end());
  const double scale = peak > 0.0 ? 65535.0 / peak : 0.0;
  os << "P5\n" << nx << ' ' << ny << "\n65535\n";
  std::vector<char> row(static_cast<std::size_t>(nx) * 2);
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = std::clamp(raster[static_cast<std::size_t>(iy) * nx + ix] * scale, 0.0, 65535.0);
      const auto s = static_cast<std::uint16_t>(std::lround(v));
      row[2 * ix] = static_cast<char>(s >> 8);
      row[2 * ix + 1] = static_cast<char>(s & 0xFF);
    }
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

inline void write_pgm(const std::filesystem::path& path, std::span<const double> raster, int nx, int ny) {
  auto os = detail::open_out(path);
  write_pgm(os, raster, nx, ny);
  detail::check_written(os, path);
}

inline void write_intensity_pgm(const std::filesystem::path& path, const ComplexField& field) {
  const auto intensity = field.intensity();
  write_pgm(path, intensity, field.grid().nx, field.grid().ny);
}

}  // namespace sfmod::io
