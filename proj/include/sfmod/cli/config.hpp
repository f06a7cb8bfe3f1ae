#pragma once

// Run configuration: a flat TOML-style file with [section] headers (or dotted keys),
// one `key = value` per line, `#` comments. Values are numbers, "strings", true/false,
// or single-line numeric arrays [a, b, c]. Physical keys carry their unit in the name.
//
//   [grid]     nx ny dx_um dy_um
//   [pattern]  type = double_petal | grid | letter | lg | file
//              double_petal: waist_um separation_um theta_rad
//              grid:         bar_spacing_um bar_width_um n_bars
//              letter:       glyph height_um
//              lg:           p l waist_um
//              file:         path (raw field written by `generate`/`store`)
//   [storage]  D_cm2_per_s t_us alpha_rad beta_mrad lambda_c_nm
//   [sweep]    betas_mrad times_us images
//   [mc]       n_list seed
//   [output]   dir

#include <sfmod/error.hpp>
#include <sfmod/patterns.hpp>
#include <sfmod/propagator.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace sfmod::cli {

struct RunConfig {
  GridSpec grid;
  PatternSpec pattern = DoublePetal{};
  std::optional<std::filesystem::path> input_path;  // pattern type "file"
  StorageParams storage;
  std::vector<double> betas;  // rad
  std::vector<double> times;  // s
  bool sweep_images = false;
  std::vector<std::size_t> n_list{10000, 100000, 1000000};
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";

  /// Type invariants of every physical value; runs before any computation.
  void validate() const {
    grid.validate();
    storage.validate();
    if (!input_path) sfmod::validate(pattern, grid);
    for (double b : betas)
      if (!(b >= 0.0) || !(b < 0.1)) throw invalid_input("config: sweep.betas_mrad entries must be in [0, 100)");
    for (double t : times)
      if (!(t >= 0.0) || !std::isfinite(t)) throw invalid_input("config: sweep.times_us entries must be >= 0");
    for (std::size_t n : n_list)
      if (n < 1) throw invalid_input("config: mc.n_list entries must be >= 1");
  }
};

namespace detail {

struct Value {
  std::variant<double, std::string, bool, std::vector<double>> data;
  std::string raw;
  int line = 0;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string where(int line) { return "config line " + std::to_string(line) + ": "; }

inline double parse_number(const std::string& text, int line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw invalid_input(where(line) + "'" + text + "' is not a finite number");
  }
  return v;
}

inline Value parse_value(const std::string& text, int line) {
  Value out;
  out.raw = text;
  out.line = line;
  if (text.empty()) throw invalid_input(where(line) + "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') throw invalid_input(where(line) + "unterminated string");
    out.data = text.substr(1, text.size() - 2);
  } else if (text.front() == '[') {
    if (text.back() != ']') throw invalid_input(where(line) + "arrays must close on the same line");
    std::vector<double> items;
    std::stringstream ss(text.substr(1, text.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) {
        if (ss.eof() && items.empty()) break;
        throw invalid_input(where(line) + "empty array element");
      }
      items.push_back(parse_number(item, line));
    }
    out.data = std::move(items);
  } else if (text == "true" || text == "false") {
    out.data = text == "true";
  } else {
    out.data = parse_number(text, line);
  }
  return out;
}

class Table {
public:
  explicit Table(std::map<std::string, Value> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<double> number(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (auto* d = std::get_if<double>(&v->data)) return *d;
    throw invalid_input(where(v->line) + key + " must be a number");
  }

  std::optional<long long> integer(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    const auto* d = std::get_if<double>(&v->data);
    if (!d || std::floor(*d) != *d || std::abs(*d) > 9e15) throw invalid_input(where(v->line) + key + " must be an integer");
    return static_cast<long long>(*d);
  }

  std::optional<std::uint64_t> unsigned64(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->raw.data(), v->raw.data() + v->raw.size(), out);
    if (ec != std::errc{} || ptr != v->raw.data() + v->raw.size()) {
      throw invalid_input(where(v->line) + key + " must be an unsigned 64-bit integer");
    }
    return out;
  }

  std::optional<std::string> string(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (auto* s = std::get_if<std::string>(&v->data)) return *s;
    throw invalid_input(where(v->line) + key + " must be a quoted string");
  }

  std::optional<bool> boolean(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (auto* b = std::get_if<bool>(&v->data)) return *b;
    throw invalid_input(where(v->line) + key + " must be true or false");
  }

  std::optional<std::vector<double>> array(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (auto* a = std::get_if<std::vector<double>>(&v->data)) return *a;
    if (auto* d = std::get_if<double>(&v->data)) return std::vector<double>{*d};
    throw invalid_input(where(v->line) + key + " must be a numeric array");
  }

  void require_empty() const {
    if (values_.empty()) return;
    const auto& [key, v] = *values_.begin();
    throw invalid_input(where(v.line) + "unknown or unused key '" + key + "'");
  }

private:
  std::optional<Value> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    Value v = std::move(it->second);
    values_.erase(it);
    return v;
  }

  std::map<std::string, Value> values_;
};

inline Table tokenize(std::istream& is) {
  std::map<std::string, Value> values;
  std::string section;
  std::string text;
  int line = 0;
  while (std::getline(is, text)) {
    ++line;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '"') quoted = !quoted;
      if (text[i] == '#' && !quoted) {
        text.resize(i);
        break;
      }
    }
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw invalid_input(where(line) + "malformed section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) throw invalid_input(where(line) + "empty section name");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw invalid_input(where(line) + "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw invalid_input(where(line) + "missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (values.count(full)) throw invalid_input(where(line) + "duplicate key '" + full + "'");
    values.emplace(full, parse_value(trim(text.substr(eq + 1)), line));
  }
  return Table(std::move(values));
}

inline std::vector<double> range_mrad(double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround(hi / step));
  const double per = std::round(1.0 / step);
  const bool reciprocal = std::abs(per * step - 1.0) < 1e-12;
  for (int j = 0; j <= n; ++j) out.push_back((reciprocal ? j / per : j * step) / 1e3);
  return out;
}

inline GridSpec read_grid(Table& t) {
  GridSpec g;
  if (auto v = t.integer("grid.nx")) g.nx = static_cast<int>(*v);
  if (auto v = t.integer("grid.ny")) g.ny = static_cast<int>(*v);
  if (auto v = t.number("grid.dx_um")) g.dx = *v / 1e6;
  if (auto v = t.number("grid.dy_um")) g.dy = *v / 1e6;
  return g;
}

inline void read_pattern(Table& t, RunConfig& c) {
  const std::string type = t.string("pattern.type").value_or("double_petal");
  if (type == "double_petal") {
    DoublePetal s;
    if (auto v = t.number("pattern.waist_um")) s.waist = *v / 1e6;
    if (auto v = t.number("pattern.separation_um")) s.separation = *v / 1e6;
    if (auto v = t.number("pattern.theta_rad")) s.theta = *v;
    c.pattern = s;
  } else if (type == "grid") {
    GridPattern s;
    if (auto v = t.number("pattern.bar_spacing_um")) s.bar_spacing = *v / 1e6;
    if (auto v = t.number("pattern.bar_width_um")) s.bar_width = *v / 1e6;
    if (auto v = t.integer("pattern.n_bars")) s.n_bars = static_cast<int>(*v);
    c.pattern = s;
  } else if (type == "letter") {
    Letter s;
    if (auto v = t.string("pattern.glyph")) {
      if (v->size() != 1) throw invalid_input("config: pattern.glyph must be a single character, got \"" + *v + "\"");
      s.glyph = (*v)[0];
    }
    if (auto v = t.number("pattern.height_um")) s.height = *v / 1e6;
    c.pattern = s;
  } else if (type == "lg") {
    LGMode s;
    if (auto v = t.integer("pattern.p")) s.p = static_cast<int>(*v);
    if (auto v = t.integer("pattern.l")) s.l = static_cast<int>(*v);
    if (auto v = t.number("pattern.waist_um")) s.waist = *v / 1e6;
    c.pattern = s;
  } else if (type == "file") {
    auto path = t.string("pattern.path");
    if (!path) throw invalid_input("config: pattern type \"file\" needs pattern.path");
    c.input_path = *path;
  } else {
    throw invalid_input("config: unknown pattern.type \"" + type +
                        "\" (expected double_petal, grid, letter, lg or file)");
  }
}

}  // namespace detail

/// Parse configuration text; unknown keys and malformed values raise invalid_input.
inline RunConfig parse_config(std::istream& is) {
  detail::Table t = detail::tokenize(is);
  RunConfig c;
  c.grid = detail::read_grid(t);
  detail::read_pattern(t, c);
  if (auto v = t.number("storage.D_cm2_per_s")) c.storage.D = *v / 1e4;
  if (auto v = t.number("storage.t_us")) c.storage.t = *v / 1e6;
  if (auto v = t.number("storage.alpha_rad")) c.storage.alpha = *v;
  if (auto v = t.number("storage.beta_mrad")) c.storage.beta = *v / 1e3;
  if (auto v = t.number("storage.lambda_c_nm")) c.storage.lambda_c = *v / 1e9;

  if (auto v = t.array("sweep.betas_mrad")) {
    c.betas.clear();
    for (double b : *v) c.betas.push_back(b / 1e3);
  } else {
    c.betas = detail::range_mrad(3.0, 0.1);
  }
  if (auto v = t.array("sweep.times_us")) {
    for (double x : *v) c.times.push_back(x / 1e6);
  } else {
    c.times = {c.storage.t};
  }
  if (auto v = t.boolean("sweep.images")) c.sweep_images = *v;

  if (auto v = t.array("mc.n_list")) {
    c.n_list.clear();
    for (double n : *v) {
      if (n < 0.0 || std::floor(n) != n) throw invalid_input("config: mc.n_list entries must be non-negative integers");
      c.n_list.push_back(static_cast<std::size_t>(n));
    }
  }
  if (auto v = t.unsigned64("mc.seed")) c.seed = *v;
  if (auto v = t.string("output.dir")) c.out_dir = *v;
  t.require_empty();
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw invalid_input("cannot open config '" + path.string() + "': " + std::strerror(errno));
  return parse_config(is);
}

namespace detail {

/// Shortest decimal for v expressed in a unit `scale` times smaller than SI, chosen so
/// that parsing it back (text / scale) gives v exactly.
inline std::string num(double v, double scale = 1.0) {
  char buf[64];
  std::string first;
  double y = v * scale;
  for (int step = 0; step < 8; ++step) {
    for (double c : {y, std::nextafter(y, -INFINITY), std::nextafter(y, INFINITY)}) {
      const auto end = std::to_chars(buf, buf + sizeof buf, c).ptr;
      std::string text(buf, end);
      if (first.empty()) first = text;
      double back = 0.0;
      std::from_chars(text.data(), text.data() + text.size(), back);
      if (back / scale == v) return text;
    }
    y = std::nextafter(y, v * scale > y ? INFINITY : -INFINITY);
  }
  return first;
}

inline std::string num_array(const std::vector<double>& v, double scale) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i], scale);
  return out + "]";
}

}  // namespace detail

/// Normalised, fully resolved configuration in the input syntax; parse_config of the
/// result reproduces the same RunConfig.
inline std::string echo_config(const RunConfig& c) {
  using detail::num;
  std::ostringstream os;
  os << "[grid]\nnx = " << c.grid.nx << "\nny = " << c.grid.ny << "\ndx_um = " << num(c.grid.dx, 1e6)
     << "\ndy_um = " << num(c.grid.dy, 1e6) << "\n\n[pattern]\n";
  if (c.input_path) {
    os << "type = \"file\"\npath = \"" << c.input_path->string() << "\"\n";
  } else {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, DoublePetal>) {
            os << "type = \"double_petal\"\nwaist_um = " << num(s.waist, 1e6)
               << "\nseparation_um = " << num(s.separation, 1e6) << "\ntheta_rad = " << num(s.theta) << "\n";
          } else if constexpr (std::is_same_v<T, GridPattern>) {
            os << "type = \"grid\"\nbar_spacing_um = " << num(s.bar_spacing, 1e6)
               << "\nbar_width_um = " << num(s.bar_width, 1e6) << "\nn_bars = " << s.n_bars << "\n";
          } else if constexpr (std::is_same_v<T, Letter>) {
            os << "type = \"letter\"\nglyph = \"" << s.glyph << "\"\nheight_um = " << num(s.height, 1e6) << "\n";
          } else {
            os << "type = \"lg\"\np = " << s.p << "\nl = " << s.l << "\nwaist_um = " << num(s.waist, 1e6) << "\n";
          }
        },
        c.pattern);
  }
  const StorageParams& p = c.storage;
  os << "\n[storage]\nD_cm2_per_s = " << num(p.D, 1e4) << "\nt_us = " << num(p.t, 1e6)
     << "\nalpha_rad = " << num(p.alpha) << "\nbeta_mrad = " << num(p.beta, 1e3)
     << "\nlambda_c_nm = " << num(p.lambda_c, 1e9) << "\n\n[sweep]\nbetas_mrad = " << detail::num_array(c.betas, 1e3)
     << "\ntimes_us = " << detail::num_array(c.times, 1e6) << "\nimages = " << (c.sweep_images ? "true" : "false")
     << "\n\n[mc]\nn_list = [";
  for (std::size_t i = 0; i < c.n_list.size(); ++i) os << (i ? ", " : "") << c.n_list[i];
  os << "]\nseed = " << c.seed << "\n\n[output]\ndir = \"" << c.out_dir.string() << "\"\n";
  return os.str();
}

}  // namespace sfmod::cli
