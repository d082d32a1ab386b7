#pragma once

// Experiment configuration: a flat `key = value` document.
//
//   # comment
//   seed = 42
//   replicas = 2000
//   N_list = 50, 100, 200
//   t_list = 0.5
//   grid.dt = 1e-3
//
// Unknown keys, malformed values and missing required fields raise
// ConfigError carrying the offending field path.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pamlab/errors.hpp"
#include "pamlab/oracle.hpp"
#include "pamlab/quadrature.hpp"
#include "pamlab/solver.hpp"

namespace pamlab {

enum class Subcommand { verify, oracle, simulate, clt, fdd, ergodic, local };

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::verify: return "verify";
    case Subcommand::oracle: return "oracle";
    case Subcommand::simulate: return "simulate";
    case Subcommand::clt: return "clt";
    case Subcommand::fdd: return "fdd";
    case Subcommand::ergodic: return "ergodic";
    case Subcommand::local: return "local";
  }
  return "?";
}

inline std::optional<Subcommand> parse_subcommand(const std::string& s) {
  for (auto c : {Subcommand::verify, Subcommand::oracle, Subcommand::simulate, Subcommand::clt, Subcommand::fdd,
                 Subcommand::ergodic, Subcommand::local})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

/// Shortest round-trip text is not required; 17 significant digits always are.
inline std::string format_double(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

struct ExperimentConfig {
  Subcommand subcommand = Subcommand::verify;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;
  std::vector<double> N_list;
  std::vector<double> t_list;
  FieldKind field_kind = FieldKind::pam;
  std::string route = "field";  // fdd only: field | projected
  // grid: t_max, x_min and x_max follow from N_list, t_list and the
  // truncation margin unless given
  GridSpec grid;
  bool grid_t_max_set = false, grid_x_min_set = false, grid_x_max_set = false;
  SolverConfig solver;
  bool margin_set = false;
  QuadratureSpec quad;
  std::string output_dir = ".";
  unsigned workers = 0;

  /// The solver configuration for output on [0, N_max] up to t_max.
  SolverConfig effective_solver() const {
    SolverConfig s = solver;
    s.grid = grid;
    const double tmax = t_list.empty() ? 1.0 : *std::max_element(t_list.begin(), t_list.end());
    const double Nmax = N_list.empty() ? 0.0 : *std::max_element(N_list.begin(), N_list.end());
    if (!grid_t_max_set) s.grid.t_max = tmax;
    if (!margin_set) s.truncation_margin = 6.0 * std::sqrt(s.grid.t_max);
    if (!grid_x_min_set) s.grid.x_min = -s.truncation_margin;
    if (!grid_x_max_set) s.grid.x_max = Nmax + s.truncation_margin;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const std::string s = trim(v);
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a finite real, got '" + s + "'");
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const std::string s = trim(v);
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(key, "expected a nonnegative integer, got '" + s + "'");
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of reals");
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v = trim(value);
  if (key == "subcommand") {
    auto s = parse_subcommand(v);
    if (!s) throw ConfigError(key, "unknown subcommand '" + v + "'");
    c.subcommand = *s;
  } else if (key == "seed") {
    c.seed = parse_uint(key, v);
  } else if (key == "replicas") {
    c.replicas = parse_uint(key, v);
  } else if (key == "N_list") {
    c.N_list = parse_list(key, v);
  } else if (key == "t_list") {
    c.t_list = parse_list(key, v);
  } else if (key == "field_kind") {
    if (v == "pam") c.field_kind = FieldKind::pam;
    else if (v == "gaussian_proxy") c.field_kind = FieldKind::gaussian_proxy;
    else throw ConfigError(key, "expected pam or gaussian_proxy");
  } else if (key == "route") {
    if (v != "field" && v != "projected") throw ConfigError(key, "expected field or projected");
    c.route = v;
  } else if (key == "output_dir") {
    if (v.empty()) throw ConfigError(key, "must not be empty");
    c.output_dir = v;
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(parse_uint(key, v));
  } else if (key == "grid.t_max") {
    c.grid.t_max = parse_real(key, v);
    c.grid_t_max_set = true;
  } else if (key == "grid.dt") {
    c.grid.dt = parse_real(key, v);
  } else if (key == "grid.x_min") {
    c.grid.x_min = parse_real(key, v);
    c.grid_x_min_set = true;
  } else if (key == "grid.x_max") {
    c.grid.x_max = parse_real(key, v);
    c.grid_x_max_set = true;
  } else if (key == "grid.dx") {
    c.grid.dx = parse_real(key, v);
  } else if (key == "solver.truncation_margin") {
    c.solver.truncation_margin = parse_real(key, v);
    c.margin_set = true;
  } else if (key == "solver.scheme") {
    if (v != "semigroup_euler") throw ConfigError(key, "only semigroup_euler is available");
  } else if (key == "solver.first_step") {
    if (v != "exact_kernel") throw ConfigError(key, "only exact_kernel is available");
  } else if (key == "solver.time_grid") {
    if (v == "graded") c.solver.time_grid = TimeGridKind::graded;
    else if (v == "uniform") c.solver.time_grid = TimeGridKind::uniform;
    else throw ConfigError(key, "expected graded or uniform");
  } else if (key == "solver.warmup_start") {
    c.solver.warmup_start = parse_real(key, v);
  } else if (key == "solver.warmup_ratio") {
    c.solver.warmup_ratio = parse_real(key, v);
  } else if (key == "quad.abs_tol") {
    c.quad.abs_tol = parse_real(key, v);
  } else if (key == "quad.rel_tol") {
    c.quad.rel_tol = parse_real(key, v);
  } else if (key == "quad.max_subdivisions") {
    c.quad.max_subdivisions = static_cast<int>(parse_uint(key, v));
  } else if (key == "quad.endpoint_substitution") {
    if (v == "none") c.quad.endpoint_substitution = EndpointSubstitution::none;
    else if (v == "inverse_time") c.quad.endpoint_substitution = EndpointSubstitution::inverse_time;
    else throw ConfigError(key, "expected none or inverse_time");
  } else {
    throw ConfigError(key, "unknown key");
  }
}

/// Parses a document into `c`; later keys override earlier ones.
inline void parse_config_text(ExperimentConfig& c, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    apply_setting(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void parse_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  parse_config_text(c, ss.str());
}

/// Checks the fields each subcommand needs.
inline void validate(const ExperimentConfig& c) {
  auto need_seed = [&] {
    if (!c.seed) throw ConfigError("seed", "required for " + std::string(to_string(c.subcommand)));
  };
  auto need_replicas = [&](std::uint64_t min) {
    if (!c.replicas) throw ConfigError("replicas", "required for " + std::string(to_string(c.subcommand)));
    if (*c.replicas < min) throw ConfigError("replicas", "must be >= " + std::to_string(min));
  };
  auto need_N = [&](bool one) {
    if (c.N_list.empty()) throw ConfigError("N_list", "required for " + std::string(to_string(c.subcommand)));
    if (one && c.N_list.size() != 1) throw ConfigError("N_list", "expects exactly one N");
    for (std::size_t i = 0; i < c.N_list.size(); ++i) {
      if (!(c.N_list[i] >= std::numbers::e)) throw ConfigError("N_list", "every N must be >= e");
      if (i > 0 && !(c.N_list[i] > c.N_list[i - 1])) throw ConfigError("N_list", "must be ascending");
    }
  };
  auto need_t = [&] {
    if (c.t_list.empty()) throw ConfigError("t_list", "required for " + std::string(to_string(c.subcommand)));
    for (std::size_t i = 0; i < c.t_list.size(); ++i) {
      if (!(c.t_list[i] > 0.0)) throw ConfigError("t_list", "times must be positive");
      if (i > 0 && !(c.t_list[i] > c.t_list[i - 1])) throw ConfigError("t_list", "must be ascending");
    }
  };
  c.quad.validate();
  switch (c.subcommand) {
    case Subcommand::verify: return;
    case Subcommand::oracle:
      need_N(false);
      need_t();
      return;
    case Subcommand::simulate:
    case Subcommand::fdd:
      need_seed();
      need_replicas(2);
      need_N(c.subcommand == Subcommand::fdd);
      need_t();
      break;
    case Subcommand::clt:
    case Subcommand::ergodic:
      need_seed();
      need_replicas(100);
      need_N(false);
      need_t();
      break;
    case Subcommand::local:
      need_seed();
      need_replicas(2);
      need_N(true);
      need_t();
      for (double t : c.t_list)
        if (!(t <= 1.0 / std::numbers::e)) throw ConfigError("t_list", "local needs times in (0, 1/e]");
      break;
  }
  if (c.subcommand == Subcommand::fdd && c.route == "projected" && c.field_kind != FieldKind::gaussian_proxy)
    throw ConfigError("route", "projected requires field_kind = gaussian_proxy");
  const SolverConfig s = c.effective_solver();
  s.validate(c.N_list.back());
  if (s.grid.t_max < c.t_list.back() * (1.0 - 1e-12)) throw ConfigError("grid.t_max", "below the largest time");
  for (double N : c.N_list)
    if (!detail::on_lattice(N, s.grid.dx)) throw ConfigError("N_list", "every N must be a multiple of grid.dx");
}

}  // namespace pamlab
