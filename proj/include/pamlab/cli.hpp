#pragma once

// Subcommand orchestration behind tools/pamlab: runs one ExperimentConfig,
// writes CSV outputs and a JSON manifest into output_dir, and maps failures
// to exit codes (0 ok, 1 verification failed, 2 bad configuration,
// 3 numerical failure).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pamlab/config.hpp"
#include "pamlab/stats.hpp"
#include "pamlab/verify.hpp"

#define PAMLAB_VERSION "0.1.0"

namespace pamlab {

enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitConfig = 2, kExitNumerical = 3 };

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["subcommand"] = to_string(c.subcommand);
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  j["replicas"] = c.replicas ? nlohmann::ordered_json(*c.replicas) : nlohmann::ordered_json(nullptr);
  j["N_list"] = c.N_list;
  j["t_list"] = c.t_list;
  j["field_kind"] = to_string(c.field_kind);
  j["route"] = c.route;
  const SolverConfig s = c.effective_solver();
  j["grid"] = {{"t_max", s.grid.t_max}, {"dt", s.grid.dt}, {"x_min", s.grid.x_min}, {"x_max", s.grid.x_max},
               {"dx", s.grid.dx}};
  j["solver"] = {{"truncation_margin", s.truncation_margin},
                 {"scheme", "semigroup_euler"},
                 {"first_step", "exact_kernel"},
                 {"time_grid", s.time_grid == TimeGridKind::graded ? "graded" : "uniform"},
                 {"warmup_start", s.warmup_start},
                 {"warmup_ratio", s.warmup_ratio}};
  j["quad"] = {{"abs_tol", c.quad.abs_tol},
               {"rel_tol", c.quad.rel_tol},
               {"max_subdivisions", c.quad.max_subdivisions},
               {"endpoint_substitution",
                c.quad.endpoint_substitution == EndpointSubstitution::none ? "none" : "inverse_time"}};
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers == 0 ? default_workers() : c.workers;
  return j;
}

inline nlohmann::ordered_json versions_json() {
  return {{"pamlab", PAMLAB_VERSION},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

namespace detail {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw ResourceError("cannot write " + path.string());
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(v), first = false), ...);
    out_ << '\n';
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline SimulationSettings settings_from(const ExperimentConfig& c) {
  SimulationSettings s;
  s.fixed = c.effective_solver();
  s.workers = c.workers;
  return s;
}

inline std::string n_tag(double N) {
  std::string s = format_double(N);
  for (char& ch : s)
    if (ch == '.') ch = 'p';
  return s;
}

}  // namespace detail

/// Runs a validated configuration.  Progress and summaries go to `log`.
inline int run(const ExperimentConfig& c, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(c);
  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["subcommand"] = to_string(c.subcommand);
  manifest["config"] = config_json(c);
  manifest["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  manifest["versions"] = versions_json();
  std::vector<std::string> outputs;
  int status = kExitOk;
  const SimulationSettings sim = detail::settings_from(c);

  switch (c.subcommand) {
    case Subcommand::verify: {
      const VerifyReport rep = run_verify_suite(c.quad);
      detail::CsvWriter csv(dir / "verify.csv", "check,passed,value,bound");
      for (const auto& chk : rep.checks) {
        log << (chk.passed ? "PASS " : "FAIL ") << chk.name << "  value=" << format_double(chk.value)
            << " bound=" << format_double(chk.bound) << (chk.detail.empty() ? "" : "  " + chk.detail) << '\n';
        csv.row(chk.name, chk.passed, chk.value, chk.bound);
      }
      outputs.push_back(csv.path().filename().string());
      manifest["pass"] = rep.passed();
      status = rep.passed() ? kExitOk : kExitFailed;
      break;
    }
    case Subcommand::oracle: {
      detail::CsvWriter csv(dir / "oracle.csv",
                            "N,t,theta,second_moment_u0,var_avg_pam,var_avg_proxy,oracle_var_ratio,"
                            "oracle_var_ratio_proxy,G_x1");
      log << "N,t,theta,second_moment_u0,var_avg_pam,var_avg_proxy,oracle_var_ratio,oracle_var_ratio_proxy,G_x1\n";
      for (double N : c.N_list)
        for (double t : c.t_list) {
          const double vp = var_avg({N, t, FieldKind::pam}, c.quad);
          const double vg = var_avg({N, t, FieldKind::gaussian_proxy}, c.quad);
          const double scale = N / (2.0 * t * std::log(N));
          const double row[] = {N, t, theta(t), second_moment_u(t, 0.0), vp, vg, vp * scale, vg * scale,
                                g_fn({N, t, 1.0}, c.quad)};
          csv.row(row[0], row[1], row[2], row[3], row[4], row[5], row[6], row[7], row[8]);
          for (std::size_t i = 0; i < 9; ++i) log << (i ? "," : "") << format_double(row[i]);
          log << '\n';
        }
      outputs.push_back(csv.path().filename().string());
      break;
    }
    case Subcommand::simulate: {
      const AverageEnsemble e = simulate_averages(c.t_list, c.N_list, *c.replicas, *c.seed, c.field_kind, sim);
      for (std::size_t s = 0; s < e.Ns.size(); ++s) {
        const std::string name = e.Ns.size() == 1 ? "simulate.csv" : "simulate_N" + detail::n_tag(e.Ns[s]) + ".csv";
        detail::CsvWriter csv(dir / name, "replica,t,S");
        for (std::uint64_t r = 0; r < *c.replicas; ++r)
          for (std::size_t k = 0; k < e.times.size(); ++k) csv.row(r, e.times[k], e.at(k, s)[r]);
        outputs.push_back(name);
      }
      manifest["negative_cells"] = e.negatives;
      log << "wrote " << outputs.size() << " file(s), " << *c.replicas << " replicas\n";
      break;
    }
    case Subcommand::clt: {
      const AverageEnsemble e = simulate_averages(c.t_list, c.N_list, *c.replicas, *c.seed, c.field_kind, sim);
      detail::CsvWriter csv(dir / "clt.csv", "N,t,replicas,emp_var_ratio,emp_var_se,oracle_var_ratio,ks_stat,ks_crit_1pct");
      for (std::size_t k = 0; k < e.times.size(); ++k) {
        const SweepResult r = sweep_from_ensemble(e, k, c.field_kind, c.quad);
        for (std::size_t i = 0; i < r.Ns.size(); ++i) {
          csv.row(r.Ns[i], r.t, r.replicas, r.var_ratio[i], r.var_ratio_se[i], r.oracle_ratio[i], r.ks[i],
                  r.ks_critical[i]);
          log << "N=" << format_double(r.Ns[i]) << " t=" << format_double(r.t) << " ratio "
              << format_double(r.var_ratio[i]) << " +- " << format_double(r.var_ratio_se[i]) << " oracle "
              << format_double(r.oracle_ratio[i]) << " ks " << format_double(r.ks[i]) << '\n';
        }
      }
      manifest["negative_cells"] = e.negatives;
      outputs.push_back("clt.csv");
      break;
    }
    case Subcommand::fdd: {
      const FddResult r = fdd_check(c.t_list, c.N_list.front(), *c.replicas, *c.seed, c.field_kind, sim,
                                    c.route == "projected" ? ProxyRoute::projected : ProxyRoute::field);
      detail::CsvWriter csv(dir / "fdd.csv", "t_i,t_j,emp_scaled_cov,se,oracle_scaled_cov,limit_2min");
      const std::size_t k = r.k();
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          csv.row(r.ts[i], r.ts[j], r.emp[i * k + j], r.se[i * k + j], r.oracle[i * k + j], r.limit[i * k + j]);
      manifest["min_eigenvalue"] = r.min_eigenvalue;
      log << "scaled covariance matrix written, min eigenvalue " << format_double(r.min_eigenvalue) << '\n';
      outputs.push_back("fdd.csv");
      break;
    }
    case Subcommand::ergodic: {
      const AverageEnsemble e = simulate_averages(c.t_list, c.N_list, *c.replicas, *c.seed, c.field_kind, sim);
      detail::CsvWriter csv(dir / "ergodic.csv", "N,t,replicas,rms,rms_se,oracle_rms,scheme_rms,A");
      for (std::size_t k = 0; k < e.times.size(); ++k) {
        const ErgodicResult r = ergodic_from_ensemble(e, k, c.field_kind, sim, c.quad);
        for (std::size_t i = 0; i < r.Ns.size(); ++i) {
          csv.row(r.Ns[i], r.t, r.replicas, r.rms[i], r.rms_se[i], r.oracle_rms[i], r.scheme_rms[i], r.A[i]);
          log << "N=" << format_double(r.Ns[i]) << " t=" << format_double(r.t) << " rms "
              << format_double(r.rms[i]) << " oracle " << format_double(r.oracle_rms[i]) << '\n';
        }
      }
      manifest["negative_cells"] = e.negatives;
      outputs.push_back("ergodic.csv");
      break;
    }
    case Subcommand::local: {
      const AverageEnsemble e = simulate_averages(c.t_list, c.N_list, *c.replicas, *c.seed, c.field_kind, sim);
      const LocalResult r = local_from_ensemble(e, 0, c.field_kind, c.quad);
      detail::CsvWriter csv(dir / "local.csv",
                            "N,t,replicas,mean_R,mean_R_se,oracle_R,pz_frequency,pz_frequency_se,pz_bound");
      for (std::size_t k = 0; k < r.ts.size(); ++k) {
        csv.row(r.N, r.ts[k], r.replicas, r.mean_R[k], r.mean_R_se[k], r.oracle_R[k], r.pz[k].frequency,
                r.pz[k].frequency_se, r.pz[k].bound);
        log << "t=" << format_double(r.ts[k]) << " E[R] " << format_double(r.mean_R[k]) << " +- "
            << format_double(r.mean_R_se[k]) << " oracle " << format_double(r.oracle_R[k]) << '\n';
      }
      manifest["negative_cells"] = e.negatives;
      outputs.push_back("local.csv");
      break;
    }
  }
  manifest["outputs"] = outputs;
  manifest["exit_status"] = status;
  manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream m(dir / "manifest.json");
  if (!m) throw ResourceError("cannot write manifest.json");
  m << manifest.dump(2) << '\n';
  return status;
}

/// run() with failures mapped to exit codes and reported on `err`.
inline int run_guarded(const ExperimentConfig& c, std::ostream& log, std::ostream& err) {
  try {
    return run(c, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid request: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace pamlab
