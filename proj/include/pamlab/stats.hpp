#pragma once

// Estimators and Monte Carlo checks against the oracle layer.
//
// The first half is pure functions of sample arrays.  The second half runs
// ensembles through the solver (or the projected proxy sampler) and reduces
// them; every reduction runs in replica order, so outputs are bit-identical
// for identical inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pamlab/errors.hpp"
#include "pamlab/gaussian.hpp"
#include "pamlab/oracle.hpp"
#include "pamlab/proxy_sampler.hpp"
#include "pamlab/scheme_moments.hpp"
#include "pamlab/solver.hpp"

namespace pamlab {

// ---------------------------------------------------------------------------
// sample statistics

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;     // unbiased
  double stderr_mean = 0.0;
  double variance_se = 0.0;  // sqrt(2/(n-1)) variance
};

inline SampleStats describe(const std::vector<double>& x) {
  if (x.size() < 2) throw DomainError("describe: need at least two samples");
  SampleStats s;
  s.n = x.size();
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / (n - 1.0);
  s.stderr_mean = std::sqrt(s.variance / n);
  s.variance_se = s.variance * std::sqrt(2.0 / (n - 1.0));
  return s;
}

/// Standard error of the variance estimate from `resamples` bootstrap draws.
inline double bootstrap_variance_se(const std::vector<double>& x, int resamples = 200, std::uint64_t seed = 1) {
  if (x.size() < 2) throw DomainError("bootstrap: need at least two samples");
  if (resamples < 2) throw DomainError("bootstrap: need at least two resamples");
  std::mt19937_64 gen(seed);
  const std::uint64_t n = x.size();
  std::vector<double> vars;
  vars.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double m = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double v = x[gen() % n];
      m += v;
      m2 += v * v;
    }
    m /= static_cast<double>(n);
    vars.push_back((m2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }
  SampleStats s = describe(vars);
  return std::sqrt(s.variance);
}

struct NormalitySummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;
  double ks_stat = 0.0;
  double ks_critical_1pct = 0.0;
  bool passes() const { return ks_stat < ks_critical_1pct; }
};

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// One-sample Kolmogorov-Smirnov statistic against N(mean, variance).
inline NormalitySummary ks_normal(const std::vector<double>& samples, double mean, double variance) {
  if (samples.size() < 8) throw DomainError("ks_normal: need at least 8 samples");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("ks_normal: variance must be positive");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (!(*mx > *mn)) throw DomainError("ks_normal: degenerate samples (zero spread)");
  const SampleStats st = describe(samples);
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = norm_cdf((x[i] - mean) / sd);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return {x.size(), st.mean, st.variance, st.stderr_mean, d, ks_critical_1pct(x.size())};
}

struct CovarianceEstimate {
  std::size_t k = 0, n = 0;
  std::vector<double> cov;  // k x k, row-major
  std::vector<double> se;   // sqrt((s_ii s_jj + s_ij^2)/(n-1))
  double at(std::size_t i, std::size_t j) const { return cov[i * k + j]; }
  double se_at(std::size_t i, std::size_t j) const { return se[i * k + j]; }
};

/// Sample covariance of rows x[replica][component].
inline CovarianceEstimate covariance_estimate(const std::vector<std::vector<double>>& x) {
  if (x.size() < 2) throw DomainError("covariance: need at least two samples");
  CovarianceEstimate c;
  c.k = x.front().size();
  c.n = x.size();
  std::vector<double> mean(c.k, 0.0);
  for (const auto& row : x) {
    if (row.size() != c.k) throw DomainError("covariance: ragged samples");
    for (std::size_t i = 0; i < c.k; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(c.n);
  c.cov.assign(c.k * c.k, 0.0);
  for (const auto& row : x)
    for (std::size_t i = 0; i < c.k; ++i)
      for (std::size_t j = 0; j <= i; ++j) c.cov[i * c.k + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
  const double dn = static_cast<double>(c.n - 1);
  for (std::size_t i = 0; i < c.k; ++i)
    for (std::size_t j = 0; j <= i; ++j) c.cov[j * c.k + i] = c.cov[i * c.k + j] /= dn;
  c.se.assign(c.k * c.k, 0.0);
  for (std::size_t i = 0; i < c.k; ++i)
    for (std::size_t j = 0; j < c.k; ++j)
      c.se[i * c.k + j] = std::sqrt((c.at(i, i) * c.at(j, j) + c.at(i, j) * c.at(i, j)) / dn);
  return c;
}

/// Smallest eigenvalue of a symmetric k x k row-major matrix.
inline double min_eigenvalue(const std::vector<double>& m, std::size_t k) {
  if (m.size() != k * k) throw DomainError("min_eigenvalue: size mismatch");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i * k + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

enum class Direction { increasing, decreasing };

/// Monotone along the sequence, except that at most one adjacent pair may go
/// the wrong way by no more than one (combined) standard error.
inline bool monotone_with_slack(const std::vector<double>& v, const std::vector<double>& se, Direction dir) {
  if (v.size() != se.size()) throw DomainError("monotone_with_slack: size mismatch");
  int violations = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double step = dir == Direction::decreasing ? v[i] - v[i + 1] : v[i + 1] - v[i];
    if (step > 0.0) continue;
    if (-step > std::hypot(se[i], se[i + 1])) return false;
    ++violations;
  }
  return violations <= 1;
}

/// Strict monotonicity, for deterministic sequences.
inline bool strictly_monotone(const std::vector<double>& v, Direction dir) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (dir == Direction::decreasing ? !(v[i + 1] < v[i]) : !(v[i + 1] > v[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// roughness

struct RoughnessSeries {
  std::vector<double> times;
  std::vector<double> values;       // S^2/(t log(1/t))
  std::vector<double> running_max;
};

inline double roughness_value(double S, double t) {
  if (!(t > 0.0) || !(t <= 1.0 / std::numbers::e)) throw DomainError("roughness: t must lie in (0, 1/e]");
  return S * S / (t * std::log(1.0 / t));
}

inline RoughnessSeries roughness_series(const AveragePath& path, const std::vector<double>& t_grid) {
  RoughnessSeries r;
  double mx = -INFINITY;
  for (double t : t_grid) {
    if (!(t > 0.0) || !(t <= 1.0 / std::numbers::e)) throw DomainError("roughness: t must lie in (0, 1/e]");
    auto it = std::find_if(path.times.begin(), path.times.end(),
                           [&](double s) { return std::abs(s - t) <= 1e-12 * t; });
    if (it == path.times.end()) throw DomainError("roughness: path does not cover t=" + std::to_string(t));
    const double v = roughness_value(path.values[static_cast<std::size_t>(it - path.times.begin())], t);
    mx = std::max(mx, v);
    r.times.push_back(t);
    r.values.push_back(v);
    r.running_max.push_back(mx);
  }
  return r;
}

/// Paley-Zygmund check for a nonnegative sample Z: the observed frequency of
/// Z >= E[Z]/2 against the lower bound E[Z]^2/(4 E[Z^2]).
struct PaleyZygmund {
  double mean = 0.0, second_moment = 0.0;
  double frequency = 0.0, frequency_se = 0.0;
  double bound = 0.0;
  bool holds(double k_se = 3.0) const { return frequency + k_se * frequency_se >= bound; }
};

inline PaleyZygmund paley_zygmund(const std::vector<double>& z) {
  if (z.size() < 2) throw DomainError("paley_zygmund: need at least two samples");
  PaleyZygmund p;
  const double n = static_cast<double>(z.size());
  for (double v : z) {
    if (v < 0.0) throw DomainError("paley_zygmund: samples must be nonnegative");
    p.mean += v;
    p.second_moment += v * v;
  }
  p.mean /= n;
  p.second_moment /= n;
  if (!(p.second_moment > 0.0)) throw DomainError("paley_zygmund: samples are all zero");
  for (double v : z)
    if (v >= 0.5 * p.mean) p.frequency += 1.0;
  p.frequency /= n;
  p.frequency_se = std::sqrt(p.frequency * (1.0 - p.frequency) / n);
  p.bound = p.mean * p.mean / (4.0 * p.second_moment);
  return p;
}

// ---------------------------------------------------------------------------
// ensembles

/// Discretization and scheduling for the Monte Carlo checks.
struct SimulationSettings {
  double dt = 1e-3;
  double dx = 1e-2;
  TimeGridKind time_grid = TimeGridKind::graded;
  double margin_factor = 6.0;  // L = margin_factor sqrt(t_max)
  double warmup_start = 1e-10;
  double warmup_ratio = 0.05;
  unsigned workers = 0;        // 0: default_workers()
  std::optional<SolverConfig> fixed;  // used as given when set

  SolverConfig config(double N, double t_max) const {
    if (fixed) {
      fixed->validate(N);
      if (fixed->grid.t_max < t_max * (1.0 - 1e-12)) throw DomainError("simulate: grid.t_max below the last time");
      return *fixed;
    }
    SolverConfig c = SolverConfig::for_window(N, t_max, dt, dx);
    c.time_grid = time_grid;
    c.warmup_start = warmup_start;
    c.warmup_ratio = warmup_ratio;
    c.truncation_margin = margin_factor * std::sqrt(t_max);
    c.grid.x_min = -c.truncation_margin;
    c.grid.x_max = N + c.truncation_margin;
    c.validate(N);
    return c;
  }
};

/// Spatial averages S_{N,t} (or G_{N,t}) from the field solver,
/// [time][scale][replica].
struct AverageEnsemble {
  std::vector<double> times, Ns;
  std::vector<std::vector<std::vector<double>>> values;
  std::uint64_t negatives = 0;

  const std::vector<double>& at(std::size_t time, std::size_t scale) const { return values[time][scale]; }
};

inline AverageEnsemble simulate_averages(std::vector<double> times, std::vector<double> Ns, std::uint64_t replicas,
                                         std::uint64_t seed, FieldKind kind, const SimulationSettings& sim = {}) {
  if (times.empty()) throw DomainError("simulate: no times");
  if (Ns.empty()) throw DomainError("simulate: no scales");
  if (replicas < 2) throw DomainError("simulate: need at least two replicas");
  std::sort(times.begin(), times.end());
  const double Nmax = *std::max_element(Ns.begin(), Ns.end());
  const SolverConfig cfg = sim.config(Nmax, times.back());
  Observation obs;
  obs.times = times;
  obs.scales = Ns;
  const Plan plan = make_plan(cfg, obs);
  const auto recs = run_ensemble(cfg, plan, kind, seed, 0, replicas, sim.workers);
  AverageEnsemble e;
  e.times = plan.obs.times;
  e.Ns = Ns;
  e.values.assign(e.times.size(), std::vector<std::vector<double>>(Ns.size()));
  for (const auto& r : recs) {
    e.negatives += r.negatives;
    for (std::size_t k = 0; k < e.times.size(); ++k)
      for (std::size_t s = 0; s < Ns.size(); ++s) e.values[k][s].push_back(r.averages[k * Ns.size() + s]);
  }
  return e;
}

inline void check_scales(const std::vector<double>& Ns, const char* who) {
  if (Ns.empty()) throw DomainError(std::string(who) + ": Ns is empty");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (!(Ns[i] >= std::numbers::e)) throw DomainError(std::string(who) + ": every N must be >= e");
    if (i > 0 && !(Ns[i] > Ns[i - 1])) throw DomainError(std::string(who) + ": Ns must be ascending");
  }
}

struct SweepResult {
  double t = 0.0;
  std::uint64_t replicas = 0;
  std::vector<double> Ns;
  std::vector<double> var_ratio;     // empirical Var S N/log N / (2t)
  std::vector<double> var_ratio_se;
  std::vector<double> oracle_ratio;  // oracle Var S N/log N / (2t)
  std::vector<double> ks;            // against N(0, empirical variance)
  std::vector<double> ks_unit;       // sqrt(N/log N) S/sqrt(2t) against N(0, 1)
  std::vector<double> ks_critical;
  std::vector<std::vector<double>> normalized;  // sqrt(N/log N) S/sqrt(2t), [scale][replica]
};

inline SweepResult sweep_from_ensemble(const AverageEnsemble& e, std::size_t time, FieldKind kind,
                                       const QuadratureSpec& quad = {}) {
  SweepResult r;
  r.t = e.times[time];
  r.Ns = e.Ns;
  for (std::size_t s = 0; s < e.Ns.size(); ++s) {
    const double N = e.Ns[s];
    const auto& x = e.at(time, s);
    r.replicas = x.size();
    const double c = std::sqrt(N / std::log(N) / (2.0 * r.t));
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = c * x[i];
    const SampleStats st = describe(z);
    r.var_ratio.push_back(st.variance);
    r.var_ratio_se.push_back(st.variance_se);
    r.oracle_ratio.push_back(var_ratio({N, r.t, kind}, quad));
    r.ks.push_back(ks_normal(z, 0.0, st.variance).ks_stat);
    r.ks_unit.push_back(ks_normal(z, 0.0, 1.0).ks_stat);
    r.ks_critical.push_back(ks_critical_1pct(z.size()));
    r.normalized.push_back(std::move(z));
  }
  return r;
}

/// Variance ratios and normality of sqrt(N/log N) S_{N,t} along Ns.
inline SweepResult clt_sweep(double t, const std::vector<double>& Ns, std::uint64_t replicas, std::uint64_t seed,
                             FieldKind kind, const SimulationSettings& sim = {}) {
  check_scales(Ns, "clt_sweep");
  if (replicas < 100) throw DomainError("clt_sweep: need at least 100 replicas");
  return sweep_from_ensemble(simulate_averages({t}, Ns, replicas, seed, kind, sim), 0, kind);
}

enum class ProxyRoute { field, projected };

struct FddResult {
  double N = 0.0;
  std::uint64_t replicas = 0;
  std::vector<double> ts;
  std::vector<double> emp;     // empirical Cov N/log N, k x k row-major
  std::vector<double> se;
  std::vector<double> oracle;  // oracle Cov N/log N
  std::vector<double> limit;   // 2 min(t_i, t_j)
  double min_eigenvalue = 0.0;
  std::size_t k() const { return ts.size(); }
};

inline FddResult fdd_from_samples(double N, const std::vector<double>& ts, const std::vector<std::vector<double>>& rows,
                                  FieldKind kind, const QuadratureSpec& quad = {}) {
  FddResult r;
  r.N = N;
  r.ts = ts;
  r.replicas = rows.size();
  const CovarianceEstimate c = covariance_estimate(rows);
  const double scale = N / std::log(N);
  const std::size_t k = ts.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      r.emp.push_back(c.at(i, j) * scale);
      r.se.push_back(c.se_at(i, j) * scale);
      r.oracle.push_back(cov_avg(N, ts[i], ts[j], quad, kind) * scale);
      r.limit.push_back(2.0 * std::min(ts[i], ts[j]));
    }
  r.min_eigenvalue = min_eigenvalue(r.emp, k);
  return r;
}

/// Scaled covariance matrix of (S_{N,t_1}, ..., S_{N,t_k}).  The projected
/// route is available for the proxy only.
inline FddResult fdd_check(std::vector<double> ts, double N, std::uint64_t replicas, std::uint64_t seed,
                           FieldKind kind, const SimulationSettings& sim = {}, ProxyRoute route = ProxyRoute::field) {
  if (ts.empty()) throw DomainError("fdd_check: ts is empty");
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] > ts[i - 1])))
      throw DomainError("fdd_check: ts must be positive and ascending");
  if (!(N >= std::numbers::e)) throw DomainError("fdd_check: N must be >= e");
  if (replicas < 2) throw DomainError("fdd_check: need at least two replicas");
  std::vector<std::vector<double>> rows;
  if (route == ProxyRoute::projected) {
    if (kind != FieldKind::gaussian_proxy) throw DomainError("fdd_check: the projected route needs the proxy field");
    ProjectedProxySampler ps(sim.config(N, ts.back()), N, ts);
    rows = ps.run(seed, 0, replicas);
  } else {
    const AverageEnsemble e = simulate_averages(ts, {N}, replicas, seed, kind, sim);
    rows.assign(replicas, std::vector<double>(ts.size()));
    for (std::size_t k = 0; k < ts.size(); ++k)
      for (std::uint64_t r = 0; r < replicas; ++r) rows[r][k] = e.at(k, 0)[r];
  }
  return fdd_from_samples(N, ts, rows, kind);
}

struct ErgodicResult {
  double t = 0.0;
  std::uint64_t replicas = 0;
  std::vector<double> Ns;
  std::vector<double> rms;
  std::vector<double> rms_se;
  std::vector<double> oracle_rms;  // sqrt(var_avg), continuum
  std::vector<double> scheme_rms;  // sqrt of the discrete scheme's variance
  std::vector<double> A;           // rms / sqrt(t log_+(1/t) log N/N)
};

inline double ergodic_envelope(double N, double t) {
  return std::sqrt(t * log_plus(1.0 / t) * std::log(N) / N);
}

inline ErgodicResult ergodic_from_ensemble(const AverageEnsemble& e, std::size_t time, FieldKind kind,
                                           const SimulationSettings& sim, const QuadratureSpec& quad = {}) {
  ErgodicResult r;
  r.t = e.times[time];
  r.Ns = e.Ns;
  const SchemeMoments sm =
      scheme_moments(sim.config(*std::max_element(e.Ns.begin(), e.Ns.end()), r.t), {r.t}, e.Ns, kind);
  for (std::size_t s = 0; s < e.Ns.size(); ++s) {
    const auto& x = e.at(time, s);
    r.replicas = x.size();
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    const SampleStats st = describe(sq);
    const double rms = std::sqrt(st.mean);
    r.rms.push_back(rms);
    r.rms_se.push_back(st.stderr_mean / (2.0 * rms));
    r.oracle_rms.push_back(std::sqrt(var_avg({e.Ns[s], r.t, kind}, quad)));
    r.scheme_rms.push_back(std::sqrt(sm.var_avg[s]));
    r.A.push_back(rms / ergodic_envelope(e.Ns[s], r.t));
  }
  return r;
}

/// Root-mean-square of S_{N,t} along Ns.
inline ErgodicResult ergodic_check(double t, const std::vector<double>& Ns, std::uint64_t replicas,
                                   std::uint64_t seed, FieldKind kind, const SimulationSettings& sim = {}) {
  check_scales(Ns, "ergodic_check");
  if (replicas < 100) throw DomainError("ergodic_check: need at least 100 replicas");
  return ergodic_from_ensemble(simulate_averages({t}, Ns, replicas, seed, kind, sim), 0, kind, sim);
}

struct LocalResult {
  double N = 0.0;
  std::uint64_t replicas = 0;
  std::vector<double> ts;
  std::vector<double> mean_R;    // empirical E[R_{N,t}]
  std::vector<double> mean_R_se;
  std::vector<double> oracle_R;  // Var(G_{N,t})/(t log(1/t))
  std::vector<PaleyZygmund> pz;
  std::vector<double> sup_R;     // per replica, sup over ts
};

inline LocalResult local_from_ensemble(const AverageEnsemble& e, std::size_t scale, FieldKind kind,
                                       const QuadratureSpec& quad = {}) {
  LocalResult r;
  r.N = e.Ns[scale];
  r.ts = e.times;
  const std::size_t n = e.at(0, scale).size();
  r.replicas = n;
  r.sup_R.assign(n, 0.0);
  for (std::size_t k = 0; k < e.times.size(); ++k) {
    const double t = e.times[k];
    std::vector<double> R(n);
    for (std::size_t i = 0; i < n; ++i) {
      R[i] = roughness_value(e.at(k, scale)[i], t);
      r.sup_R[i] = std::max(r.sup_R[i], R[i]);
    }
    const SampleStats st = describe(R);
    r.mean_R.push_back(st.mean);
    r.mean_R_se.push_back(st.stderr_mean);
    r.oracle_R.push_back(var_avg({r.N, t, kind}, quad) / (t * std::log(1.0 / t)));
    r.pz.push_back(paley_zygmund(R));
  }
  return r;
}

/// Roughness R_{N,t} = S^2/(t log(1/t)) over small times.
inline LocalResult local_check(std::vector<double> ts, double N, std::uint64_t replicas, std::uint64_t seed,
                               FieldKind kind, const SimulationSettings& sim = {}) {
  if (ts.empty()) throw DomainError("local_check: ts is empty");
  for (double t : ts)
    if (!(t > 0.0) || !(t <= 1.0 / std::numbers::e)) throw DomainError("local_check: t must lie in (0, 1/e]");
  if (!(N >= std::numbers::e)) throw DomainError("local_check: N must be >= e");
  if (replicas < 2) throw DomainError("local_check: need at least two replicas");
  return local_from_ensemble(simulate_averages(std::move(ts), {N}, replicas, seed, kind, sim), 0, kind);
}

}  // namespace pamlab
