#pragma once

// Monte Carlo solver for the renormalized field U = u/p_t and the Gaussian
// proxy V.
//
// Both fields are marched on a time grid t_0 < ... < t_M by
//   F_{n+1}(x) = sum_y h_n p_{sigma_n}(y - rho_n x) [F_n(y) + noise_n(y)],
// rho_n = t_n/t_{n+1}, sigma_n = t_n (t_{n+1} - t_n)/t_{n+1}, where
// noise_n(y) = a_n xi U_n(y) for U and a_n xi for V, a_n^2 = w_n/h_n.  For U
// this is exactly the semigroup step u_{n+1} = p_dt * [u_n (1 + a xi)] divided
// through by p_{t_{n+1}}, so u = U p_t; working with U keeps the values O(1)
// where p_t itself underflows.  For V the bridge kernels compose exactly
// (Chapman-Kolmogorov), so the same recursion yields V(t,.) at every grid
// time.
//
// Only the deviation F - 1 is stored.  Each time layer lives on a window of
// its lattice (a backward cone of the output region, padded by
// 2 L sqrt(s(t-s)/t)/sqrt(t_max) plus the kernel reach); kernel taps outside
// the window are dropped.  Replicas are advanced in batches of kLanes.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pamlab/errors.hpp"
#include "pamlab/fastmath.hpp"
#include "pamlab/kernels.hpp"
#include "pamlab/noise.hpp"
#include "pamlab/oracle.hpp"
#include "pamlab/time_grid.hpp"

namespace pamlab {

enum class Scheme { semigroup_euler };
enum class FirstStep { exact_kernel };

struct SolverConfig {
  GridSpec grid;
  double truncation_margin = 6.0;  // L
  Scheme scheme = Scheme::semigroup_euler;
  FirstStep first_step = FirstStep::exact_kernel;
  TimeGridKind time_grid = TimeGridKind::graded;
  double warmup_start = 1e-10;
  double warmup_ratio = 0.05;

  /// Checks the invariants for output on [0, N].
  void validate(double N = 0.0) const {
    grid.validate();
    if (!(truncation_margin >= 6.0 * std::sqrt(grid.t_max) * (1.0 - 1e-12)))
      throw ConfigError("solver.truncation_margin", "must be >= 6 sqrt(t_max)");
    if (grid.x_min > -truncation_margin * (1.0 - 1e-12) || grid.x_max < (N + truncation_margin) * (1.0 - 1e-12))
      throw ConfigError("grid", "must cover [-L, N + L]");
    if (time_grid == TimeGridKind::graded) {
      if (!(warmup_start > 0.0)) throw ConfigError("solver.warmup_start", "must be positive");
      if (!(warmup_ratio > 0.0) || warmup_ratio > 1.0) throw ConfigError("solver.warmup_ratio", "must lie in (0, 1]");
    }
  }

  /// Default configuration for output on [0, N] up to time t_max.
  static SolverConfig for_window(double N, double t_max, double dt = 1e-3, double dx = 1e-2) {
    SolverConfig c;
    c.truncation_margin = 6.0 * std::sqrt(t_max);
    c.grid = {t_max, dt, -c.truncation_margin, N + c.truncation_margin, dx};
    return c;
  }
};

enum class SliceKind { u, U, V };

struct FieldSlice {
  double t = 0.0;
  std::vector<double> xs;
  std::vector<double> values;
  SliceKind kind = SliceKind::U;
};

struct AveragePath {
  double N = 0.0;
  std::uint64_t replica_id = 0;
  std::vector<double> times;
  std::vector<double> values;
};

/// What to record at each output time.
struct Observation {
  std::vector<double> times;   // ascending output times
  std::vector<double> scales;  // N values for spatial averages over [0, N]
  std::vector<double> probes;  // lattice points whose values are kept
  bool keep_slices = false;    // keep the field on [slice_lo, slice_hi]
  double slice_lo = 0.0, slice_hi = 0.0;
};

struct ReplicaRecord {
  std::uint64_t replica = 0;
  std::vector<double> averages;  // [time][scale]
  std::vector<double> probes;    // [time][probe], values of U or V
  std::vector<FieldSlice> slices;
  std::uint64_t negatives = 0;   // cells with U < 0 over the output regions

  double average(std::size_t time, std::size_t scale, std::size_t n_scales) const {
    return averages[time * n_scales + scale];
  }
};

struct Layer {
  double t;
  double h;
  int level;
  std::int64_t jlo, jhi;  // window in lattice coordinates (x = j h)
  double weight;          // noise weight w_n (0 for the last layer)
  std::size_t cells() const { return static_cast<std::size_t>(jhi - jlo + 1); }
};

struct Plan {
  Observation obs;
  TimeGrid grid;
  std::vector<Layer> layers;
  std::vector<std::size_t> record_layer;  // per output time
  double dx = 0.0;
  double out_lo = 0.0, out_hi = 0.0;

  std::size_t total_cells() const {
    std::size_t s = 0;
    for (const auto& l : layers) s += l.cells();
    return s;
  }
};

inline constexpr double kKernelReach = 8.0;  // kernel truncation in standard deviations

namespace detail {

inline bool on_lattice(double x, double h) { return std::abs(x / h - std::round(x / h)) < 1e-7; }

// Output region [lo, hi] shared by all output times.
inline std::pair<double, double> output_region(const Observation& obs) {
  double lo = INFINITY, hi = -INFINITY;
  for (double N : obs.scales) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, N);
  }
  for (double p : obs.probes) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (obs.keep_slices) {
    lo = std::min(lo, obs.slice_lo);
    hi = std::max(hi, obs.slice_hi);
  }
  if (!(lo <= hi)) throw DomainError("observation: nothing to record");
  return {lo, hi};
}

// Cone half-width factor: kappa sqrt(s (ta - s)/ta) with kappa = 2 L/sqrt(t_max),
// i.e. the margin L at the midpoint of the longest horizon.
inline double cone_kappa(const SolverConfig& cfg, double t_last) {
  return 2.0 * cfg.truncation_margin / std::sqrt(t_last);
}

}  // namespace detail

/// Builds the time grid and per-layer windows for an observation.
/// `spread` is the noise-to-output kernel variance multiplier (1 for the
/// field, 2 for lag recursions); `lag_window` switches the output region to
/// [0, hi - lo] (lags).
inline Plan make_plan(const SolverConfig& cfg, const Observation& obs_in, double spread = 1.0, bool lag_window = false) {
  Observation obs = obs_in;
  if (obs.times.empty()) throw DomainError("observation: no output times");
  std::sort(obs.times.begin(), obs.times.end());
  obs.times.erase(std::unique(obs.times.begin(), obs.times.end()), obs.times.end());
  const double dx = cfg.grid.dx;
  for (double N : obs.scales) {
    if (!(N >= dx) || !detail::on_lattice(N, dx)) throw DomainError("observation: N must be a positive multiple of dx");
  }
  for (double p : obs.probes)
    if (!detail::on_lattice(p, dx)) throw DomainError("observation: probe points must be multiples of dx");
  if (obs.times.back() > cfg.grid.t_max * (1.0 + 1e-12)) throw DomainError("observation: time beyond grid.t_max");

  Plan plan;
  plan.obs = obs;
  plan.dx = dx;
  auto [lo, hi] = detail::output_region(obs);
  if (lag_window) {
    hi = hi - lo;
    lo = 0.0;
  }
  plan.out_lo = lo;
  plan.out_hi = hi;
  plan.grid = make_time_grid(cfg.grid.dt, dx, obs.times, cfg.time_grid, cfg.warmup_start, cfg.warmup_ratio);
  const TimeGrid& g = plan.grid;
  for (double t : obs.times) plan.record_layer.push_back(g.index_of(t));

  const double kappa = detail::cone_kappa(cfg, obs.times.back()) * std::sqrt(spread);
  const std::size_t M = g.t.size() - 1;
  plan.layers.resize(M + 1);
  for (std::size_t n = 0; n <= M; ++n) {
    Layer& L = plan.layers[n];
    L.t = g.t[n];
    L.level = g.level[n];
    L.h = std::ldexp(dx, -L.level);
    L.weight = n < M ? g.weight[n] : 0.0;
    const double pad = n < M ? kKernelReach * std::sqrt(spread * g.step_variance(n)) + 2.0 * L.h : 0.0;
    double a = INFINITY, b = -INFINITY;
    for (double ta : obs.times) {
      if (ta < L.t * (1.0 - 1e-12)) continue;
      const double c = L.t / ta;
      const double m = kappa * std::sqrt(std::max(0.0, L.t * (ta - L.t) / ta)) + pad;
      a = std::min(a, c * lo - m);
      b = std::max(b, c * hi + m);
    }
    L.jlo = lag_window ? 0 : static_cast<std::int64_t>(std::floor(a / L.h - 1e-9));
    L.jhi = static_cast<std::int64_t>(std::ceil(b / L.h + 1e-9));
  }
  return plan;
}

namespace detail {

// Gaussian tap weights h p_var(j h - center) for source indices
// j = first + d, d in [0, 2K+2).  Written as C G[d] F^d with a per-step
// table G[d] = exp(-beta (d - K)^2), beta = h^2/(2 var); the lattice sum of the
// full kernel is 1 up to exp(-2 pi^2 var/h^2) < 1e-30 (Poisson summation), so
// no renormalization is applied.
struct TapWeights {
  std::vector<double> table, w;
  std::int64_t first = 0;
  int K = 0;
  double beta = 0.0, prefactor = 0.0;

  void prepare(double h, double var, int half_width) {
    K = half_width;
    beta = h * h / (2.0 * var);
    prefactor = h / std::sqrt(2.0 * std::numbers::pi * var);
    const int taps = 2 * K + 2;
    table.resize(static_cast<std::size_t>(taps));
    w.resize(static_cast<std::size_t>(taps));
    for (int d = 0; d < taps; ++d) table[static_cast<std::size_t>(d)] = std::exp(-beta * double(d - K) * double(d - K));
  }

  void compute(double center, double h) {
    const double u = center / h;
    const double jc = std::floor(u);
    const double delta = jc - u;  // in (-1, 0]
    // exp(-beta (d - K + delta)^2) = G[d] exp(-beta delta^2) F^{d-K}, F = exp(-2 beta delta)
    const double F = fast::exp(-2.0 * beta * delta);
    const double start = prefactor * fast::exp(-beta * delta * delta + 2.0 * beta * delta * K);
    const int taps = 2 * K + 2;
    // eight interleaved power chains
    double pw[8];
    pw[0] = start;
    for (int k = 1; k < 8; ++k) pw[k] = pw[k - 1] * F;
    const double F8 = pw[7] * F / start;
    double* wp = w.data();
    const double* g = table.data();
    int d = 0;
    for (; d + 8 <= taps; d += 8) {
      for (int k = 0; k < 8; ++k) {
        wp[d + k] = g[d + k] * pw[k];
        pw[k] *= F8;
      }
    }
    for (int k = 0; d < taps; ++d, ++k) wp[d] = g[d] * pw[k];
    first = static_cast<std::int64_t>(jc) - K;
  }
};

inline int kernel_half_width(double var, double h) {
  return static_cast<int>(std::ceil(kKernelReach * std::sqrt(var) / h));
}

}  // namespace detail

inline constexpr int kLanes = 16;

namespace detail {

template <class F, std::size_t... I>
auto lanes_impl(F&& f, std::index_sequence<I...>) {
  return std::array<NoiseSlab, sizeof...(I)>{f(static_cast<int>(I))...};
}
template <class F>
std::array<NoiseSlab, kLanes> lanes(F&& f) {
  return lanes_impl(f, std::make_index_sequence<kLanes>{});
}

}  // namespace detail

/// Advances kLanes replicas through a plan.  Lanes hold independent
/// replicas; every lane sees the same instruction stream, so a replica's
/// result does not depend on which batch it runs in.
class BatchEngine {
 public:
  BatchEngine(const Plan& plan, FieldKind kind) : plan_(plan), kind_(kind) {}

  std::array<ReplicaRecord, kLanes> run(const std::array<NoiseSlab, kLanes>& noise) {
    const auto& layers = plan_.layers;
    const auto& obs = plan_.obs;
    const std::size_t nt = obs.times.size(), ns = obs.scales.size(), np = obs.probes.size();
    std::array<ReplicaRecord, kLanes> out;
    for (int r = 0; r < kLanes; ++r) {
      out[r].replica = noise[r].replica_id();
      out[r].averages.assign(nt * ns, 0.0);
      out[r].probes.assign(nt * np, 0.0);
    }
    cur_.assign(layers[0].cells() * kLanes, 0.0);
    std::size_t next_record = 0;
    const std::size_t M = layers.size() - 1;
    for (std::size_t n = 0; n <= M; ++n) {
      if (next_record < nt && plan_.record_layer[next_record] == n) {
        record(n, next_record, noise, out);
        ++next_record;
      }
      if (n == M) break;
      step(n, noise);
    }
    return out;
  }

 private:
  void step(std::size_t n, const std::array<NoiseSlab, kLanes>& noise) {
    const Layer& S = plan_.layers[n];
    const Layer& T = plan_.layers[n + 1];
    const std::size_t sc = S.cells();
    // source values F_n + noise, lane-interleaved
    src_.resize(sc * kLanes);
    xi_.resize(sc);
    const double amp = std::sqrt(S.weight / S.h);
    for (int r = 0; r < kLanes; ++r) {
      noise[r].fill(static_cast<std::int64_t>(n), S.jlo, sc, xi_.data());
      double* dst = src_.data() + r;
      const double* d = cur_.data() + r;
      if (kind_ == FieldKind::pam) {
        for (std::size_t i = 0; i < sc; ++i) dst[i * kLanes] = std::fma(amp * xi_[i], 1.0 + d[i * kLanes], d[i * kLanes]);
      } else {
        for (std::size_t i = 0; i < sc; ++i) dst[i * kLanes] = std::fma(amp, xi_[i], d[i * kLanes]);
      }
    }
    const double rho = S.t / T.t;
    const double var = S.t * (T.t - S.t) / T.t;
    taps_.prepare(S.h, var, detail::kernel_half_width(var, S.h));
    const std::size_t tc = T.cells();
    nxt_.assign(tc * kLanes, 0.0);
    for (std::size_t i = 0; i < tc; ++i) {
      const double x = static_cast<double>(T.jlo + static_cast<std::int64_t>(i)) * T.h;
      taps_.compute(rho * x, S.h);
      const std::int64_t j0 = taps_.first, j1 = taps_.first + static_cast<std::int64_t>(taps_.w.size()) - 1;
      const std::int64_t a = std::max(j0, S.jlo), b = std::min(j1, S.jhi);
      // two accumulator sets to shorten the FMA dependency chain
      alignas(64) double acc0[kLanes] = {}, acc1[kLanes] = {};
      const double* wt = taps_.w.data() - j0;
      const double* base = src_.data() - S.jlo * static_cast<std::int64_t>(kLanes);
      std::int64_t j = a;
      for (; j + 1 <= b; j += 2) {
        const double w0 = wt[j], w1 = wt[j + 1];
        const double* s0 = base + j * kLanes;
        const double* s1 = s0 + kLanes;
#pragma GCC unroll 16
        for (int r = 0; r < kLanes; ++r) {
          acc0[r] = std::fma(w0, s0[r], acc0[r]);
          acc1[r] = std::fma(w1, s1[r], acc1[r]);
        }
      }
      if (j <= b) {
        const double w0 = wt[j];
        const double* s0 = base + j * kLanes;
        for (int r = 0; r < kLanes; ++r) acc0[r] = std::fma(w0, s0[r], acc0[r]);
      }
      double* o = nxt_.data() + i * kLanes;
      for (int r = 0; r < kLanes; ++r) o[r] = acc0[r] + acc1[r];
    }
    cur_.swap(nxt_);
  }

  void record(std::size_t n, std::size_t k, const std::array<NoiseSlab, kLanes>& noise,
              std::array<ReplicaRecord, kLanes>& out) {
    const Layer& L = plan_.layers[n];
    const auto& obs = plan_.obs;
    const std::size_t ns = obs.scales.size(), np = obs.probes.size();
    auto at = [&](std::int64_t j, int r) { return cur_[static_cast<std::size_t>(j - L.jlo) * kLanes + r]; };
    auto idx = [&](double x) { return static_cast<std::int64_t>(std::llround(x / L.h)); };
    // non-finite values anywhere in the window are fatal
    for (std::int64_t j = L.jlo; j <= L.jhi; ++j)
      for (int r = 0; r < kLanes; ++r)
        if (!std::isfinite(at(j, r))) {
          std::ostringstream os;
          os.precision(17);
          os << "solver: non-finite value at t=" << L.t << ", x=" << static_cast<double>(j) * L.h
             << ", replica=" << noise[r].replica_id();
          throw NumericalError(os.str());
        }
    const std::int64_t rlo = idx(plan_.out_lo), rhi = idx(plan_.out_hi);
    if (kind_ == FieldKind::pam)
      for (std::int64_t j = rlo; j <= rhi; ++j)
        for (int r = 0; r < kLanes; ++r)
          if (1.0 + at(j, r) < 0.0) ++out[r].negatives;
    for (std::size_t s = 0; s < ns; ++s) {
      const std::int64_t m = idx(obs.scales[s]);
      alignas(64) double acc[kLanes] = {};
      for (std::int64_t j = 1; j < m; ++j)
        for (int r = 0; r < kLanes; ++r) acc[r] += at(j, r);
      for (int r = 0; r < kLanes; ++r) {
        const double trap = (acc[r] + 0.5 * (at(0, r) + at(m, r))) * L.h;
        out[r].averages[k * ns + s] = trap / obs.scales[s];
      }
    }
    for (std::size_t p = 0; p < np; ++p)
      for (int r = 0; r < kLanes; ++r) out[r].probes[k * np + p] = 1.0 + at(idx(obs.probes[p]), r);
    if (obs.keep_slices) {
      const std::int64_t a = idx(obs.slice_lo), b = idx(obs.slice_hi);
      for (int r = 0; r < kLanes; ++r) {
        FieldSlice sl;
        sl.t = L.t;
        sl.kind = kind_ == FieldKind::pam ? SliceKind::U : SliceKind::V;
        for (std::int64_t j = a; j <= b; ++j) {
          sl.xs.push_back(static_cast<double>(j) * L.h);
          sl.values.push_back(1.0 + at(j, r));
        }
        out[r].slices.push_back(std::move(sl));
      }
    }
  }

  const Plan& plan_;
  FieldKind kind_;
  std::vector<double> cur_, nxt_, src_, xi_;
  detail::TapWeights taps_;
};

/// Worker count from PAMLAB_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* s = std::getenv("PAMLAB_WORKERS")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

/// Runs replicas [first, first + count) and returns their records in
/// replica order.  Output is independent of the worker count.
inline std::vector<ReplicaRecord> run_ensemble(const SolverConfig& cfg, const Plan& plan, FieldKind kind,
                                               std::uint64_t seed, std::uint64_t first, std::uint64_t count,
                                               unsigned workers = 0) {
  if (workers == 0) workers = default_workers();
  std::vector<ReplicaRecord> out(count);
  const std::uint64_t batches = (count + kLanes - 1) / kLanes;
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      BatchEngine engine(plan, kind);
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= batches) break;
        // pad the last batch by repeating its final replica
        auto noise = detail::lanes([&](int r) {
          const std::uint64_t id = std::min(b * kLanes + static_cast<std::uint64_t>(r), count - 1);
          return NoiseSlab(cfg.grid, seed, first + id);
        });
        auto recs = engine.run(noise);
        for (int r = 0; r < kLanes; ++r) {
          const std::uint64_t id = b * kLanes + static_cast<std::uint64_t>(r);
          if (id < count) out[id] = std::move(recs[r]);
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next.store(batches);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace detail {

inline std::array<NoiseSlab, kLanes> replicate(const NoiseSlab& n) {
  return lanes([&](int) { return n; });
}

inline FieldSlice single_slice(const SolverConfig& cfg, const NoiseSlab& noise, FieldKind kind, double t,
                               double lo, double hi) {
  if (noise.grid().dx != cfg.grid.dx || noise.grid().dt != cfg.grid.dt || noise.grid().t_max != cfg.grid.t_max ||
      noise.grid().x_min != cfg.grid.x_min || noise.grid().x_max != cfg.grid.x_max)
    throw DomainError("solver: noise grid differs from solver grid");
  Observation obs;
  obs.times = {t};
  obs.keep_slices = true;
  obs.slice_lo = lo;
  obs.slice_hi = hi;
  Plan plan = make_plan(cfg, obs);
  BatchEngine engine(plan, kind);
  auto rec = engine.run(replicate(noise));
  return rec[0].slices.front();
}

}  // namespace detail

/// u(t, .) on the grid's lattice over [x_min, x_max] at each requested time
/// (default: t_max).  Values are U p_t, so they underflow to 0 where p_t does.
inline std::vector<FieldSlice> solve_pam(const SolverConfig& cfg, const NoiseSlab& noise,
                                         std::vector<double> times = {}) {
  cfg.validate();
  if (times.empty()) times = {cfg.grid.t_max};
  const double dx = cfg.grid.dx;
  const double lo = std::ceil(cfg.grid.x_min / dx - 1e-9) * dx, hi = std::floor(cfg.grid.x_max / dx + 1e-9) * dx;
  Observation obs;
  obs.times = times;
  obs.keep_slices = true;
  obs.slice_lo = lo;
  obs.slice_hi = hi;
  Plan plan = make_plan(cfg, obs);
  BatchEngine engine(plan, FieldKind::pam);
  auto rec = engine.run(detail::replicate(noise));
  std::vector<FieldSlice> out = std::move(rec[0].slices);
  for (auto& s : out) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) s.values[i] *= heat_kernel(s.t, s.xs[i]);
    s.kind = SliceKind::u;
  }
  return out;
}

/// U(t, .) directly (no round trip through u).
inline FieldSlice solve_renormalized(const SolverConfig& cfg, const NoiseSlab& noise, double t, double lo, double hi) {
  cfg.validate();
  return detail::single_slice(cfg, noise, FieldKind::pam, t, lo, hi);
}

/// V(t, xs) for lattice points xs.
inline FieldSlice sample_gaussian_proxy(const SolverConfig& cfg, const NoiseSlab& noise, double t,
                                        const std::vector<double>& xs) {
  cfg.validate();
  if (xs.empty()) throw DomainError("sample_gaussian_proxy: no points");
  if (!(t > 0.0) || t > cfg.grid.t_max * (1 + 1e-12)) throw DomainError("sample_gaussian_proxy: t outside (0, t_max]");
  for (double x : xs)
    if (x < cfg.grid.x_min || x > cfg.grid.x_max) throw DomainError("sample_gaussian_proxy: point outside grid");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  FieldSlice full = detail::single_slice(cfg, noise, FieldKind::gaussian_proxy, t, *mn, *mx);
  FieldSlice out;
  out.t = t;
  out.kind = SliceKind::V;
  const double h = full.xs.size() > 1 ? full.xs[1] - full.xs[0] : cfg.grid.dx;
  for (double x : xs) {
    if (!detail::on_lattice(x, cfg.grid.dx)) throw DomainError("sample_gaussian_proxy: points must be multiples of dx");
    const auto i = static_cast<std::size_t>(std::llround((x - full.xs.front()) / h));
    out.xs.push_back(x);
    out.values.push_back(full.values[i]);
  }
  return out;
}

/// U = u/p_t, formed in log space so that moderately small u survive.
inline FieldSlice renormalize(const FieldSlice& s) {
  if (s.kind != SliceKind::u) throw DomainError("renormalize: slice must hold u");
  if (!(s.t > 0.0)) throw DomainError("renormalize: t must be positive (U(0,.) = 1 by convention)");
  FieldSlice out = s;
  out.kind = SliceKind::U;
  for (std::size_t i = 0; i < s.xs.size(); ++i) {
    const double lp = log_heat_kernel(s.t, s.xs[i]);
    const double u = s.values[i];
    if (u == 0.0) {
      if (lp < -700.0) throw DomainError("renormalize: p_t(x) underflows at x=" + std::to_string(s.xs[i]));
      out.values[i] = 0.0;
    } else {
      out.values[i] = std::copysign(std::exp(std::log(std::abs(u)) - lp), u);
    }
  }
  return out;
}

/// Trapezoid approximation of (1/N) int_0^N [U(t,x) - 1] dx.
inline double spatial_average(const FieldSlice& s, double N) {
  if (s.kind == SliceKind::u) throw DomainError("spatial_average: slice must hold U or V");
  if (!(N > 0.0)) throw DomainError("spatial_average: N must be positive");
  if (s.xs.size() < 2) throw DomainError("spatial_average: slice too short");
  const double h = s.xs[1] - s.xs[0];
  if (s.xs.front() > h * 1e-7 || s.xs.back() < N - h * 1e-7) throw DomainError("spatial_average: [0, N] not covered");
  double acc = 0.0;
  double prev_x = 0.0, prev_v = 0.0;
  bool started = false;
  for (std::size_t i = 0; i < s.xs.size(); ++i) {
    const double x = s.xs[i];
    if (x < -h * 1e-7) continue;
    if (x > N + h * 1e-7) break;
    const double v = s.values[i] - 1.0;
    if (started) acc += 0.5 * (v + prev_v) * (x - prev_x);
    else if (x > h * 1e-7) throw DomainError("spatial_average: 0 is not a grid point");
    prev_x = x;
    prev_v = v;
    started = true;
  }
  if (std::abs(prev_x - N) > h * 1e-7) throw DomainError("spatial_average: N is not a grid point");
  return acc / N;
}

/// AveragePath records from an ensemble, one per replica, for scale index s.
inline std::vector<AveragePath> average_paths(const Plan& plan, const std::vector<ReplicaRecord>& recs, std::size_t s) {
  std::vector<AveragePath> out;
  const std::size_t ns = plan.obs.scales.size();
  for (const auto& r : recs) {
    AveragePath p;
    p.N = plan.obs.scales.at(s);
    p.replica_id = r.replica;
    p.times = plan.obs.times;
    for (std::size_t k = 0; k < p.times.size(); ++k) p.values.push_back(r.averages[k * ns + s]);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace pamlab
