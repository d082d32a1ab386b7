#pragma once

// Exact second moments of the discrete schemes in solver.hpp.
//
// By stationarity the scheme covariance C_n(l) = Cov[F_n(x), F_n(x + l)]
// depends only on the lag, and one step maps it to
//   C_{n+1}(l) = sum_m h_n p_{2 sigma_n}(m h_n - rho_n l) C_n(m)
//                + w_n c_n p_{2 sigma_n}(rho_n l),
// with c_n = 1 + C_n(0) for U and c_n = 1 for V (lattice sums of Gaussian
// products are exact here up to exp(-4 pi^2)).  Monte Carlo estimates from
// the solver converge to these values, not to the continuum oracle; the
// difference between the two is the scheme bias.

#include <cmath>
#include <vector>

#include "pamlab/oracle.hpp"
#include "pamlab/solver.hpp"

namespace pamlab {

struct SchemeMoments {
  std::vector<double> times;
  std::vector<double> scales;
  std::vector<double> lags;
  std::vector<double> var_point;  // C(0) per time: Var U(t,x) or Var V(t,x)
  std::vector<double> var_avg;    // [time][scale]: Var of the trapezoid average over [0, N]
  std::vector<double> cov_lag;    // [time][lag]

  /// E[u(t,0)^2] = p_t(0)^2 (1 + C(0)) for the PAM scheme.
  double second_moment_u0(std::size_t k) const {
    const double p = heat_kernel(times[k], 0.0);
    return p * p * (1.0 + var_point[k]);
  }
};

inline SchemeMoments scheme_moments(const SolverConfig& cfg, const std::vector<double>& times,
                                    const std::vector<double>& scales, FieldKind kind,
                                    const std::vector<double>& lags = {}) {
  Observation obs;
  obs.times = times;
  obs.scales = scales;
  obs.probes = lags;
  obs.probes.push_back(0.0);
  for (double l : lags)
    if (l < 0.0) throw DomainError("scheme_moments: lags must be nonnegative");
  const Plan plan = make_plan(cfg, obs, 2.0, true);
  SchemeMoments out;
  out.times = plan.obs.times;
  out.scales = scales;
  out.lags = lags;
  const std::size_t M = plan.layers.size() - 1;
  std::vector<double> C(plan.layers[0].cells(), 0.0), next;
  detail::TapWeights taps;
  std::size_t rec = 0;
  for (std::size_t n = 0;; ++n) {
    const Layer& L = plan.layers[n];
    if (rec < plan.record_layer.size() && plan.record_layer[rec] == n) {
      auto at = [&](std::int64_t j) { return C[static_cast<std::size_t>(j)]; };
      out.var_point.push_back(at(0));
      for (double N : scales) {
        const auto m = static_cast<std::int64_t>(std::llround(N / L.h));
        const double h2 = L.h * L.h;
        double s = h2 * (static_cast<double>(m) - 0.5) * at(0) + 0.5 * h2 * at(m);
        for (std::int64_t k = 1; k < m; ++k) s += 2.0 * h2 * static_cast<double>(m - k) * at(k);
        out.var_avg.push_back(s / (N * N));
      }
      for (double l : lags) out.cov_lag.push_back(at(std::llround(l / L.h)));
      ++rec;
    }
    if (n == M) break;
    const Layer& T = plan.layers[n + 1];
    const double rho = L.t / T.t;
    const double var = 2.0 * L.t * (T.t - L.t) / T.t;
    const double c = kind == FieldKind::pam ? 1.0 + C[0] : 1.0;
    taps.prepare(L.h, var, detail::kernel_half_width(var, L.h));
    next.assign(T.cells(), 0.0);
    for (std::int64_t i = 0; i <= T.jhi; ++i) {
      const double l = static_cast<double>(i) * T.h;
      taps.compute(rho * l, L.h);
      double acc = 0.0;
      for (std::size_t d = 0; d < taps.w.size(); ++d) {
        const std::int64_t j = std::abs(taps.first + static_cast<std::int64_t>(d));
        if (j <= L.jhi) acc += taps.w[d] * C[static_cast<std::size_t>(j)];
      }
      next[static_cast<std::size_t>(i)] = acc + L.weight * c * heat_kernel(var, rho * l);
    }
    C.swap(next);
  }
  return out;
}

}  // namespace pamlab
