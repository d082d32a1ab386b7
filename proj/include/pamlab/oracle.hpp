#pragma once

// Quadrature oracles for the second-order structure of u, U and the
// Gaussian proxy V, and for their spatial averages.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pamlab/errors.hpp"
#include "pamlab/gaussian.hpp"
#include "pamlab/kernels.hpp"
#include "pamlab/quadrature.hpp"
#include "pamlab/specfun.hpp"

namespace pamlab {

enum class FieldKind { pam, gaussian_proxy };

inline const char* to_string(FieldKind k) { return k == FieldKind::pam ? "pam" : "gaussian_proxy"; }

struct CovQuery {
  double t1, t2, x, y;
  void validate() const {
    if (!(t1 > 0.0) || !(t2 > 0.0) || !std::isfinite(t1) || !std::isfinite(t2))
      throw DomainError("CovQuery: times must be positive");
    if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("CovQuery: positions must be finite");
  }
};

struct AvgVarianceQuery {
  double N;
  double t;
  FieldKind field_kind = FieldKind::pam;
  void validate() const {
    if (!(N >= std::numbers::e) || !std::isfinite(N)) throw DomainError("var_avg: N must be >= e");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("var_avg: t must be positive");
  }
};

/// E|u(s,z)|^2 = p_s(z)^2 (1 + theta(s)).
inline double second_moment_u(double s, double z) {
  if (!(s > 0.0)) throw DomainError("second_moment_u: s must be positive");
  const double p = heat_kernel(s, z);
  return p * p * (1.0 + theta(s));
}

namespace detail {

inline double moment_factor(FieldKind kind, double s) { return kind == FieldKind::pam ? 1.0 + theta(s) : 1.0; }

// int_0^tau f(s) ds for f with s^{-1/2} growth at 0 and, possibly,
// (tau - s)^{-1/2} growth at tau.
template <class F>
QuadResult integrate_two_sided(F&& f, double tau, const QuadratureSpec& spec) {
  const QuadratureSpec half = spec.scaled(0.5);
  const double m = 0.5 * tau;
  QuadResult lo = quad(f, 0.0, m, half.with_substitution(EndpointSubstitution::inverse_time));
  // s = tau - r^2
  QuadResult hi = quad([&](double r) { return 2.0 * r * f(tau - r * r); }, 0.0, std::sqrt(tau - m),
                       half.with_substitution(EndpointSubstitution::none));
  return {lo.value + hi.value, lo.error + hi.error, lo.intervals + hi.intervals};
}

}  // namespace detail

/// Cov[U(t1,x), U(t2,y)] (pam) or Cov[V(t1,x), V(t2,y)] (gaussian_proxy):
/// int_0^{t1^t2} p_{s[(t1-s)/t1 + (t2-s)/t2]}(s[x/t1 - y/t2]) (1 + theta(s)) ds.
inline QuadResult cov_field(const CovQuery& q, FieldKind kind, const QuadratureSpec& spec = {}) {
  q.validate();
  spec.validate();
  const double tau = std::min(q.t1, q.t2);
  auto f = [&](double s) {
    const double var = s * ((q.t1 - s) / q.t1 + (q.t2 - s) / q.t2);
    if (!(var > 0.0)) return 0.0;
    return heat_kernel(var, s * (q.x / q.t1 - q.y / q.t2)) * detail::moment_factor(kind, s);
  };
  return detail::integrate_two_sided(f, tau, spec);
}

inline double cov_U(const CovQuery& q, const QuadratureSpec& spec = {}) {
  return cov_field(q, FieldKind::pam, spec).value;
}

/// (1/N^2) int int_{[0,N]^2} Cov[F(t1,x), F(t2,y)] dx dy for F = U or V.
/// The spatial double integral is done in closed form, leaving one time
/// integral; the integrand behaves like 1/s for t^2/N^2 << s, so the
/// inverse-time substitution is always applied.
inline QuadResult cov_avg_quad(double N, double t1, double t2, FieldKind kind, const QuadratureSpec& spec = {}) {
  if (!(N >= std::numbers::e) || !std::isfinite(N)) throw DomainError("cov_avg: N must be >= e");
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("cov_avg: times must be positive");
  spec.validate();
  const double tau = std::min(t1, t2);
  // Work with the O(1) quantity N/log N times the covariance.
  const double scale = 1.0 / (N * std::log(N));
  auto f = [&](double s) {
    const double var = s * ((t1 - s) / t1 + (t2 - s) / t2);
    if (!(var > 0.0)) return 0.0;
    return box_heat_integral(var, s / t1, s / t2, N) * scale * detail::moment_factor(kind, s);
  };
  QuadResult r = quad(f, 0.0, tau, spec.with_substitution(EndpointSubstitution::inverse_time));
  const double back = std::log(N) / N;
  return {r.value * back, r.error * back, r.intervals};
}

/// Cov[S_{N,t1}, S_{N,t2}] (unscaled).
inline double cov_avg(double N, double t1, double t2, const QuadratureSpec& spec = {},
                      FieldKind kind = FieldKind::pam) {
  return cov_avg_quad(N, t1, t2, kind, spec).value;
}

/// Var S_{N,t} (pam) or Var G_{N,t} (gaussian_proxy).
inline double var_avg(const AvgVarianceQuery& q, const QuadratureSpec& spec = {}) {
  q.validate();
  return cov_avg_quad(q.N, q.t, q.t, q.field_kind, spec).value;
}

/// Var G_{N,t} = (log N/(pi N)) int phi(z) G_{N,t}(z) dz, with G by
/// quadrature.  Independent route to var_avg(gaussian_proxy).
inline double var_avg_proxy_phi_g(double N, double t, const QuadratureSpec& spec = {}) {
  AvgVarianceQuery{N, t, FieldKind::gaussian_proxy}.validate();
  const double logN = std::log(N);
  auto f = [&](double z) {
    if (z == 0.0) return 0.0;
    return phi(z) * g_fn({N, t, z}, spec);
  };
  // Oscillatory body in chunks of 16 periods up to well past the decay scale
  // N/sqrt(t), then a compactified tail where the integrand is O(z^{-4}).
  const double chunk = 32.0 * std::numbers::pi;
  const double zc = chunk * std::ceil(40.0 * N / std::sqrt(t) / chunk);
  const int chunks = static_cast<int>(std::lround(zc / chunk));
  const QuadratureSpec piece = spec.scaled(1.0 / chunks);
  double body = 0.0;
  for (int k = 0; k < chunks; ++k) body += quad(f, k * chunk, (k + 1) * chunk, piece).value;
  body += quad(f, zc, INFINITY, spec).value;
  return logN / (std::numbers::pi * N) * 2.0 * body;
}

/// Var S_{N,t} via stationarity: (2/N^2) int_0^N (N - h) C_t(h) dh with
/// C_t(h) = Cov[U(t,0), U(t,h)] by nested quadrature.  Slow; used to check
/// the closed-form route.
inline double var_avg_lag(const AvgVarianceQuery& q, const QuadratureSpec& spec = {}) {
  q.validate();
  const QuadratureSpec inner = spec.scaled(0.1);
  auto f = [&](double h) { return (q.N - h) * cov_field({q.t, q.t, 0.0, h}, q.field_kind, inner).value; };
  // C_t(h) has a logarithmic peak at h = 0 of width ~ sqrt(t).
  const double split = std::min(q.N, 10.0 * std::sqrt(q.t));
  double v = quad(f, 0.0, split, spec).value;
  if (split < q.N) v += quad(f, split, q.N, spec).value;
  return 2.0 * v / (q.N * q.N);
}

/// N log N-free ratio Var * N / (2 t log N).
inline double var_ratio(const AvgVarianceQuery& q, const QuadratureSpec& spec = {}) {
  return var_avg(q, spec) * q.N / (2.0 * q.t * std::log(q.N));
}

/// K = (6/pi) int phi(z) log_+(1/|z|) dz, the constant in the small-t
/// bound for Var G_{N,t}.
inline double small_t_constant(const QuadratureSpec& spec = {}) {
  // log_+(1/z) = 1 + log(1 + 1/(e z)); the first part integrates phi.
  const double base = phi_total_integral(spec).value;
  constexpr int periods = 256;
  const double Z = 2.0 * std::numbers::pi * periods;
  auto f = [](double z) { return phi(z) * std::log1p(1.0 / (std::numbers::e * z)); };
  double body = quad(f, 0.0, 2.0 * std::numbers::pi, spec.with_substitution(EndpointSubstitution::inverse_time)).value;
  for (int k = 1; k < periods; ++k)
    body += quad(f, 2.0 * std::numbers::pi * k, 2.0 * std::numbers::pi * (k + 1), spec.scaled(1.0 / periods)).value;
  const double e = std::numbers::e;
  const double tail = 1.0 / (2.0 * e * Z * Z) - 1.0 / (6.0 * e * e * Z * Z * Z);
  return 6.0 / std::numbers::pi * (base + 2.0 * (body + tail));
}

/// int (eps ^ z^{-2}) log_+(1/|z|) dz.
inline double capped_log_integral(double eps, const QuadratureSpec& spec = {}) {
  if (!(eps > 0.0)) throw DomainError("capped_log_integral: eps must be positive");
  const double z0 = 1.0 / std::sqrt(eps);
  auto inner = [](double z) { return log_plus(1.0 / z); };
  const double a = eps * quad(inner, 0.0, z0, spec.with_substitution(EndpointSubstitution::inverse_time)).value;
  const double b = quad([&](double z) { return inner(z) / (z * z); }, z0, INFINITY, spec).value;
  return 2.0 * (a + b);
}

/// int int_{[0,N]^2} p_t(x1 - x2) dx1 dx2 by nested quadrature.
inline double heat_box_integral_nested(double N, double t, const QuadratureSpec& spec = {}) {
  const QuadratureSpec inner = spec.scaled(0.01);
  const double sd = std::sqrt(t);
  auto row = [&](double x1) {
    // the kernel is negligible beyond 40 sd of x1
    const double lo = std::max(0.0, x1 - 40.0 * sd), hi = std::min(N, x1 + 40.0 * sd);
    return quad([&](double x2) { return heat_kernel(t, x1 - x2); }, lo, hi, inner).value;
  };
  return quad(row, 0.0, N, spec).value;
}

/// (N/pi) int phi(z) exp(-t z^2/(2N^2)) dz.
inline double heat_box_integral_phi(double N, double t, const QuadratureSpec& spec = {}) {
  auto f = [&](double z) { return phi(z) * std::exp(-t * z * z / (2.0 * N * N)); };
  const double chunk = 8.0 * std::numbers::pi;
  const double zmax = N * std::sqrt(2.0 * 40.0 / t);
  const int chunks = static_cast<int>(std::ceil(zmax / chunk));
  const QuadratureSpec piece = spec.scaled(1.0 / chunks);
  double body = 0.0;
  for (int k = 0; k < chunks; ++k) body += quad(f, k * chunk, (k + 1) * chunk, piece).value;
  body += quad(f, chunks * chunk, INFINITY, spec).value;
  return N / std::numbers::pi * 2.0 * body;
}

}  // namespace pamlab
