#pragma once

#include <cmath>
#include <numbers>

#include "pamlab/errors.hpp"
#include "pamlab/gaussian.hpp"
#include "pamlab/kernels.hpp"
#include "pamlab/quadrature.hpp"

namespace pamlab {

/// log_+(w) = log(e + w).
inline double log_plus(double w) { return std::log(std::numbers::e + w); }

/// theta(s) = e^{s/4} sqrt(s/2) int_{-inf}^{sqrt(s/2)} e^{-y^2/2} dy
///          = e^{s/4} sqrt(pi s) Phi(sqrt(s/2)).
inline double theta(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("theta: s must be positive and finite");
  return std::exp(0.25 * s) * std::sqrt(std::numbers::pi * s) * norm_cdf(std::sqrt(0.5 * s));
}

/// Same quantity by direct quadrature of the Gaussian integral (cross-check).
inline double theta_quadrature(double s, const QuadratureSpec& spec = {}) {
  if (!(s > 0.0)) throw DomainError("theta: s must be positive");
  const double upper = std::sqrt(0.5 * s);
  const double I = quad([](double y) { return std::exp(-0.5 * y * y); }, -INFINITY, upper, spec).value;
  return std::exp(0.25 * s) * upper * I;
}

/// phi(z) = (1 - cos z)/z^2, phi(0) = 1/2.  Written as (1/2)(sin(z/2)/(z/2))^2.
inline double phi(double z) {
  const double h = 0.5 * z;
  if (std::abs(h) < 1e-8) return 0.5 - z * z / 24.0;
  const double r = std::sin(h) / h;
  return 0.5 * r * r;
}

/// int phi over the real line by quadrature on [0, 2 pi m] plus the
/// asymptotic series of the tail, int_Z^inf (1 - cos z)/z^2 dz at Z = 2 pi m.
inline QuadResult phi_total_integral(const QuadratureSpec& spec = {}) {
  constexpr int periods = 64;
  const double Z = 2.0 * std::numbers::pi * periods;
  QuadResult body{};
  for (int k = 0; k < periods; ++k) {
    const double a = 2.0 * std::numbers::pi * k, b = a + 2.0 * std::numbers::pi;
    QuadResult r = quad([](double z) { return phi(z); }, a, b, spec.scaled(1.0 / periods));
    body.value += r.value;
    body.error += r.error;
    body.intervals += r.intervals;
  }
  // f(Z) ~ (1/Z)(1 - 2!/Z^2 + 4!/Z^4 - 6!/Z^6 + 8!/Z^8)
  const double iz2 = 1.0 / (Z * Z);
  const double tail = (1.0 - iz2 * (2.0 - iz2 * (24.0 - iz2 * (720.0 - iz2 * 40320.0)))) / Z;
  return {2.0 * (body.value + tail), 2.0 * body.error, body.intervals};
}

struct GFnQuery {
  double N;
  double t;
  double x;
  void validate() const {
    if (!(N >= std::numbers::e)) throw DomainError("g_fn: N must be >= e");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("g_fn: t must be positive");
    if (!(x != 0.0) || !std::isfinite(x)) throw DomainError("g_fn: x must be finite and nonzero");
  }
};

/// int_0^inf e^{-s}/(s + a) ds = e^a E1(a), a > 0, by quadrature.  The piece
/// over [0,1] uses the logarithmic substitution so that a down to 1e-300 is
/// resolved.
inline QuadResult exp_e1(double a, const QuadratureSpec& spec = {}) {
  const QuadratureSpec half = spec.scaled(0.5);
  auto f = [a](double s) { return std::exp(-s) / (s + a); };
  QuadResult lo = quad(f, 0.0, 1.0, half.with_substitution(EndpointSubstitution::inverse_time));
  QuadResult hi = quad(f, 1.0, INFINITY, half.with_substitution(EndpointSubstitution::none));
  return {lo.value + hi.value, lo.error + hi.error, lo.intervals + hi.intervals};
}

/// G_{N,t}(x) = (t/log N) int_0^t exp(-((t-s)t/s) x^2/N^2) ds/s,
/// evaluated as (t/log N) int_0^inf e^{-s}/(s + t x^2/N^2) ds.
inline double g_fn(const GFnQuery& q, const QuadratureSpec& spec = {}) {
  q.validate();
  const double a = q.t * q.x * q.x / (q.N * q.N);
  return q.t / std::log(q.N) * exp_e1(a, spec).value;
}

struct GDecomposition {
  double A, B, C;
  double value;  // (t/log N)(A - B + C)
};

/// The split used in the appendix bound: A = log(N^2/(t x^2) + 1),
/// B = int_0^1 (1 - e^{-s})/(s + a) ds, C = int_1^inf e^{-s}/(s + a) ds.
inline GDecomposition g_decomposition(const GFnQuery& q, const QuadratureSpec& spec = {}) {
  q.validate();
  const double a = q.t * q.x * q.x / (q.N * q.N);
  const double A = std::log1p(1.0 / a);
  const QuadratureSpec sub = spec.scaled(0.5).with_substitution(EndpointSubstitution::none);
  const double B = quad([a](double s) { return -std::expm1(-s) / (s + a); }, 0.0, 1.0, sub).value;
  const double C = quad([a](double s) { return std::exp(-s) / (s + a); }, 1.0, INFINITY, sub).value;
  return {A, B, C, q.t / std::log(q.N) * (A - B + C)};
}

/// g_{N,t}(s,y) = (1/N) int_0^N p_{s(t-s)/t}(y - (s/t) x) dx
///             = (t/(sN)) P((y - sN/t)/sd < Z < y/sd).
inline double g_weight(double N, double t, double s, double y) {
  if (!(N > 0.0)) throw DomainError("g_weight: N must be positive");
  if (!(s > 0.0 && s < t)) throw DomainError("g_weight: s must lie in (0, t)");
  const double sd = std::sqrt(bridge_variance(s, t));
  return t / (s * N) * norm_interval((y - s * N / t) / sd, y / sd);
}

}  // namespace pamlab
