#pragma once

// Standard normal helpers and the closed-form double integral of a Gaussian
// density over a box.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace pamlab {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
inline double norm_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

/// P(lo < Z < hi) for a standard normal Z, without cancellation in the tails.
inline double norm_interval(double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (lo >= 0.0) return norm_sf(lo) - norm_sf(hi);
  if (hi <= 0.0) return norm_cdf(hi) - norm_cdf(lo);
  return 0.5 * (std::erf(hi * kInvSqrt2) - std::erf(lo * kInvSqrt2));
}

// Psi_Q(z) = phi(z) - z Q(z) = integral of Q over [z, inf).
inline double psi_q(double z) { return norm_pdf(z) - z * norm_sf(z); }

namespace detail {

template <int M>
struct GaussLegendre {
  std::array<double, M> x{}, w{};
  GaussLegendre() {
    for (int i = 0; i < M; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (M + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < M; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        dp = M * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

inline const GaussLegendre<24>& gl24() {
  static const GaussLegendre<24> rule;
  return rule;
}

}  // namespace detail

/// D(a,b) = int_0^a int_0^b phi(w - v) dv dw for a, b >= 0 (phi the standard
/// normal density).  Symmetric in (a,b).
inline double box_normal_integral(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= 0.0) return 0.0;
  const auto& gl = detail::gl24();
  if (b <= 1.0) {
    if (a <= 1.0) {
      double s = 0.0;
      for (int i = 0; i < 24; ++i) {
        const double w = 0.5 * a * (gl.x[i] + 1.0);
        double inner = 0.0;
        for (int j = 0; j < 24; ++j) {
          const double v = 0.5 * b * (gl.x[j] + 1.0);
          inner += gl.w[j] * norm_pdf(w - v);
        }
        s += gl.w[i] * inner;
      }
      return 0.25 * a * b * s;
    }
    // integral over v in [0,b] of P(-v < Z < a - v)
    double s = 0.0;
    for (int j = 0; j < 24; ++j) {
      const double v = 0.5 * b * (gl.x[j] + 1.0);
      s += gl.w[j] * norm_interval(-v, a - v);
    }
    return 0.5 * b * s;
  }
  return b - psi_q(a - b) + psi_q(a) - kInvSqrt2Pi + psi_q(b);
}

/// Double integral over [0,N]^2 of p_var(alpha x - beta y), alpha, beta > 0.
inline double box_heat_integral(double var, double alpha, double beta, double N) {
  const double sd = std::sqrt(var);
  const double a = alpha * N / sd, b = beta * N / sd;
  // small box: D(a,b) = ab phi(0) (1 + O(a^2 + b^2)); avoids 0/0 as alpha -> 0
  if (std::max(a, b) < 1e-7) return N * N * kInvSqrt2Pi / sd;
  return sd / (alpha * beta) * box_normal_integral(a, b);
}

}  // namespace pamlab
