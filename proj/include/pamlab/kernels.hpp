#pragma once

#include <cmath>
#include <numbers>

#include "pamlab/errors.hpp"

namespace pamlab {

struct HeatKernelQuery {
  double t;
  double x;
};

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

// log p_t(x); t > 0 is the caller's responsibility.
inline double log_heat_kernel_unchecked(double t, double x) {
  return -0.5 * std::log(t) - kLogSqrt2Pi - x * x / (2.0 * t);
}

inline double log_heat_kernel(double t, double x) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("heat_kernel: t must be positive and finite");
  if (!std::isfinite(x)) throw DomainError("heat_kernel: x must be finite");
  return log_heat_kernel_unchecked(t, x);
}

/// Gaussian heat kernel p_t(x) = (2 pi t)^{-1/2} exp(-x^2 / 2t).
inline double heat_kernel(double t, double x) { return std::exp(log_heat_kernel(t, x)); }
inline double heat_kernel(const HeatKernelQuery& q) { return heat_kernel(q.t, q.x); }

/// Variance s(t-s)/t of the Brownian bridge from 0 to x over [0,t], at time s.
inline double bridge_variance(double s, double t) { return s * (t - s) / t; }

/// p_{s(t-s)/t}(y - (s/t) x), i.e. p_{t-s}(x-y) p_s(y) / p_t(x) evaluated
/// without forming the ratio.
inline double bridge_kernel(double s, double t, double y, double x) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("bridge_kernel: t must be positive and finite");
  if (!(s > 0.0 && s < t)) throw DomainError("bridge_kernel: s must lie in (0, t)");
  const double v = bridge_variance(s, t);
  const double arg = y - (s / t) * x;
  if (v < 1e-300) return arg == 0.0 ? INFINITY : 0.0;  // point mass
  return std::exp(log_heat_kernel_unchecked(v, arg));
}

}  // namespace pamlab
