#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pamlab/errors.hpp"

namespace pamlab {

enum class TimeGridKind {
  // Exact heat flow to warmup_start, geometric steps (ratio 1 + warmup_ratio)
  // until they reach dt, then multiples of dt; trapezoid noise weights.
  graded,
  // t_n = n dt, noiseless first step, left-point noise weights.
  uniform,
};

/// Time points t_0 < ... < t_M at which the field lives, the weight with
/// which the noise attached to each point enters, and the dyadic refinement
/// level of the spatial lattice at each point (h_n = dx / 2^level_n).
struct TimeGrid {
  std::vector<double> t;
  std::vector<double> weight;  // size M; noise layer n acts between t_n and t_{n+1}
  std::vector<int> level;      // size M + 1

  std::size_t steps() const { return weight.size(); }

  /// Index of an anchor time; anchors are hit exactly.
  std::size_t index_of(double time) const {
    auto it = std::lower_bound(t.begin(), t.end(), time * (1.0 - 1e-12));
    if (it == t.end() || std::abs(*it - time) > 1e-12 * time)
      throw DomainError("time grid: time " + std::to_string(time) + " is not a grid point");
    return static_cast<std::size_t>(it - t.begin());
  }

  /// Variance s(t-s)/t of the one-step bridge kernel from t_n to t_{n+1}.
  double step_variance(std::size_t n) const { return t[n] * (t[n + 1] - t[n]) / t[n + 1]; }
};

/// Smallest level l >= 0 with var >= 4 (dx/2^l)^2.
inline int lattice_level(double var, double dx) {
  int l = 0;
  double h = dx;
  while (var < 4.0 * h * h && l < 60) {
    h *= 0.5;
    ++l;
  }
  return l;
}

inline TimeGrid make_time_grid(double dt, double dx, std::vector<double> anchors, TimeGridKind kind,
                               double warmup_start = 1e-10, double warmup_ratio = 0.05) {
  if (anchors.empty()) throw DomainError("time grid: no output times");
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  if (!(anchors.front() > 0.0)) throw DomainError("time grid: output times must be positive");
  TimeGrid g;
  if (kind == TimeGridKind::uniform) {
    const auto M = static_cast<long>(std::llround(anchors.back() / dt));
    for (double a : anchors)
      if (std::abs(a / dt - std::round(a / dt)) > 1e-9 || a < dt * (1 - 1e-12))
        throw DomainError("time grid: uniform grid needs output times that are multiples of dt");
    for (long n = 1; n <= M; ++n) g.t.push_back(n * dt);
    for (long n = 1; n < M; ++n) g.weight.push_back(dt);
    // snap anchors to exact representations
    for (double a : anchors) g.t[static_cast<std::size_t>(std::llround(a / dt)) - 1] = a;
  } else {
    if (!(warmup_start > 0.0) || warmup_start >= anchors.front())
      throw DomainError("time grid: warmup_start must lie in (0, first output time)");
    if (!(warmup_ratio > 0.0)) throw DomainError("time grid: warmup_ratio must be positive");
    double cur = warmup_start;
    g.t.push_back(cur);
    for (double a : anchors) {
      while (cur < a) {
        double step = std::min(warmup_ratio * cur, dt);
        double next = cur + step;
        if (step == dt) {
          // uniform phase: land on multiples of dt, never shorter than dt/2
          next = (std::floor(cur / dt + 1e-9) + 1.0) * dt;
          if (next - cur < 0.5 * dt) next += dt;
          step = next - cur;
        }
        if (next >= a - 0.5 * step) next = a;
        g.t.push_back(next);
        cur = next;
      }
    }
    const std::size_t M = g.t.size() - 1;
    g.weight.resize(M);
    for (std::size_t n = 0; n < M; ++n) {
      const double right = g.t[n + 1] - g.t[n];
      const double left = n == 0 ? 2.0 * warmup_start : g.t[n] - g.t[n - 1];
      // the noise on (0, t_0] is folded into the first layer
      g.weight[n] = 0.5 * (left + right);
    }
  }
  g.level.assign(g.t.size(), 0);
  for (std::size_t n = 0; n + 1 < g.t.size(); ++n) g.level[n] = lattice_level(g.step_variance(n), dx);
  return g;
}

}  // namespace pamlab
