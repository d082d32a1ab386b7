#pragma once

// Adaptive 21-point Gauss-Kronrod quadrature with a global error queue.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "pamlab/errors.hpp"

namespace pamlab {

enum class EndpointSubstitution {
  none,
  // s = lo + (hi - lo)/(1 + theta), with log(1 + theta) integrated over
  // [0, inf).  Tames 1/s-type growth at the lower endpoint.
  inverse_time,
};

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  EndpointSubstitution endpoint_substitution = EndpointSubstitution::none;

  void validate() const {
    if (!(abs_tol > 0.0)) throw ConfigError("quad.abs_tol", "must be > 0");
    if (!(rel_tol > 0.0)) throw ConfigError("quad.rel_tol", "must be > 0");
    if (max_subdivisions < 1) throw ConfigError("quad.max_subdivisions", "must be >= 1");
  }

  QuadratureSpec with_substitution(EndpointSubstitution s) const {
    QuadratureSpec q = *this;
    q.endpoint_substitution = s;
    return q;
  }
  QuadratureSpec scaled(double factor) const {
    QuadratureSpec q = *this;
    q.abs_tol *= factor;
    q.rel_tol *= factor;
    return q;
  }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// QUADPACK qk21 on [a,b] for a finite-interval integrand g.
template <class G>
Segment gk21(G& g, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = g(c);
  double resg = 0.0;
  double resk = fc * kWgk[10];
  double resabs = std::abs(resk);
  double fv1[10], fv2[10];
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = g(c - dx);
    const double f2 = g(c + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double ah = std::abs(h);
  const double result = resk * h;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * resabs, err);
  return {a, b, result, err};
}

template <class G>
QuadResult adapt(G&& g, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Segment> heap;
  Segment first = gk21(g, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int intervals = 1;
  auto done = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
  while (!done()) {
    if (intervals >= spec.max_subdivisions)
      throw NumericalError("quad: max_subdivisions exhausted (error estimate " + std::to_string(total_err) + ")",
                           total, total_err);
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      // Interval at floating-point resolution: nothing left to refine.
      if (worst.error <= 1e3 * std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) break;
      throw NumericalError("quad: interval collapsed before tolerance was met", total, total_err);
    }
    heap.pop();
    Segment l = gk21(g, worst.a, mid);
    Segment r = gk21(g, mid, worst.b);
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++intervals;
    if (intervals % 64 == 0) {
      // Re-sum to shed accumulated cancellation in the running totals.
      total = 0.0;
      total_err = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, total_err, intervals};
}

}  // namespace detail

/// Integrates f over [lo, hi]; either end may be infinite.  Infinite ends
/// are compactified by z = u/(1-u).
template <class F>
QuadResult quad(F&& f, double lo, double hi, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("quad: NaN bound");
  if (lo == hi) return {};
  if (lo > hi) {
    QuadResult r = quad(f, hi, lo, spec);
    r.value = -r.value;
    return r;
  }
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) {
    QuadratureSpec half = spec;
    half.abs_tol *= 0.5;
    half.endpoint_substitution = EndpointSubstitution::none;
    QuadResult l = quad(f, -INFINITY, 0.0, half);
    QuadResult r = quad(f, 0.0, INFINITY, half);
    return {l.value + r.value, l.error + r.error, l.intervals + r.intervals};
  }
  if (hi_inf) {
    auto g = [&](double u) {
      const double w = 1.0 - u;
      return f(lo + u / w) / (w * w);
    };
    return detail::adapt(g, 0.0, 1.0, spec);
  }
  if (lo_inf) {
    auto g = [&](double u) {
      const double w = 1.0 - u;
      return f(hi - u / w) / (w * w);
    };
    return detail::adapt(g, 0.0, 1.0, spec);
  }
  if (spec.endpoint_substitution == EndpointSubstitution::inverse_time) {
    // s = lo + L e^{-v}, v = log(1+theta) in [0, inf), then v = u/(1-u).
    const double L = hi - lo;
    auto g = [&](double u) {
      const double w = 1.0 - u;
      const double v = u / w;
      const double e = std::exp(-v);
      const double s = lo + L * e;
      if (e == 0.0 || s <= lo) return 0.0;
      return f(s) * L * e / (w * w);
    };
    return detail::adapt(g, 0.0, 1.0, spec);
  }
  return detail::adapt(f, lo, hi, spec);
}

}  // namespace pamlab
