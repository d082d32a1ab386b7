#pragma once

// Deterministic identity suite: kernel identities, special-function pins and
// appendix inequalities, oracle invariants.  Every check is a pure function
// of its (fixed) seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pamlab/kernels.hpp"
#include "pamlab/oracle.hpp"
#include "pamlab/reference_values.hpp"
#include "pamlab/specfun.hpp"

namespace pamlab {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the measured quantity (worst case for sweeps)
  double bound = 0.0;  // what it was compared against
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

namespace detail {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : gen_(seed) {}
  double operator()() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }
  double in(double a, double b) { return a + (b - a) * (*this)(); }
  double log_in(double a, double b) { return std::exp(in(std::log(a), std::log(b))); }

 private:
  std::mt19937_64 gen_;
};

template <class F>
CheckResult timed(const std::string& name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = f();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace detail

namespace verify {

/// p_{t-s}(x - y) p_s(y)/p_t(x) against bridge_kernel(s, t, y, x) on random
/// tuples 0 < s < t <= 10, |x|, |y| <= 20.  The ratio side is formed in
/// extended precision in log space (p_t(x) itself underflows in double).
inline CheckResult bridge_identity(int tuples = 10000, std::uint64_t seed = 11) {
  return detail::timed("bridge identity", [&] {
    detail::Uniform u(seed);
    double worst = 0.0;
    using ld = long double;
    const ld log2pi = std::log(2.0L * std::numbers::pi_v<ld>);
    for (int i = 0; i < tuples; ++i) {
      const double t = u.in(0.0, 10.0);
      const double s = t * u.in(0.0, 1.0);
      const double x = u.in(-20.0, 20.0), y = u.in(-20.0, 20.0);
      if (!(s > 0.0 && s < t)) continue;
      const ld L = static_cast<ld>(t), S = static_cast<ld>(s), X = static_cast<ld>(x), Y = static_cast<ld>(y);
      const ld e = -(X - Y) * (X - Y) / (2 * (L - S)) - Y * Y / (2 * S) + X * X / (2 * L) -
                   0.5L * (std::log(L - S) + std::log(S) - std::log(L) + log2pi);
      const double ratio = static_cast<double>(std::exp(e));
      worst = std::max(worst, std::abs(ratio - bridge_kernel(s, t, y, x)));
    }
    return CheckResult{"", worst < 1e-12, worst, 1e-12, std::to_string(tuples) + " tuples"};
  });
}

/// Double integral of p_t(x1 - x2) over [0,N]^2: nested quadrature against
/// (N/pi) int phi(z) exp(-t z^2/(2 N^2)) dz, for N in {10, 100}, t in {0.5, 1, 2}.
inline CheckResult heat_box_formula(const QuadratureSpec& spec = {}) {
  return detail::timed("heat-kernel box formula", [&] {
    double worst = 0.0, worst_ref = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) {
        const double N = reference::box_N[i], t = reference::box_t[j];
        const double a = heat_box_integral_nested(N, t, spec), b = heat_box_integral_phi(N, t, spec);
        worst = std::max(worst, detail::rel_err(a, b));
        worst_ref = std::max({worst_ref, detail::rel_err(a, reference::box_value[i][j]),
                              detail::rel_err(b, reference::box_value[i][j])});
      }
    return CheckResult{"", worst < 1e-8 && worst_ref < 1e-8, worst, 1e-8,
                       "max rel error vs closed form " + detail::fmt(worst_ref)};
  });
}

/// sup_N G_{N,t}(x) <= 7 t log_+(1/t) log_+(1/|x|) on random (N, t, x).
inline CheckResult g_upper_bound(int points = 1000, std::uint64_t seed = 12, const QuadratureSpec& spec = {}) {
  return detail::timed("G upper bound", [&] {
    detail::Uniform u(seed);
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      const double N = u.log_in(std::numbers::e, 1e12), t = u.log_in(1e-4, 1e2);
      const double x = (u() < 0.5 ? -1.0 : 1.0) * u.log_in(1e-6, 1e6);
      const double g = g_fn({N, t, x}, spec);
      worst = std::max(worst, g / (7.0 * t * log_plus(1.0 / t) * log_plus(1.0 / std::abs(x))));
    }
    return CheckResult{"", worst <= 1.0, worst, 1.0, "max of G / bound over " + std::to_string(points) + " points"};
  });
}

/// |G_{N,t}(x) - t log(1/t)/log N| <= 6 t log_+(1/|x|) for t in (0,1), on
/// random (N, t, x) with 0 < |x| <= N.
inline CheckResult g_small_t_bound(int points = 1000, std::uint64_t seed = 13, const QuadratureSpec& spec = {}) {
  return detail::timed("G small-t bound", [&] {
    detail::Uniform u(seed);
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      const double N = u.log_in(std::numbers::e, 1e12), t = u.log_in(1e-8, 1.0);
      const double x = (u() < 0.5 ? -1.0 : 1.0) * u.log_in(1e-6, N);
      const double g = g_fn({N, t, x}, spec);
      const double dev = std::abs(g - t * std::log(1.0 / t) / std::log(N));
      worst = std::max(worst, dev / (6.0 * t * log_plus(1.0 / std::abs(x))));
    }
    return CheckResult{"", worst <= 1.0, worst, 1.0, "max of deviation / bound, |x| <= N"};
  });
}

/// J(eps) < 10 sqrt(eps) on random eps in (0, 1), plus the pinned J(0.01).
inline CheckResult capped_log_bound(int points = 1000, std::uint64_t seed = 14, const QuadratureSpec& spec = {}) {
  return detail::timed("capped log integral bound", [&] {
    detail::Uniform u(seed);
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      const double eps = u.log_in(1e-10, 1.0);
      worst = std::max(worst, capped_log_integral(eps, spec) / (10.0 * std::sqrt(eps)));
    }
    const double pin = detail::rel_err(capped_log_integral(0.01, spec), reference::capped_log_J_001);
    return CheckResult{"", worst < 1.0 && pin < 1e-8, worst, 1.0,
                       "max of J / 10 sqrt(eps); J(0.01) rel error " + detail::fmt(pin)};
  });
}

/// |G_{1e12,t}(1) - 2t| equals the pinned distance for t in {0.5, 1, 2}.
inline CheckResult g_limit(const QuadratureSpec& spec = {}) {
  return detail::timed("G limit at N = 1e12", [&] {
    double worst_pin = 0.0, worst_gap = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double t = reference::g_limit_t[i];
      const double g = g_fn({1e12, t, 1.0}, spec);
      const double gap = std::abs(g - 2.0 * t), pinned = std::abs(reference::g_limit_value[i] - 2.0 * t);
      worst_pin = std::max(worst_pin, detail::rel_err(g, reference::g_limit_value[i]));
      worst_gap = std::max(worst_gap, gap / (pinned * (1.0 + 1e-6)));
    }
    return CheckResult{"", worst_gap <= 1.0 && worst_pin < 1e-8, worst_gap, 1.0,
                       "|G - 2t| / pinned threshold; value rel error " + detail::fmt(worst_pin)};
  });
}

/// Var S_{N,t} N/(2 t log N) strictly decreasing toward 1 along
/// N = 1e2 ... 1e8, t in {0.5, 1}, and reproducing the pins to 1e-6.
inline CheckResult variance_asymptotics(const QuadratureSpec& spec = {}) {
  return detail::timed("variance asymptotics", [&] {
    bool ok = true;
    double worst = 0.0;
    std::ostringstream os;
    os.precision(12);
    for (int j = 0; j < 2; ++j) {
      double prev = INFINITY;
      os << "t=" << reference::ratio_t[j] << ":";
      for (int i = 0; i < 5; ++i) {
        const double r = var_ratio({reference::ratio_N[i], reference::ratio_t[j], FieldKind::pam}, spec);
        ok = ok && r < prev && r > 1.0;
        prev = r;
        worst = std::max(worst, detail::rel_err(r, reference::ratio_value[j][i]));
        os << " " << r;
      }
      os << "; ";
    }
    return CheckResult{"", ok && worst < 1e-6, worst, 1e-6, os.str()};
  });
}

}  // namespace verify

/// The full identity suite behind `pamlab verify`.
inline VerifyReport run_verify_suite(const QuadratureSpec& spec = {}) {
  using detail::rel_err;
  using detail::timed;
  VerifyReport rep;
  auto add = [&](CheckResult r) { rep.checks.push_back(std::move(r)); };
  auto simple = [&](const std::string& name, std::function<std::pair<double, double>()> f) {
    // f returns (measured, bound); passes when measured < bound
    add(timed(name, [&] {
      auto [v, b] = f();
      return CheckResult{"", v < b, v, b, ""};
    }));
  };

  // kernels
  simple("heat kernel closed forms", [] {
    return std::pair{std::max({rel_err(heat_kernel(1.0, 0.0), 0.3989422804014327),
                               rel_err(heat_kernel(0.5, 0.0), 0.5641895835477563),
                               rel_err(heat_kernel(4.0, 2.0), 0.5 * heat_kernel(1.0, 1.0))}),
                     4e-16};
  });
  add(verify::bridge_identity());
  simple("heat kernel scaling", [] {
    detail::Uniform u(21);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      // exponents stay below ~200, where exp carries ~1e-14 relative error
      const double s = u.log_in(0.1, 10.0), a = u.log_in(0.5, 2.0), w = u.in(-3.0, 3.0);
      worst = std::max(worst, rel_err(heat_kernel(s, a * w), heat_kernel(s / (a * a), w) / a));
    }
    return std::pair{worst, 1e-13};
  });
  simple("semigroup by quadrature", [&] {
    double worst = 0.0;
    for (double s : {0.1, 0.5, 2.0})
      for (double t : {0.1, 0.5, 2.0})
        for (double x : {-1.0, 0.0, 2.5}) {
          const double v = quad([&](double y) { return heat_kernel(t, x - y) * heat_kernel(s, y); }, -INFINITY,
                                INFINITY, spec).value;
          worst = std::max(worst, rel_err(v, heat_kernel(t + s, x)));
        }
    return std::pair{worst, 1e-8};
  });
  simple("kernel normalization", [&] {
    const double a = quad([](double y) { return heat_kernel(0.7, y); }, -INFINITY, INFINITY, spec).value;
    const double b = quad([](double y) { return bridge_kernel(0.4, 1.0, y, 5.0); }, -INFINITY, INFINITY, spec).value;
    return std::pair{std::max(std::abs(a - 1.0), std::abs(b - 1.0)), 1e-8};
  });

  // specfun
  simple("theta pins", [&] {
    return std::pair{std::max({rel_err(theta(1.0), reference::theta_1), rel_err(theta(2.0), reference::theta_2),
                               rel_err(theta_quadrature(2.0, spec), reference::theta_2),
                               theta(1e-8) < 1e-3 ? 0.0 : 1.0}),
                     1e-12};
  });
  simple("theta monotone and bounded", [] {
    double prev = 0.0, worst = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      const double s = 0.01 * i, th = theta(s);
      if (!(th > prev)) return std::pair{1.0, 0.0};
      prev = th;
      worst = std::max(worst, th / (std::exp(0.25 * s) * std::sqrt(std::numbers::pi * s)));
    }
    return std::pair{worst, 1.0 + 1e-15};
  });
  simple("phi properties", [] {
    double bad = std::abs(phi(0.0) - 0.5) + std::abs(phi(std::numbers::pi) - 2.0 / (std::numbers::pi * std::numbers::pi));
    for (int i = 1; i <= 2000; ++i) {
      const double z = 0.01 * i;
      if (phi(z) != phi(-z) || !(phi(z) > 0.0) || phi(z) > 0.5 || (z >= 2.0 && phi(z) > 2.0 / (z * z))) bad += 1.0;
    }
    return std::pair{bad, 1e-15};
  });
  simple("integral of phi is pi", [&] { return std::pair{std::abs(phi_total_integral(spec).value - std::numbers::pi), 1e-10}; });
  simple("Beta(1/2,1/2) quadrature", [&] {
    // symmetric halves, so that no node rounds onto the far endpoint
    const double v = 2.0 * quad([](double s) { return 1.0 / std::sqrt(s * (1.0 - s)); }, 0.0, 0.5, spec).value;
    return std::pair{std::abs(v - std::numbers::pi), 1e-8 * std::numbers::pi};
  });
  simple("G quadrature vs A-B+C", [&] {
    const QuadratureSpec tight{1e-14, 1e-13, 4000, EndpointSubstitution::none};
    detail::Uniform u(22);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const GFnQuery q{u.log_in(std::numbers::e, 1e12), u.log_in(1e-3, 10.0), u.log_in(1e-3, 1e3)};
      const double a = g_fn(q, tight), b = g_decomposition(q, tight).value;
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }
    return std::pair{worst, 1e-10};
  });
  add(verify::g_upper_bound(1000, 12, spec));
  add(verify::g_small_t_bound(1000, 13, spec));
  add(verify::g_limit(spec));
  simple("g_weight integrates to 1", [&] {
    double worst = 0.0;
    for (double s : {0.1, 0.5, 0.9}) {
      const double v = quad([&](double y) { return g_weight(20.0, 1.0, s, y); }, -INFINITY, INFINITY, spec).value;
      worst = std::max(worst, std::abs(v - 1.0));
    }
    return std::pair{worst, 1e-8};
  });
  simple("g_weight bound", [] {
    detail::Uniform u(23);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double N = u.log_in(1.0, 1e4), t = u.log_in(0.01, 10.0), s = t * u.in(1e-6, 1.0 - 1e-6);
      const double y = u.in(-0.5 * N, 1.5 * N);
      worst = std::max(worst, g_weight(N, t, s, y) / (t / (s * N)));
    }
    return std::pair{worst, 1.0 + 1e-12};
  });
  simple("g_weight as s -> t", [] {
    const double N = 10.0, t = 1.0, s = t * (1.0 - 1e-6);
    double worst = 0.0;
    // the prefactor t/s contributes exactly 1e-6/N
    for (double y : {-1.0, 0.5, 5.0, 9.5, 11.0}) {
      const double limit = (y > 0.0 && y < N) ? 1.0 / N : 0.0;
      worst = std::max(worst, std::abs(g_weight(N, t, s, y) - limit) * N);
    }
    return std::pair{worst, 1.01e-6};
  });
  add(verify::capped_log_bound(1000, 14, spec));
  add(verify::heat_box_formula(spec));

  // oracle
  simple("second moment pin", [] {
    return std::pair{rel_err(second_moment_u(1.0, 0.0), reference::second_moment_u_1_0) +
                         std::abs(second_moment_u(0.7, 1.3) - second_moment_u(0.7, -1.3)),
                     1e-14};
  });
  simple("cov_U symmetry and stationarity", [&] {
    detail::Uniform u(24);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double t1 = u.in(0.1, 2.0), t2 = u.in(0.1, 2.0), x = u.in(-3, 3), y = u.in(-3, 3), h = u.in(-5, 5);
      worst = std::max(worst, std::abs(cov_U({t1, t2, x, y}, spec) - cov_U({t2, t1, y, x}, spec)));
      worst = std::max(worst, std::abs(cov_U({t1, t1, x, y}, spec) - cov_U({t1, t1, x + h, y + h}, spec)));
    }
    return std::pair{worst, 1e-7};
  });
  simple("Var V(1,0) and Var U(1,0) >= sqrt(pi/4)", [&] {
    const double v = cov_field({1.0, 1.0, 0.0, 0.0}, FieldKind::gaussian_proxy, spec).value;
    const double w = cov_U({1.0, 1.0, 0.0, 0.0}, spec);
    return std::pair{rel_err(v, reference::var_V_1_0) + (w >= v ? 0.0 : 1.0), 1e-8};
  });
  simple("cov_U PSD on 4 points", [&] {
    Eigen::Matrix4d C;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) C(i, j) = cov_U({1.0, 1.0, double(i), double(j)}, spec);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(C);
    return std::pair{-es.eigenvalues().minCoeff(), 1e-9};
  });
  simple("var_avg pins and pam >= proxy", [&] {
    const double p = var_avg({100.0, 0.5, FieldKind::gaussian_proxy}, spec);
    const double q = var_avg({100.0, 0.5, FieldKind::pam}, spec);
    return std::pair{rel_err(p, reference::var_proxy_100_05) + rel_err(q, reference::var_pam_100_05) +
                         (q >= p ? 0.0 : 1.0),
                     1e-8};
  });
  simple("proxy variance: s route vs phi-G route", [&] {
    return std::pair{rel_err(var_avg({100.0, 0.5, FieldKind::gaussian_proxy}, spec), var_avg_proxy_phi_g(100.0, 0.5, spec)),
                     1e-8};
  });
  simple("var_avg increasing in t", [&] {
    double prev = 0.0;
    for (int i = 1; i <= 20; ++i) {
      const double v = var_avg({100.0, 0.1 * i, FieldKind::pam}, spec);
      if (!(v > prev)) return std::pair{1.0, 0.0};
      prev = v;
    }
    return std::pair{0.0, 1.0};
  });
  simple("small-t proxy bound", [&] {
    const double K = small_t_constant(spec);
    double worst = rel_err(K, reference::small_t_K) > 1e-8 ? 1e9 : 0.0;
    for (double N : {10.0, 100.0, 1000.0})
      for (double t : {1e-3, 1e-2, 0.1, 0.5}) {
        const double v = var_avg({N, t, FieldKind::gaussian_proxy}, spec);
        worst = std::max(worst, std::abs(v - t * std::log(1.0 / t) / N) / (K * t * std::log(N) / N));
      }
    return std::pair{worst, 1.0};
  });
  simple("cov_avg symmetric and pinned", [&] {
    const double a = cov_avg(1e6, 0.5, 1.0, spec), b = cov_avg(1e6, 1.0, 0.5, spec);
    const double scaled = a * 1e6 / std::log(1e6);
    const double diag = rel_err(cov_avg(100.0, 0.5, 0.5, spec), var_avg({100.0, 0.5, FieldKind::pam}, spec));
    return std::pair{rel_err(a, b) + rel_err(scaled, reference::scaled_cov_1e6) + diag, 1e-6};
  });
  add(verify::variance_asymptotics(spec));
  return rep;
}

}  // namespace pamlab
