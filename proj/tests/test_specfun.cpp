#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pamlab/reference_values.hpp"
#include "pamlab/specfun.hpp"
#include "pamlab/verify.hpp"

using namespace pamlab;

TEST(Theta, MatchesReferenceValues) {
  EXPECT_NEAR(theta(1.0), reference::theta_1, 2e-15);
  EXPECT_NEAR(theta(2.0), reference::theta_2, 4e-15);
}

TEST(Theta, ClosedFormAgreesWithQuadrature) {
  for (double s : {1e-6, 0.01, 0.5, 1.0, 3.0, 10.0})
    EXPECT_NEAR(theta(s) / theta_quadrature(s, {1e-14, 1e-13, 2000}), 1.0, 1e-10) << "s=" << s;
}

TEST(Theta, IncreasingAndSqrtAtZero) {
  double prev = 0.0;
  for (double s = 1e-4; s < 20.0; s *= 1.3) {
    const double v = theta(s);
    EXPECT_GT(v, prev);
    prev = v;
  }
  // theta(s) ~ sqrt(pi s)/2 as s -> 0
  EXPECT_NEAR(theta(1e-10) / (0.5 * std::sqrt(std::numbers::pi * 1e-10)), 1.0, 1e-5);
  EXPECT_THROW(theta(0.0), DomainError);
}

TEST(Phi, ValuesAndBounds) {
  EXPECT_DOUBLE_EQ(phi(0.0), 0.5);
  EXPECT_NEAR(phi(std::numbers::pi), 2.0 / (std::numbers::pi * std::numbers::pi), 1e-16);
  EXPECT_NEAR(phi(2.0 * std::numbers::pi), 0.0, 1e-17);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double z = u(gen);
    const double v = phi(z);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 0.5);
    EXPECT_LE(v, 2.0 / (z * z) + 1e-15);
    EXPECT_EQ(v, phi(-z));
  }
}

TEST(Phi, TotalIntegralIsPi) {
  EXPECT_NEAR(phi_total_integral().value, std::numbers::pi, 1e-9);
}

TEST(GFn, LimitPinned) {
  for (int i = 0; i < 3; ++i) {
    const double t = reference::g_limit_t[i];
    EXPECT_NEAR(g_fn({1e12, t, 1.0}, {1e-14, 1e-13, 4000}), reference::g_limit_value[i], 1e-12 * t);
  }
}

TEST(GFn, DecompositionAgrees) {
  const QuadratureSpec tight{1e-14, 1e-13, 4000};
  for (double N : {10.0, 1e3, 1e6})
    for (double t : {0.1, 1.0})
      for (double x : {0.01, 1.0, 30.0}) {
        const GDecomposition d = g_decomposition({N, t, x}, tight);
        EXPECT_NEAR(d.value / g_fn({N, t, x}, tight), 1.0, 1e-11) << N << " " << t << " " << x;
      }
}

TEST(GFn, DecreasingInAbsX) {
  double prev = INFINITY;
  for (double x = 1e-3; x < 1e3; x *= 2.0) {
    const double v = g_fn({100.0, 0.5, x});
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(GFn, Domain) {
  EXPECT_THROW(g_fn({2.0, 1.0, 1.0}), DomainError);
  EXPECT_THROW(g_fn({10.0, 0.0, 1.0}), DomainError);
  EXPECT_THROW(g_fn({10.0, 1.0, 0.0}), DomainError);
}

TEST(GWeight, ReducesToBoxProbability) {
  // (1/N) int_0^N p_v(y - (s/t) x) dx integrated over y gives t/s * (s/t) = 1
  const double N = 5.0, t = 1.0, s = 0.4;
  const double v = quad([&](double y) { return g_weight(N, t, s, y); }, -INFINITY, INFINITY).value;
  EXPECT_NEAR(v, 1.0, 1e-9);
  EXPECT_THROW(g_weight(N, t, 0.0, 0.0), DomainError);
  EXPECT_THROW(g_weight(N, t, t, 0.0), DomainError);
}

TEST(Bounds, AppendixInequalitiesOnRandomGrids) {
  for (const CheckResult& r : {verify::g_upper_bound(1000, 12), verify::g_small_t_bound(1000, 13),
                               verify::capped_log_bound(1000, 14), verify::g_limit()}) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}

TEST(LogPlus, AtLeastOne) {
  EXPECT_DOUBLE_EQ(log_plus(0.0), 1.0);
  EXPECT_GT(log_plus(1e-3), 1.0);
  EXPECT_EQ(log_plus(1e-300), 1.0);
  EXPECT_NEAR(log_plus(1e10), std::log(1e10), 1e-9);
}
