#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pamlab/kernels.hpp"
#include "pamlab/quadrature.hpp"
#include "pamlab/verify.hpp"

using namespace pamlab;

TEST(HeatKernel, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(heat_kernel(1.0, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi));
  // p_2(1) = e^{-1/4}/sqrt(4 pi)
  EXPECT_NEAR(heat_kernel(2.0, 1.0), 0.21969564473386122, 1e-16);
  EXPECT_NEAR(heat_kernel(0.5, -1.0), 0.20755374871029736, 1e-16);
}

TEST(HeatKernel, LogFormSurvivesUnderflow) {
  EXPECT_EQ(heat_kernel(1e-4, 1.0), 0.0);
  EXPECT_NEAR(log_heat_kernel(1e-4, 1.0), -5000.0 - 0.5 * std::log(2.0 * std::numbers::pi * 1e-4), 1e-9);
}

TEST(HeatKernel, RejectsNonPositiveTime) {
  EXPECT_THROW(heat_kernel(0.0, 1.0), DomainError);
  EXPECT_THROW(heat_kernel(-1.0, 0.0), DomainError);
  EXPECT_THROW(log_heat_kernel(NAN, 0.0), DomainError);
}

TEST(HeatKernel, IntegratesToOne) {
  for (double t : {1e-3, 0.3, 1.0, 50.0}) {
    const double v = quad([&](double x) { return heat_kernel(t, x); }, -INFINITY, INFINITY, {1e-13, 1e-12, 4000}).value;
    EXPECT_NEAR(v, 1.0, 1e-10) << "t=" << t;
  }
}

TEST(HeatKernel, SecondMomentIsT) {
  const double t = 0.7;
  const double v = quad([&](double x) { return x * x * heat_kernel(t, x); }, -INFINITY, INFINITY).value;
  EXPECT_NEAR(v, t, 1e-9);
}

TEST(HeatKernel, SymmetryAndScaling) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ut(0.1, 10.0), ux(-3.0, 3.0), ua(0.5, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = ut(gen), x = ux(gen), a = ua(gen);
    EXPECT_EQ(heat_kernel(t, x), heat_kernel(t, -x));
    // p_{a^2 t}(a x) = p_t(x)/a
    EXPECT_NEAR(heat_kernel(a * a * t, a * x) * a / heat_kernel(t, x), 1.0, 1e-13);
  }
}

TEST(HeatKernel, Semigroup) {
  const double s = 0.3, t = 0.9, x = 0.7;
  const double v = quad([&](double y) { return heat_kernel(s, x - y) * heat_kernel(t, y); }, -INFINITY, INFINITY,
                        {1e-14, 1e-12, 4000})
                       .value;
  EXPECT_NEAR(v, heat_kernel(s + t, x), 1e-12);
}

TEST(BridgeKernel, VarianceAndDomain) {
  EXPECT_DOUBLE_EQ(bridge_variance(0.25, 1.0), 0.1875);
  EXPECT_THROW(bridge_kernel(0.0, 1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(bridge_kernel(1.0, 1.0, 0.0, 0.0), DomainError);
}

TEST(BridgeKernel, IsADensityInY) {
  const double s = 0.4, t = 1.3, x = 0.8;
  const double mass = quad([&](double y) { return bridge_kernel(s, t, y, x); }, -INFINITY, INFINITY).value;
  const double mean = quad([&](double y) { return y * bridge_kernel(s, t, y, x); }, -INFINITY, INFINITY).value;
  EXPECT_NEAR(mass, 1.0, 1e-10);
  EXPECT_NEAR(mean, s * x / t, 1e-10);
}

TEST(BridgeKernel, FactorsThroughHeatKernels) {
  const CheckResult r = verify::bridge_identity(10000, 11);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_LT(r.value, 1e-12);
}
