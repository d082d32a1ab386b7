#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pamlab/stats.hpp"

using namespace pamlab;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(gen);
  return x;
}

// exact normal quantiles at (i + 1/2)/n
std::vector<double> quantile_sample(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = inverse_normal_cdf((i + 0.5) / n);
  return x;
}

}  // namespace

TEST(Describe, KnownValues) {
  const SampleStats s = describe({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.stderr_mean, std::sqrt(5.0 / 12.0));
  EXPECT_THROW(describe({1.0}), DomainError);
}

TEST(Bootstrap, AgreesWithNormalTheory) {
  const auto x = normal_sample(2000, 1);
  const SampleStats s = describe(x);
  const double b = bootstrap_variance_se(x, 400, 2);
  EXPECT_NEAR(b / s.variance_se, 1.0, 0.15);
  EXPECT_EQ(b, bootstrap_variance_se(x, 400, 2));
}

TEST(KsNormal, QuantileSampleHasMinimalStatistic) {
  const auto x = quantile_sample(1000);
  const NormalitySummary r = ks_normal(x, 0.0, 1.0);
  EXPECT_NEAR(r.ks_stat, 0.5 / 1000, 1e-8);
  EXPECT_TRUE(r.passes());
  EXPECT_NEAR(r.ks_critical_1pct, 1.6276 / std::sqrt(1000.0), 1e-15);
}

TEST(KsNormal, DetectsWrongScaleAndShift) {
  const auto x = quantile_sample(2000);
  // Sup |Phi(x/2) - Phi(x)| at x = 2 sqrt(log 4 / 3)
  const double xs = 2.0 * std::sqrt(std::log(4.0) / 3.0);
  EXPECT_NEAR(ks_normal(x, 0.0, 4.0).ks_stat, norm_cdf(xs) - norm_cdf(xs / 2.0), 1e-3);
  EXPECT_FALSE(ks_normal(x, 0.3, 1.0).passes());
}

TEST(KsNormal, GaussianSamplesPassAtNominalRate) {
  int fails = 0;
  for (std::uint64_t s = 0; s < 200; ++s) fails += !ks_normal(normal_sample(500, 100 + s), 0.0, 1.0).passes();
  EXPECT_LE(fails, 8);  // 1% of 200 is 2
}

TEST(KsNormal, Errors) {
  EXPECT_THROW(ks_normal({1, 2, 3}, 0.0, 1.0), DomainError);
  EXPECT_THROW(ks_normal(std::vector<double>(20, 1.0), 0.0, 1.0), DomainError);
  EXPECT_THROW(ks_normal(quantile_sample(20), 0.0, 0.0), DomainError);
}

TEST(Covariance, RecoversStructure) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> d;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 20000; ++i) {
    const double a = d(gen), b = d(gen), c = d(gen);
    rows.push_back({a, a + b, 2.0 * b + c});
  }
  const CovarianceEstimate c = covariance_estimate(rows);
  const double expect[3][3] = {{1, 1, 0}, {1, 2, 2}, {0, 2, 5}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(c.at(i, j), c.at(j, i));
      EXPECT_NEAR(c.at(i, j), expect[i][j], 4.0 * c.se_at(i, j));
    }
  EXPECT_GT(min_eigenvalue(c.cov, 3), 0.0);
  EXPECT_NEAR(min_eigenvalue({2, 1, 1, 2}, 2), 1.0, 1e-14);
  EXPECT_THROW(covariance_estimate({{1.0, 2.0}, {1.0}}), DomainError);
}

TEST(Monotone, SlackRule) {
  EXPECT_TRUE(monotone_with_slack({3, 2, 1}, {0.1, 0.1, 0.1}, Direction::decreasing));
  EXPECT_TRUE(monotone_with_slack({3, 3.05, 1}, {0.1, 0.1, 0.1}, Direction::decreasing));
  EXPECT_FALSE(monotone_with_slack({3, 3.5, 1}, {0.1, 0.1, 0.1}, Direction::decreasing));
  EXPECT_FALSE(monotone_with_slack({3, 3.05, 1, 1.05}, {0.1, 0.1, 0.1, 0.1}, Direction::decreasing));
  EXPECT_TRUE(strictly_monotone({1, 2, 3}, Direction::increasing));
  EXPECT_FALSE(strictly_monotone({1, 2, 2}, Direction::increasing));
}

TEST(Roughness, ValuesAndDomain) {
  EXPECT_NEAR(roughness_value(0.1, 0.01), 0.01 / (0.01 * std::log(100.0)), 1e-15);
  EXPECT_NO_THROW(roughness_value(0.1, 1.0 / std::numbers::e));
  EXPECT_THROW(roughness_value(0.1, 0.5), DomainError);
  AveragePath p{10.0, 0, {0.01, 0.1}, {0.2, 0.1}};
  const RoughnessSeries r = roughness_series(p, {0.01, 0.1});
  EXPECT_EQ(r.values.size(), 2u);
  EXPECT_EQ(r.running_max[1], std::max(r.values[0], r.values[1]));
  EXPECT_THROW(roughness_series(p, {0.05}), DomainError);
}

TEST(PaleyZygmund, BoundHoldsForChiSquare) {
  auto x = normal_sample(20000, 9);
  for (double& v : x) v *= v;
  const PaleyZygmund p = paley_zygmund(x);
  // chi-square(1): E Z = 1, E Z^2 = 3, P(Z >= 1/2) = 2 P(N > 0.7071)
  EXPECT_NEAR(p.bound, 1.0 / 12.0, 0.01);
  EXPECT_NEAR(p.frequency, 2.0 * norm_sf(std::sqrt(0.5)), 4.0 * p.frequency_se);
  EXPECT_TRUE(p.holds());
  EXPECT_THROW(paley_zygmund({1.0, -1.0}), DomainError);
}

TEST(FddFromSamples, ScalesByNOverLogN) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({std::sin(i * 1.0), std::cos(i * 0.7)});
  const FddResult r = fdd_from_samples(100.0, {0.5, 1.0}, rows, FieldKind::gaussian_proxy);
  const CovarianceEstimate c = covariance_estimate(rows);
  EXPECT_NEAR(r.emp[1], c.at(0, 1) * 100.0 / std::log(100.0), 1e-14);
  EXPECT_EQ(r.limit[1], 1.0);
  EXPECT_EQ(r.limit[3], 2.0);
  EXPECT_NEAR(r.oracle[0], var_avg({100.0, 0.5, FieldKind::gaussian_proxy}) * 100.0 / std::log(100.0), 1e-12);
}

TEST(Ensemble, SmallProxySweepIsConsistent) {
  SimulationSettings sim;
  sim.dt = 2e-3;
  sim.dx = 2e-2;
  const AverageEnsemble e = simulate_averages({0.25, 0.5}, {4.0, 8.0}, 256, 5, FieldKind::gaussian_proxy, sim);
  ASSERT_EQ(e.values.size(), 2u);
  ASSERT_EQ(e.at(1, 1).size(), 256u);
  EXPECT_EQ(e.negatives, 0u);
  const SweepResult r = sweep_from_ensemble(e, 1, FieldKind::gaussian_proxy);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(r.var_ratio[i] - r.oracle_ratio[i]), 4.0 * r.var_ratio_se[i] + 0.05 * r.oracle_ratio[i]);
    EXPECT_LT(r.ks[i], r.ks_critical[i]);
  }
  const ErgodicResult g = ergodic_from_ensemble(e, 1, FieldKind::gaussian_proxy, sim);
  EXPECT_LT(g.rms[1], g.rms[0]);
  EXPECT_NEAR(g.scheme_rms[0] / g.oracle_rms[0], 1.0, 0.05);
  EXPECT_NEAR(g.A[0], g.rms[0] / ergodic_envelope(4.0, 0.5), 1e-15);
}

TEST(Ensemble, Errors) {
  EXPECT_THROW(clt_sweep(0.5, {50.0, 20.0}, 200, 1, FieldKind::pam), DomainError);
  EXPECT_THROW(clt_sweep(0.5, {50.0}, 50, 1, FieldKind::pam), DomainError);
  EXPECT_THROW(local_check({0.5}, 10.0, 10, 1, FieldKind::gaussian_proxy), DomainError);
  EXPECT_THROW(fdd_check({0.5}, 10.0, 10, 1, FieldKind::pam, {}, ProxyRoute::projected), DomainError);
  SimulationSettings bad;
  bad.fixed = SolverConfig::for_window(10.0, 0.5);
  EXPECT_THROW(simulate_averages({0.5}, {20.0}, 4, 1, FieldKind::pam, bad), ConfigError);
}
