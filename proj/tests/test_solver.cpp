#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pamlab/proxy_sampler.hpp"
#include "pamlab/scheme_moments.hpp"
#include "pamlab/solver.hpp"
#include "pamlab/stats.hpp"

using namespace pamlab;

namespace {

SolverConfig small_config(double N = 4.0, double t_max = 0.5) { return SolverConfig::for_window(N, t_max, 2e-3, 2e-2); }

Observation averages(std::vector<double> times, std::vector<double> scales) {
  Observation o;
  o.times = std::move(times);
  o.scales = std::move(scales);
  return o;
}

}  // namespace

TEST(TimeGrid, GradedHitsAnchorsWithBoundedSteps) {
  const double dt = 1e-3;
  const TimeGrid g = make_time_grid(dt, 1e-2, {0.25, 0.5, 1.0}, TimeGridKind::graded);
  for (double a : {0.25, 0.5, 1.0}) EXPECT_EQ(g.t[g.index_of(a)], a);
  EXPECT_EQ(g.t.front(), 1e-10);
  for (std::size_t n = 0; n + 1 < g.t.size(); ++n) {
    const double step = g.t[n + 1] - g.t[n];
    EXPECT_GT(step, 0.0);
    EXPECT_LE(step, 1.5 * dt + 1e-15);
    if (g.t[n] > 0.01) {
      EXPECT_GE(step, 0.5 * dt - 1e-15);
    }
    EXPECT_GT(g.weight[n], 0.0);
  }
  // trapezoid weights sum to t_M - t_0/... up to the half step at the top
  double w = 0.0;
  for (double v : g.weight) w += v;
  EXPECT_NEAR(w, 1.0 - 0.5 * (g.t.back() - g.t[g.t.size() - 2]), 1e-12);
}

TEST(TimeGrid, UniformNeedsMultiplesOfDt) {
  EXPECT_THROW(make_time_grid(1e-3, 1e-2, {0.2505}, TimeGridKind::uniform), DomainError);
  const TimeGrid g = make_time_grid(1e-3, 1e-2, {0.25}, TimeGridKind::uniform);
  EXPECT_EQ(g.t.size(), 250u);
  EXPECT_EQ(g.t.back(), 0.25);
}

TEST(TimeGrid, LatticeLevelResolvesStepVariance) {
  EXPECT_EQ(lattice_level(1.0, 1e-2), 0);
  const int l = lattice_level(1e-8, 1e-2);
  const double h = std::ldexp(1e-2, -l);
  EXPECT_GE(1e-8, 4.0 * h * h);
  EXPECT_LT(1e-8, 16.0 * h * h);
}

TEST(Solver, ZeroNoiseIsHeatFlow) {
  SolverConfig cfg = small_config(4.0, 0.5);
  const auto slices = solve_pam(cfg, silent_noise(cfg.grid), {0.1, 0.5});
  for (const auto& s : slices) {
    for (std::size_t i = 0; i < s.xs.size(); i += 7) {
      if (std::abs(s.xs[i]) > 3.0 * std::sqrt(s.t)) continue;
      const double p = heat_kernel(s.t, s.xs[i]);
      EXPECT_NEAR(s.values[i] / p, 1.0, 1e-3) << "t=" << s.t << " x=" << s.xs[i];
    }
  }
  const FieldSlice U = solve_renormalized(cfg, silent_noise(cfg.grid), 0.5, 0.0, 4.0);
  for (double v : U.values) EXPECT_NEAR(v, 1.0, 1e-3);
}

TEST(Solver, RenormalizeInvertsProduct) {
  SolverConfig cfg = small_config(2.0, 0.25);
  const NoiseSlab noise = make_noise(cfg.grid, 5, 0);
  const FieldSlice u = solve_pam(cfg, noise, {0.25}).front();
  const FieldSlice U = solve_renormalized(cfg, noise, 0.25, 0.0, 2.0);
  const FieldSlice back = renormalize(u);
  for (std::size_t i = 0; i < U.xs.size(); i += 5) {
    const auto k = static_cast<std::size_t>(std::llround((U.xs[i] - back.xs.front()) / cfg.grid.dx));
    EXPECT_NEAR(back.values[k], U.values[i], 1e-12 * std::max(1.0, std::abs(U.values[i])));
  }
}

TEST(Solver, EnsembleIsDeterministicAndWorkerIndependent) {
  const SolverConfig cfg = small_config();
  const Plan plan = make_plan(cfg, averages({0.25, 0.5}, {2.0, 4.0}));
  const auto a = run_ensemble(cfg, plan, FieldKind::pam, 42, 0, 40, 1);
  const auto b = run_ensemble(cfg, plan, FieldKind::pam, 42, 0, 40, 3);
  const auto c = run_ensemble(cfg, plan, FieldKind::pam, 43, 0, 40, 1);
  ASSERT_EQ(a.size(), 40u);
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].averages, b[r].averages);
    EXPECT_NE(a[r].averages, c[r].averages);
  }
}

TEST(Solver, ReplicaDoesNotDependOnBatch) {
  const SolverConfig cfg = small_config();
  const Plan plan = make_plan(cfg, averages({0.5}, {4.0}));
  const auto all = run_ensemble(cfg, plan, FieldKind::pam, 9, 0, 20, 1);
  const auto one = run_ensemble(cfg, plan, FieldKind::pam, 9, 17, 1, 1);
  EXPECT_EQ(one[0].replica, 17u);
  EXPECT_EQ(one[0].averages, all[17].averages);
}

TEST(Solver, TruncationMarginBarelyMatters) {
  SolverConfig a = small_config(4.0, 0.5), b = a;
  b.truncation_margin *= 1.5;
  b.grid.x_min = -b.truncation_margin;
  b.grid.x_max = 4.0 + b.truncation_margin;
  const Observation obs = averages({0.5}, {4.0});
  const auto ra = run_ensemble(a, make_plan(a, obs), FieldKind::pam, 3, 0, 16, 1);
  const auto rb = run_ensemble(b, make_plan(b, obs), FieldKind::pam, 3, 0, 16, 1);
  for (std::size_t r = 0; r < ra.size(); ++r)
    EXPECT_NEAR(ra[r].averages[0], rb[r].averages[0], 1e-6) << r;
}

TEST(Solver, MeanPreserved) {
  const SolverConfig cfg = small_config();
  const Plan plan = make_plan(cfg, averages({0.5}, {4.0}));
  for (auto kind : {FieldKind::pam, FieldKind::gaussian_proxy}) {
    const auto recs = run_ensemble(cfg, plan, kind, 11, 0, 512);
    std::vector<double> s;
    for (const auto& r : recs) s.push_back(r.averages[0]);
    const SampleStats st = describe(s);
    EXPECT_LT(std::abs(st.mean), 4.0 * st.stderr_mean) << to_string(kind);
  }
}

TEST(Solver, VarianceMatchesSchemeMoments) {
  const SolverConfig cfg = small_config();
  const Plan plan = make_plan(cfg, averages({0.5}, {4.0}));
  for (auto kind : {FieldKind::pam, FieldKind::gaussian_proxy}) {
    const auto recs = run_ensemble(cfg, plan, kind, 12, 0, 1024);
    std::vector<double> s;
    for (const auto& r : recs) s.push_back(r.averages[0]);
    const SampleStats st = describe(s);
    const SchemeMoments sm = scheme_moments(cfg, {0.5}, {4.0}, kind);
    EXPECT_LT(std::abs(st.variance - sm.var_avg[0]), 4.0 * st.variance_se) << to_string(kind);
  }
}

TEST(SchemeMoments, BiasShrinksUnderRefinement) {
  double prev = INFINITY;
  for (double f : {1.0, 0.5, 0.25}) {
    const SolverConfig cfg = SolverConfig::for_window(0.0, 0.5, 4e-3 * f, 4e-2 * f);
    const SchemeMoments sm = scheme_moments(cfg, {0.5}, {}, FieldKind::pam);
    const double exact = second_moment_u(0.5, 0.0);
    const double bias = std::abs(sm.second_moment_u0(0) - exact) / exact;
    EXPECT_LT(bias, prev) << "f=" << f;
    prev = bias;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(ProjectedSampler, CovarianceCloseToOracle) {
  const double N = 20.0;
  const SolverConfig cfg = SolverConfig::for_window(N, 1.0);
  const ProjectedProxySampler ps(cfg, N, {0.5, 1.0});
  const auto& C = ps.covariance();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double o = cov_avg(N, ps.times()[i], ps.times()[j], {}, FieldKind::gaussian_proxy);
      EXPECT_NEAR(C(i, j) / o, 1.0, 0.05) << i << j;
    }
  EXPECT_EQ(ps.sample(1, 4), ps.sample(1, 4));
  EXPECT_NE(ps.sample(1, 4), ps.sample(1, 5));
}

TEST(Solver, RejectsBadRequests) {
  const SolverConfig cfg = small_config();
  Observation o = averages({0.5}, {4.005});
  EXPECT_THROW(make_plan(cfg, o), DomainError);
  o = averages({0.6}, {4.0});
  EXPECT_THROW(make_plan(cfg, o), DomainError);
  o = averages({0.5}, {});
  o.probes = {0.013};
  EXPECT_THROW(make_plan(cfg, o), DomainError);
  SolverConfig narrow = cfg;
  narrow.grid.x_max = 3.0;
  EXPECT_THROW(narrow.validate(4.0), ConfigError);
  narrow = cfg;
  narrow.truncation_margin = 1.0;
  EXPECT_THROW(narrow.validate(), ConfigError);
  EXPECT_THROW(sample_gaussian_proxy(cfg, silent_noise(cfg.grid), 0.5, {0.013}), DomainError);
}

TEST(SpatialAverage, TrapezoidOnKnownSlice) {
  FieldSlice s;
  s.kind = SliceKind::U;
  for (int i = -2; i <= 12; ++i) {
    s.xs.push_back(0.5 * i);
    s.values.push_back(1.0 + 0.5 * i);  // U - 1 = x
  }
  EXPECT_NEAR(spatial_average(s, 5.0), 2.5, 1e-14);
  EXPECT_THROW(spatial_average(s, 5.2), DomainError);
  s.kind = SliceKind::u;
  EXPECT_THROW(spatial_average(s, 5.0), DomainError);
}
