#pragma once

// Exact-in-law sampler for the proxy averages (G_{N,t_1}, ..., G_{N,t_k}).
//
// G_{N,t} is linear in the noise, so the noise of one time layer n enters
// the vector of averages through a Gaussian k-vector with covariance
//   M_n[a][b] = w_n / N^2 * int int_{[0,N]^2} p_{S_a + S_b}(r_a x - r_b y) dx dy,
// S_a = t_n (t_a - t_n)/t_a, r_a = t_n/t_a (only layers with t_n < t_a, t_b).
// The spatial integral is closed form, so the space lattice disappears and
// one replica costs k normals per layer instead of a full field solve.  The
// time layers and weights are those of the field solver.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pamlab/gaussian.hpp"
#include "pamlab/noise.hpp"
#include "pamlab/solver.hpp"

namespace pamlab {

class ProjectedProxySampler {
 public:
  ProjectedProxySampler(const SolverConfig& cfg, double N, std::vector<double> times) : grid_(cfg.grid), N_(N) {
    cfg.grid.validate();
    if (!(N >= cfg.grid.dx) || !std::isfinite(N)) throw DomainError("projected sampler: N must be >= dx");
    Observation obs;
    obs.times = std::move(times);
    obs.scales = {N};
    const Plan plan = make_plan(cfg, obs);
    times_ = plan.obs.times;
    const std::size_t k = times_.size();
    cov_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t n = 0; n + 1 < plan.grid.t.size(); ++n) {
      const double s = plan.grid.t[n];
      std::size_t first = 0;
      while (first < k && times_[first] <= s * (1.0 + 1e-12)) ++first;
      if (first == k) break;
      const auto m = static_cast<Eigen::Index>(k - first);
      Eigen::MatrixXd M(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) {
          const double ta = times_[first + static_cast<std::size_t>(a)];
          const double tb = times_[first + static_cast<std::size_t>(b)];
          const double var = s * (ta - s) / ta + s * (tb - s) / tb;
          M(a, b) = M(b, a) = plan.grid.weight[n] * box_heat_integral(var, s / ta, s / tb, N) / (N * N);
        }
      cov_.bottomRightCorner(m, m) += M;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      if (es.info() != Eigen::Success) throw NumericalError("projected sampler: eigendecomposition failed");
      Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      layers_.push_back({static_cast<std::int64_t>(n), first, es.eigenvectors() * root.asDiagonal()});
    }
  }

  const std::vector<double>& times() const { return times_; }
  double N() const { return N_; }

  /// Exact covariance of the sampled vector (sum of the layer covariances).
  const Eigen::MatrixXd& covariance() const { return cov_; }

  /// One replica: G_{N,t_a} for every time.
  std::vector<double> sample(std::uint64_t seed, std::uint64_t replica) const {
    const NoiseSlab noise(grid_, seed, replica);
    std::vector<double> out(times_.size(), 0.0);
    Eigen::VectorXd z;
    for (const auto& L : layers_) {
      const auto m = L.factor.rows();
      z.resize(m);
      noise.fill(L.n, 0, static_cast<std::size_t>(m), z.data(), NoiseStream::projected);
      const Eigen::VectorXd g = L.factor * z;
      for (Eigen::Index a = 0; a < m; ++a) out[L.first + static_cast<std::size_t>(a)] += g(a);
    }
    return out;
  }

  /// Replicas [first, first + count), [replica][time].
  std::vector<std::vector<double>> run(std::uint64_t seed, std::uint64_t first, std::uint64_t count) const {
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) out.push_back(sample(seed, first + r));
    return out;
  }

 private:
  struct LayerFactor {
    std::int64_t n;
    std::size_t first;  // index of the first active time
    Eigen::MatrixXd factor;
  };

  GridSpec grid_;
  double N_;
  std::vector<double> times_;
  std::vector<LayerFactor> layers_;
  Eigen::MatrixXd cov_;
};

}  // namespace pamlab
