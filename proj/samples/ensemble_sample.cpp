// Spatial averages of the Gaussian proxy and of the parabolic Anderson model
// at a few box sizes, next to the oracle variances.
//
//   ensemble_sample [replicas] [seed]

#include <cstdio>
#include <cstdlib>

#include "pamlab/stats.hpp"

int main(int argc, char** argv) {
  const std::uint64_t replicas = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 256;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2024;
  const double t = 0.5;
  const std::vector<double> Ns = {10, 20, 40};

  std::printf("%-15s %6s %14s %14s %10s\n", "field", "N", "Var S (MC)", "oracle", "z");
  for (auto kind : {pamlab::FieldKind::gaussian_proxy, pamlab::FieldKind::pam}) {
    const auto e = pamlab::simulate_averages({t}, Ns, replicas, seed, kind);
    for (std::size_t s = 0; s < Ns.size(); ++s) {
      const auto st = pamlab::describe(e.at(0, s));
      const double v = st.variance;
      const double o = pamlab::var_avg({Ns[s], t, kind});
      std::printf("%-15s %6.0f %14.6e %14.6e %10.3f\n", pamlab::to_string(kind), Ns[s], v, o,
                  (v - o) / st.variance_se);
    }
  }
  return 0;
}
