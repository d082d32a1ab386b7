#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

#include "pamlab/fastmath.hpp"

namespace pamlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter round(Counter c, Key k) {
    constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    const std::uint64_t p0 = M0 * c[0];
    const std::uint64_t p1 = M1 * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  static Counter generate(Counter c, Key k) {
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k[0] += W0;
        k[1] += W1;
      }
      c = round(c, k);
    }
    return c;
  }
};

/// Inverse standard normal CDF, Acklam's rational approximation
/// (relative error below 1.2e-9 on (0,1)).  Branch-free so that loops over
/// it vectorize; both branches are evaluated and one is selected.
inline double inverse_normal_cdf(double p) {
  constexpr double a0 = -3.969683028665376e+01, a1 = 2.209460984245205e+02, a2 = -2.759285104469687e+02,
                   a3 = 1.383577518672690e+02, a4 = -3.066479806614716e+01, a5 = 2.506628277459239e+00;
  constexpr double b0 = -5.447609879822406e+01, b1 = 1.615858368580409e+02, b2 = -1.556989798598866e+02,
                   b3 = 6.680131188771972e+01, b4 = -1.328068155288572e+01;
  constexpr double c0 = -7.784894002430293e-03, c1 = -3.223964580411365e-01, c2 = -2.400758277161838e+00,
                   c3 = -2.549732539343734e+00, c4 = 4.374664141464968e+00, c5 = 2.938163982698783e+00;
  constexpr double d0 = 7.784695709041462e-03, d1 = 3.224671290700398e-01, d2 = 2.445134137142996e+00,
                   d3 = 3.754408661907416e+00;
  constexpr double p_low = 0.02425;
  const double q = p - 0.5;
  const double r = q * q;
  double num = std::fma(std::fma(std::fma(std::fma(std::fma(a0, r, a1), r, a2), r, a3), r, a4), r, a5);
  double den = std::fma(std::fma(std::fma(std::fma(std::fma(b0, r, b1), r, b2), r, b3), r, b4), r, 1.0);
  const double central = num * q / den;
  const double tail_p = 0.5 - std::abs(q);  // = min(p, 1 - p), exactly
  const double t = std::sqrt(-2.0 * fast::log(tail_p));
  num = std::fma(std::fma(std::fma(std::fma(std::fma(c0, t, c1), t, c2), t, c3), t, c4), t, c5);
  den = std::fma(std::fma(std::fma(std::fma(d0, t, d1), t, d2), t, d3), t, 1.0);
  const double tail = std::copysign(num / den, q);
  // bitwise select keeps the loop free of branches
  const std::uint64_t mask = std::uint64_t{0} - static_cast<std::uint64_t>(tail_p < p_low);
  return std::bit_cast<double>((std::bit_cast<std::uint64_t>(tail) & mask) |
                               (std::bit_cast<std::uint64_t>(central) & ~mask));
}

/// 32-bit word to a normal deviate through the midpoint uniform (k + 1/2)/2^32.
inline double normal_from_bits(std::uint32_t k) {
  return inverse_normal_cdf((static_cast<double>(k) + 0.5) * 0x1p-32);
}

/// Normals for counters {first + b, w1, w2, w3}, b = 0..kBlockChunk-1, written
/// four per counter.  Fixed-size so every value comes from the same code.
inline constexpr int kBlockChunk = 16;

inline void philox_normals(std::uint32_t first, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3,
                           Philox4x32::Key key, double* out /* 4 * kBlockChunk */) {
  constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  alignas(64) std::uint32_t c0[kBlockChunk], c1[kBlockChunk], c2[kBlockChunk], c3[kBlockChunk];
  for (int i = 0; i < kBlockChunk; ++i) {
    c0[i] = first + static_cast<std::uint32_t>(i);
    c1[i] = w1;
    c2[i] = w2;
    c3[i] = w3;
  }
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += W0;
      k1 += W1;
    }
    for (int i = 0; i < kBlockChunk; ++i) {
      const std::uint64_t p0 = M0 * c0[i];
      const std::uint64_t p1 = M1 * c2[i];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[i] ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[i] ^ k1;
      c1[i] = static_cast<std::uint32_t>(p1);
      c3[i] = static_cast<std::uint32_t>(p0);
      c0[i] = n0;
      c2[i] = n2;
    }
  }
  alignas(64) double u[4 * kBlockChunk];
  for (int i = 0; i < kBlockChunk; ++i) {
    u[4 * i + 0] = (static_cast<double>(c0[i]) + 0.5) * 0x1p-32;
    u[4 * i + 1] = (static_cast<double>(c1[i]) + 0.5) * 0x1p-32;
    u[4 * i + 2] = (static_cast<double>(c2[i]) + 0.5) * 0x1p-32;
    u[4 * i + 3] = (static_cast<double>(c3[i]) + 0.5) * 0x1p-32;
  }
  for (int i = 0; i < 4 * kBlockChunk; ++i) out[i] = inverse_normal_cdf(u[i]);
}

}  // namespace pamlab
