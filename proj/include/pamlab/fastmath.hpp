#pragma once

// Branch-free exp and log for loops the compiler should vectorize.
// Accuracy about 2 ulp on the ranges used here.

#include <bit>
#include <cmath>
#include <cstdint>

namespace pamlab::fast {

/// e^x for x in [-708, 0.5 log(DBL_MAX)]; smaller x is clamped.
inline double exp(double x) {
  x = x < -708.0 ? -708.0 : x;
  constexpr double log2e = 1.4426950408889634074;
  constexpr double ln2_hi = 6.93147180369123816490e-01, ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52
  const double t = std::fma(x, log2e, shifter);
  const double n = t - shifter;
  const std::int64_t ni = std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(shifter);
  const double r = std::fma(-n, ln2_lo, std::fma(-n, ln2_hi, x));
  double p = 1.0 / 479001600.0;  // 1/12!
  p = std::fma(p, r, 1.0 / 39916800.0);
  p = std::fma(p, r, 1.0 / 3628800.0);
  p = std::fma(p, r, 1.0 / 362880.0);
  p = std::fma(p, r, 1.0 / 40320.0);
  p = std::fma(p, r, 1.0 / 5040.0);
  p = std::fma(p, r, 1.0 / 720.0);
  p = std::fma(p, r, 1.0 / 120.0);
  p = std::fma(p, r, 1.0 / 24.0);
  p = std::fma(p, r, 1.0 / 6.0);
  p = std::fma(p, r, 0.5);
  p = std::fma(p, r, 1.0);
  p = std::fma(p, r, 1.0);
  const double scale = std::bit_cast<double>((ni + 1023) << 52);
  return p * scale;
}

/// Natural log for normal positive x.
inline double log(double x) {
  // shift so the mantissa lands in [sqrt(2)/2, sqrt(2))
  constexpr std::uint64_t kOff = 0x3FF0000000000000ull - 0x3FE6A09E667F3BCDull;
  const std::uint64_t u = std::bit_cast<std::uint64_t>(x) + kOff;
  const auto e = static_cast<std::int64_t>(u >> 52) - 1023;
  const double m = std::bit_cast<double>((u & 0x000FFFFFFFFFFFFFull) + 0x3FE6A09E667F3BCDull);
  const double f = m - 1.0;
  const double s = f / (2.0 + f);
  const double z = s * s;
  double p = 1.0 / 23.0;
  p = std::fma(p, z, 1.0 / 21.0);
  p = std::fma(p, z, 1.0 / 19.0);
  p = std::fma(p, z, 1.0 / 17.0);
  p = std::fma(p, z, 1.0 / 15.0);
  p = std::fma(p, z, 1.0 / 13.0);
  p = std::fma(p, z, 1.0 / 11.0);
  p = std::fma(p, z, 1.0 / 9.0);
  p = std::fma(p, z, 1.0 / 7.0);
  p = std::fma(p, z, 1.0 / 5.0);
  p = std::fma(p, z, 1.0 / 3.0);
  p = std::fma(p, z, 1.0);
  constexpr double ln2_hi = 6.93147180369123816490e-01, ln2_lo = 1.90821492927058770002e-10;
  const double ed = static_cast<double>(e);
  return std::fma(ed, ln2_hi, std::fma(2.0 * s, p, ed * ln2_lo));
}

}  // namespace pamlab::fast
