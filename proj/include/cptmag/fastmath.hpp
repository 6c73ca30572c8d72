#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace cptmag {

// Branchless exp for hot likelihood loops. Relative error < 1e-12 on
// [-700, 700]; exact 0 below -707 so dead tails multiply as cheap zeros
// instead of denormals. Auto-vectorizes under AVX2 (int32 exponent path).
inline double fast_exp(double x) {
  const bool dead = x < -707.0;
  double xc = x < -707.0 ? -707.0 : x;
  xc = xc > 707.0 ? 707.0 : xc;
  constexpr double inv_ln2 = 1.4426950408889634074;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  const double k = std::floor(xc * inv_ln2 + 0.5);
  const double r = (xc - k * ln2_hi) - k * ln2_lo;
  // exp(r) Taylor to r^10, |r| <= ln2/2.
  double p = 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const auto ki = static_cast<std::int32_t>(k);  // |k| <= 1021
  const double scale =
      std::bit_cast<double>((static_cast<std::int64_t>(ki) + 1023) << 52);
  return dead ? 0.0 : p * scale;
}

// Trapezoidal weight for index i on a uniform n-point grid of spacing h.
inline double trapz_weight(std::size_t i, std::size_t n, double h) {
  return (i == 0 || i + 1 == n) ? 0.5 * h : h;
}

}  // namespace cptmag
