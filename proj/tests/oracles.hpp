// SPDX-License-Identifier: Apache-2.0

// Brute-force reference computations used only by tests. Nothing here calls
// into the library's quantization paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "blockdialect/formatbook.hpp"

namespace oracle {

// Index of the value of `values` (half units) closest to quarter code q;
// equidistant candidates resolve to the larger value.
inline int nearest_index(int q, const std::array<std::uint8_t, 8>& values) {
  int best = 0;
  int best_dist = std::numeric_limits<int>::max();
  for (int i = 0; i < 8; ++i) {
    const int dist = std::abs(q - 2 * values[static_cast<std::size_t>(i)]);
    if (dist <= best_dist) {  // later (larger) values win ties
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

inline int squared_error(int q, const std::array<std::uint8_t, 8>& values) {
  const int d = q - 2 * values[static_cast<std::size_t>(nearest_index(q, values))];
  return d * d;
}

// Nearest multiple of 0.5 to q/4, ties upward, clamped at 7.5; in half units.
inline int real_round_to_half(int q) {
  const double x = q / 4.0;
  const double r = std::floor(x * 2.0 + 0.5);
  return static_cast<int>(std::min(r, 15.0));
}

struct GridPoint {
  double value;
  std::uint32_t code;
};

// Every finite non-negative value of a sign/exponent/mantissa format,
// decoded straight from the field definitions.
inline std::vector<GridPoint> enumerate_format(int exp_bits, int mant_bits, int bias, bool e4m3_nan_rule) {
  std::vector<GridPoint> out;
  const std::uint32_t max_exp = (1u << exp_bits) - 1;
  for (std::uint32_t e = 0; e <= max_exp; ++e) {
    for (std::uint32_t m = 0; m < (1u << mant_bits); ++m) {
      if (e4m3_nan_rule && e == max_exp && m == (1u << mant_bits) - 1) continue;
      if (!e4m3_nan_rule && exp_bits == 5 && e == max_exp) continue;  // binary16 inf/nan
      const double frac = static_cast<double>(m) / static_cast<double>(1u << mant_bits);
      const double v = e == 0 ? frac * std::pow(2.0, 1 - bias) : (1.0 + frac) * std::pow(2.0, static_cast<int>(e) - bias);
      out.push_back({v, (e << mant_bits) | m});
    }
  }
  std::sort(out.begin(), out.end(), [](const GridPoint& a, const GridPoint& b) { return a.value < b.value; });
  return out;
}

// Round-to-nearest-even of |x| by scanning the grid; ties pick the code
// with a zero mantissa LSB. Returns the grid point or the top point when
// |x| exceeds it (saturation).
inline GridPoint nearest_even(double mag, const std::vector<GridPoint>& grid) {
  const GridPoint* best = &grid.front();
  for (const auto& p : grid) {
    const double d = std::abs(mag - p.value);
    const double bd = std::abs(mag - best->value);
    if (d < bd || (d == bd && (p.code & 1u) == 0 && (best->code & 1u) == 1)) best = &p;
  }
  return *best;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace oracle
