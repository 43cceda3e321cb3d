// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace blockdialect {

/// Binary floating-point format with subnormals, described by its mantissa
/// width and exponent range. Encodings are sign | exponent | mantissa.
struct MinifloatFormat {
  int exponent_bits;
  int mantissa_bits;
  int min_normal_exponent;  // unbiased exponent of the smallest normal
  double max_finite;

  constexpr int bias() const { return 1 - min_normal_exponent; }
  constexpr int bits() const { return 1 + exponent_bits + mantissa_bits; }
};

// FP4 E2M1: {0, 0.5, 1, 1.5, 2, 3, 4, 6}.
inline constexpr MinifloatFormat kFp4E2M1{2, 1, 0, 6.0};
// FP8 E4M3 (OCP "FN" flavour): max 448, no infinities.
inline constexpr MinifloatFormat kFp8E4M3{4, 3, -6, 448.0};
// IEEE 754 binary16.
inline constexpr MinifloatFormat kBinary16{5, 10, -14, 65504.0};

enum class Overflow { saturate, infinity };

/// Round-to-nearest-even onto the grid of `fmt`. Magnitudes beyond the
/// largest finite value saturate or become infinite per `overflow`.
/// NaN passes through.
double round_to_format(double x, const MinifloatFormat& fmt, Overflow overflow);

/// Encodes a value already on the grid of `fmt` (finite, |x| <= max).
std::uint32_t encode_exact(double x, const MinifloatFormat& fmt);
/// Decodes a finite encoding of `fmt`.
double decode(std::uint32_t bits, const MinifloatFormat& fmt);

inline double fp16_round(double x) { return round_to_format(x, kBinary16, Overflow::infinity); }

inline std::uint8_t fp4_encode(double x) {
  return static_cast<std::uint8_t>(encode_exact(round_to_format(x, kFp4E2M1, Overflow::saturate), kFp4E2M1));
}
inline double fp4_decode(std::uint8_t nibble) { return decode(nibble & 0xFu, kFp4E2M1); }

inline std::uint8_t e4m3_encode(double x) {
  return static_cast<std::uint8_t>(encode_exact(round_to_format(x, kFp8E4M3, Overflow::saturate), kFp8E4M3));
}
/// The 0x7F/0xFF patterns are NaN in E4M3 and rejected with std::domain_error.
double e4m3_decode(std::uint8_t bits);

}  // namespace blockdialect
