// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/minifloat.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace blockdialect {

double round_to_format(double x, const MinifloatFormat& fmt, Overflow overflow) {
  if (std::isnan(x) || x == 0.0) return x;
  const double mag = std::abs(x);
  double rounded = 0.0;
  if (std::isinf(mag)) {
    rounded = mag;
  } else {
    const int exp = std::max(std::ilogb(mag), fmt.min_normal_exponent);
    // Spacing of the grid in this binade (subnormals share the lowest one).
    const int quantum_exp = exp - fmt.mantissa_bits;
    // Scaling by a power of two is exact; nearbyint rounds half to even
    // under the default rounding mode.
    rounded = std::ldexp(std::nearbyint(std::ldexp(mag, -quantum_exp)), quantum_exp);
  }
  if (rounded > fmt.max_finite) {
    rounded = overflow == Overflow::saturate ? fmt.max_finite : std::numeric_limits<double>::infinity();
  }
  return std::copysign(rounded, x);
}

std::uint32_t encode_exact(double x, const MinifloatFormat& fmt) {
  const double mag = std::abs(x);
  // Zero is always encoded with a clear sign bit.
  const std::uint32_t sign = (std::signbit(x) && mag != 0.0) ? 1u : 0u;
  std::uint32_t exp_field = 0;
  std::uint32_t mant_field = 0;
  if (mag != 0.0) {
    const int exp = std::ilogb(mag);
    if (exp < fmt.min_normal_exponent) {
      mant_field = static_cast<std::uint32_t>(std::ldexp(mag, fmt.mantissa_bits - fmt.min_normal_exponent));
    } else {
      exp_field = static_cast<std::uint32_t>(exp + fmt.bias());
      mant_field = static_cast<std::uint32_t>(std::ldexp(mag, fmt.mantissa_bits - exp)) - (1u << fmt.mantissa_bits);
    }
  }
  return (sign << (fmt.exponent_bits + fmt.mantissa_bits)) | (exp_field << fmt.mantissa_bits) | mant_field;
}

double decode(std::uint32_t bits, const MinifloatFormat& fmt) {
  const std::uint32_t mant_mask = (1u << fmt.mantissa_bits) - 1u;
  const std::uint32_t exp_mask = (1u << fmt.exponent_bits) - 1u;
  const std::uint32_t mant = bits & mant_mask;
  const std::uint32_t exp_field = (bits >> fmt.mantissa_bits) & exp_mask;
  const bool negative = ((bits >> (fmt.exponent_bits + fmt.mantissa_bits)) & 1u) != 0;
  double mag = 0.0;
  if (exp_field == 0) {
    mag = std::ldexp(static_cast<double>(mant), fmt.min_normal_exponent - fmt.mantissa_bits);
  } else {
    mag = std::ldexp(static_cast<double>(mant | (1u << fmt.mantissa_bits)),
                     static_cast<int>(exp_field) - fmt.bias() - fmt.mantissa_bits);
  }
  return negative ? -mag : mag;
}

double e4m3_decode(std::uint8_t bits) {
  if ((bits & 0x7Fu) == 0x7Fu) throw std::domain_error("E4M3 NaN encoding");
  return decode(bits, kFp8E4M3);
}

}  // namespace blockdialect
