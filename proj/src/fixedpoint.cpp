// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/fixedpoint.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace blockdialect {

SharedExponent shared_exponent(std::span<const double> block) {
  if (block.empty()) throw std::domain_error("empty block");
  if (block.size() > kMaxBlockSize) {
    throw std::domain_error("block of " + std::to_string(block.size()) + " elements exceeds 64");
  }
  double max_abs = 0.0;
  for (double x : block) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in block");
    max_abs = std::max(max_abs, std::abs(x));
  }
  if (max_abs == 0.0) return SharedExponent::zero();

  // frexp: max_abs = m * 2^e with m in [0.5, 1), so floor(log2) = e - 1.
  int e = 0;
  std::frexp(max_abs, &e);
  const int se = e - 1 - 2;
  if (se < kMinSharedExponent || se > kMaxSharedExponent) {
    throw std::domain_error("shared exponent " + std::to_string(se) + " not representable in 8 bits");
  }
  return {se, false};
}

QuarterCode quarter_code(double magnitude, int se) {
  // ldexp by a power of two is exact; the floor is the Q3.2 truncation.
  const double scaled = std::floor(std::ldexp(magnitude, 2 - se));
  return static_cast<QuarterCode>(scaled >= kMaxQuarterCode ? kMaxQuarterCode : scaled);
}

PreprocessedBlock preprocess_block(std::span<const double> block, SharedExponent se) {
  PreprocessedBlock out;
  out.se = se;
  out.signs.resize(block.size(), 0);
  out.mags.resize(block.size(), 0);
  if (se.zero_block) return out;
  for (std::size_t i = 0; i < block.size(); ++i) {
    out.mags[i] = quarter_code(std::abs(block[i]), se.value);
    out.signs[i] = block[i] < 0.0 ? 1 : 0;
  }
  return out;
}

PreprocessedBlock preprocess_block(std::span<const double> block) {
  return preprocess_block(block, shared_exponent(block));
}

}  // namespace blockdialect
