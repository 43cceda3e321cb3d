// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blockdialect/formatbook.hpp"

namespace blockdialect {

inline constexpr std::size_t kMaxBlockSize = 64;
inline constexpr int kMinSharedExponent = -127;
inline constexpr int kMaxSharedExponent = 127;

/// Power-of-two block scale floor(log2(max|x|)) - 2, so the scaled maximum
/// lies in [4, 8). All-zero blocks carry no exponent.
struct SharedExponent {
  int value = 0;
  bool zero_block = false;

  static constexpr SharedExponent zero() { return {0, true}; }
  friend bool operator==(const SharedExponent&, const SharedExponent&) = default;
};

/// Sign-magnitude block in Q3.2 after scaling by 2^-se.
struct PreprocessedBlock {
  std::vector<std::uint8_t> signs;  // 1 = negative
  std::vector<QuarterCode> mags;
  SharedExponent se;

  std::size_t size() const { return mags.size(); }
};

/// Throws std::invalid_argument for NaN/inf, std::domain_error for an empty
/// block, a block longer than 64 or an exponent outside [-127, 127].
SharedExponent shared_exponent(std::span<const double> block);

/// Truncates |x| / 2^se to Q3.2, clamping at 31 (7.75).
PreprocessedBlock preprocess_block(std::span<const double> block, SharedExponent se);

/// shared_exponent followed by preprocess_block.
PreprocessedBlock preprocess_block(std::span<const double> block);

/// Round a quarter code to the nearest half unit, ties up, clamped to 15.
constexpr HalfUnit round_to_half(QuarterCode q) {
  const int r = (q + 1) >> 1;
  return static_cast<HalfUnit>(r > kMaxHalfUnit ? kMaxHalfUnit : r);
}

/// Q3.2 code of a single magnitude under `se`, without the block checks.
QuarterCode quarter_code(double magnitude, int se);

}  // namespace blockdialect
