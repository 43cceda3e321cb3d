// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blockdialect/fixedpoint.hpp"
#include "blockdialect/formatbook.hpp"

namespace blockdialect {

/// 4-bit element code: sign and 3-bit index into the dialect's values.
struct Code {
  std::uint8_t negative = 0;
  std::uint8_t index = 0;

  constexpr std::uint8_t nibble() const { return static_cast<std::uint8_t>((negative << 3) | (index & 7u)); }
  static constexpr Code from_nibble(std::uint8_t n) {
    return {static_cast<std::uint8_t>((n >> 3) & 1u), static_cast<std::uint8_t>(n & 7u)};
  }
  friend bool operator==(const Code&, const Code&) = default;
};

struct QuantizedBlock {
  SharedExponent se;
  int dialect = kNumDialects - 1;
  std::vector<Code> codes;

  std::size_t size() const { return codes.size(); }
  friend bool operator==(const QuantizedBlock&, const QuantizedBlock&) = default;
};

/// MXFP4 block: power-of-two scale and FP4 E2M1 nibbles.
struct MxBlock {
  SharedExponent se;
  std::vector<std::uint8_t> codes;

  std::size_t size() const { return codes.size(); }
  friend bool operator==(const MxBlock&, const MxBlock&) = default;
};

/// NVFP4 block: E4M3 scale byte and FP4 E2M1 nibbles.
struct NvBlock {
  std::uint8_t scale = 0;
  std::vector<std::uint8_t> codes;

  std::size_t size() const { return codes.size(); }
  friend bool operator==(const NvBlock&, const NvBlock&) = default;
};

/// Index of the nearest value of `v` to the quarter code `q`; midpoints go to
/// the larger value. Index i covers [v[i-1] + v[i], v[i] + v[i+1]).
int quantize_element(QuarterCode q, const DialectValueSet& v);

QuantizedBlock quantize_block(std::span<const double> block, const Formatbook& fb);

/// Same pipeline with the dialect fixed by the caller. Throws
/// std::domain_error for ids outside [0, 15].
QuantizedBlock quantize_block_with_dialect(std::span<const double> block, SharedExponent se, int dialect,
                                           const Formatbook& fb);

std::vector<double> dequantize_block(const QuantizedBlock& qb, const Formatbook& fb);

MxBlock quantize_block_mx(std::span<const double> block);
std::vector<double> dequantize_block_mx(const MxBlock& mb);

NvBlock quantize_block_nv(std::span<const double> block);
std::vector<double> dequantize_block_nv(const NvBlock& nb);

/// Mean squared difference. Throws std::invalid_argument on length mismatch.
double block_mse(std::span<const double> original, std::span<const double> dequantized);

}  // namespace blockdialect
