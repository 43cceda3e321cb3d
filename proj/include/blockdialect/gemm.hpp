// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "blockdialect/formatbook.hpp"
#include "blockdialect/matrix.hpp"
#include "blockdialect/quantize.hpp"

namespace blockdialect {

enum class QuantFormat : std::uint8_t { dialect = 0, mx = 1, nv = 2 };

/// Direction the blocks run along. A (M x K) activations use `cols`,
/// W (K x N) weights use `rows`, so blocks always span the contraction.
enum class BlockAxis : std::uint8_t { rows = 0, cols = 1 };

enum class AccumulatorMode { exact, fp16 };

using BlockList = std::variant<std::vector<QuantizedBlock>, std::vector<MxBlock>, std::vector<NvBlock>>;

/// Matrix cut into 1D blocks of `block_size` elements along `axis`.
/// Blocks are stored row-major over the block grid: for axis `cols` the grid
/// is rows x (cols / B), for axis `rows` it is (rows / B) x cols.
struct QuantizedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_size = 32;
  BlockAxis axis = BlockAxis::cols;
  BlockList blocks;

  QuantFormat format() const { return static_cast<QuantFormat>(blocks.index()); }
  std::size_t grid_rows() const { return axis == BlockAxis::cols ? rows : rows / block_size; }
  std::size_t grid_cols() const { return axis == BlockAxis::cols ? cols / block_size : cols; }
  std::size_t block_count() const { return grid_rows() * grid_cols(); }

  friend bool operator==(const QuantizedMatrix&, const QuantizedMatrix&) = default;
};

/// Integer dot product of two blocks sharing one exponent sum.
struct BlockPartial {
  std::int32_t acc = 0;
  int exp_sum = 0;

  friend bool operator==(const BlockPartial&, const BlockPartial&) = default;
};

/// Sum of signed half-unit products; value is acc * 2^(exp_sum - 2).
/// Throws std::invalid_argument on length mismatch.
BlockPartial mac_block(const QuantizedBlock& a, const QuantizedBlock& w, const Formatbook& fb);

/// MXFP4 analogue: FP4 magnitudes doubled to the integers {0,1,2,3,4,6,8,12}.
BlockPartial mac_block(const MxBlock& a, const MxBlock& w);

/// acc * 2^(exp_sum - 2), exact.
double block_partial_value(BlockPartial p);

/// NVFP4 block dot product: integer FP4 accumulation times both scales.
double nv_block_dot(const NvBlock& a, const NvBlock& w);

/// Throws std::invalid_argument when the contraction dimension is not a
/// multiple of `block_size`, and std::domain_error for block sizes outside
/// [1, 64].
QuantizedMatrix quantize_matrix(const Matrix& m, std::size_t block_size, BlockAxis axis, QuantFormat format,
                                const Formatbook& fb);

Matrix dequantize_matrix(const QuantizedMatrix& q, const Formatbook& fb);

/// Same blocks viewed as the transpose (axis flips, grid is reordered).
QuantizedMatrix transpose(const QuantizedMatrix& q);

/// A (axis cols) times W (axis rows), summing per-block partials. In fp16
/// mode every partial is rounded to binary16 and accumulated in binary16.
/// Throws std::invalid_argument on shape, block or format mismatch.
Matrix gemm(const QuantizedMatrix& a, const QuantizedMatrix& w, const Formatbook& fb,
            AccumulatorMode mode = AccumulatorMode::exact);

/// Plain binary64 product, k summed in ascending order.
Matrix gemm_reference(const Matrix& a, const Matrix& w);

/// Bits per element including per-block scale and dialect-id overhead:
/// 5-bit shared exponent for dialect/mx, 8-bit E4M3 scale for nv.
double effective_bitwidth(QuantFormat format, std::size_t block_size, int num_dialects = kNumDialects);

/// ||test - ref||_F / ||ref||_F, 0 when both are zero.
double relative_frobenius_error(const Matrix& ref, const Matrix& test);

const char* format_name(QuantFormat f);
QuantFormat parse_format(const std::string& name);

}  // namespace blockdialect
