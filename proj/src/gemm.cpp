// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/gemm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "blockdialect/minifloat.hpp"

namespace blockdialect {

BlockPartial mac_block(const QuantizedBlock& a, const QuantizedBlock& w, const Formatbook& fb) {
  if (a.size() != w.size()) throw std::invalid_argument("mac_block: block length mismatch");
  if (a.se.zero_block || w.se.zero_block) return {0, 0};
  const auto& va = fb.dialect(a.dialect).values;
  const auto& vw = fb.dialect(w.dialect).values;
  std::int32_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int32_t prod = va[a.codes[i].index] * vw[w.codes[i].index];
    acc += (a.codes[i].negative ^ w.codes[i].negative) ? -prod : prod;
  }
  return {acc, a.se.value + w.se.value};
}

namespace {

// Signed FP4 E2M1 value times two: an integer in [-12, 12].
constexpr std::int32_t doubled_fp4(std::uint8_t nibble) {
  constexpr std::int32_t kMag[8] = {0, 1, 2, 3, 4, 6, 8, 12};
  const std::int32_t m = kMag[nibble & 7u];
  return (nibble & 8u) ? -m : m;
}

std::int32_t doubled_fp4_dot(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& w) {
  std::int32_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += doubled_fp4(a[i]) * doubled_fp4(w[i]);
  return acc;
}

}  // namespace

BlockPartial mac_block(const MxBlock& a, const MxBlock& w) {
  if (a.size() != w.size()) throw std::invalid_argument("mac_block: block length mismatch");
  if (a.se.zero_block || w.se.zero_block) return {0, 0};
  return {doubled_fp4_dot(a.codes, w.codes), a.se.value + w.se.value};
}

double block_partial_value(BlockPartial p) { return std::ldexp(static_cast<double>(p.acc), p.exp_sum - 2); }

double nv_block_dot(const NvBlock& a, const NvBlock& w) {
  if (a.size() != w.size()) throw std::invalid_argument("nv_block_dot: block length mismatch");
  const double acc = static_cast<double>(doubled_fp4_dot(a.codes, w.codes));
  return acc * 0.25 * e4m3_decode(a.scale) * e4m3_decode(w.scale);
}

namespace {

std::size_t contraction_length(std::size_t rows, std::size_t cols, BlockAxis axis) {
  return axis == BlockAxis::cols ? cols : rows;
}

// Element (r, c) of block (gr, gc), offset i along the axis.
template <typename F>
void for_each_block(std::size_t grid_rows, std::size_t grid_cols, std::size_t b, BlockAxis axis, F&& f) {
  for (std::size_t gr = 0; gr < grid_rows; ++gr) {
    for (std::size_t gc = 0; gc < grid_cols; ++gc) {
      const std::size_t r0 = axis == BlockAxis::cols ? gr : gr * b;
      const std::size_t c0 = axis == BlockAxis::cols ? gc * b : gc;
      f(gr * grid_cols + gc, r0, c0);
    }
  }
}

}  // namespace

QuantizedMatrix quantize_matrix(const Matrix& m, std::size_t block_size, BlockAxis axis, QuantFormat format,
                                const Formatbook& fb) {
  if (block_size == 0 || block_size > kMaxBlockSize) {
    throw std::domain_error("block size " + std::to_string(block_size) + " outside [1, 64]");
  }
  const std::size_t k = contraction_length(m.rows(), m.cols(), axis);
  if (k % block_size != 0) {
    throw std::invalid_argument("dimension " + std::to_string(k) + " not divisible by block size " +
                                std::to_string(block_size));
  }
  QuantizedMatrix q;
  q.rows = m.rows();
  q.cols = m.cols();
  q.block_size = block_size;
  q.axis = axis;

  std::vector<double> slice(block_size);
  auto gather = [&](std::size_t r0, std::size_t c0) {
    for (std::size_t i = 0; i < block_size; ++i) {
      slice[i] = axis == BlockAxis::cols ? m(r0, c0 + i) : m(r0 + i, c0);
    }
  };
  auto build = [&](auto quantize_one) {
    using Block = decltype(quantize_one(std::span<const double>{}));
    std::vector<Block> blocks(q.block_count());
    for_each_block(q.grid_rows(), q.grid_cols(), block_size, axis, [&](std::size_t idx, std::size_t r0, std::size_t c0) {
      gather(r0, c0);
      blocks[idx] = quantize_one(std::span<const double>(slice));
    });
    q.blocks = std::move(blocks);
  };

  switch (format) {
    case QuantFormat::dialect:
      build([&fb](std::span<const double> s) { return quantize_block(s, fb); });
      break;
    case QuantFormat::mx:
      build([](std::span<const double> s) { return quantize_block_mx(s); });
      break;
    case QuantFormat::nv:
      build([](std::span<const double> s) { return quantize_block_nv(s); });
      break;
  }
  return q;
}

Matrix dequantize_matrix(const QuantizedMatrix& q, const Formatbook& fb) {
  Matrix m(q.rows, q.cols);
  std::visit(
      [&](const auto& blocks) {
        using Block = typename std::decay_t<decltype(blocks)>::value_type;
        for_each_block(q.grid_rows(), q.grid_cols(), q.block_size, q.axis,
                       [&](std::size_t idx, std::size_t r0, std::size_t c0) {
                         std::vector<double> vals;
                         if constexpr (std::is_same_v<Block, QuantizedBlock>) {
                           vals = dequantize_block(blocks[idx], fb);
                         } else if constexpr (std::is_same_v<Block, MxBlock>) {
                           vals = dequantize_block_mx(blocks[idx]);
                         } else {
                           vals = dequantize_block_nv(blocks[idx]);
                         }
                         for (std::size_t i = 0; i < q.block_size; ++i) {
                           if (q.axis == BlockAxis::cols) {
                             m(r0, c0 + i) = vals[i];
                           } else {
                             m(r0 + i, c0) = vals[i];
                           }
                         }
                       });
      },
      q.blocks);
  return m;
}

QuantizedMatrix transpose(const QuantizedMatrix& q) {
  QuantizedMatrix t;
  t.rows = q.cols;
  t.cols = q.rows;
  t.block_size = q.block_size;
  t.axis = q.axis == BlockAxis::cols ? BlockAxis::rows : BlockAxis::cols;
  const std::size_t gr = q.grid_rows();
  const std::size_t gc = q.grid_cols();
  std::visit(
      [&](const auto& blocks) {
        std::decay_t<decltype(blocks)> out(blocks.size());
        for (std::size_t r = 0; r < gr; ++r) {
          for (std::size_t c = 0; c < gc; ++c) out[c * gr + r] = blocks[r * gc + c];
        }
        t.blocks = std::move(out);
      },
      q.blocks);
  return t;
}

Matrix gemm(const QuantizedMatrix& a, const QuantizedMatrix& w, const Formatbook& fb, AccumulatorMode mode) {
  if (a.cols != w.rows) throw std::invalid_argument("gemm: inner dimensions differ");
  if (a.axis != BlockAxis::cols || w.axis != BlockAxis::rows) {
    throw std::invalid_argument("gemm: operands must be blocked along the contraction dimension");
  }
  if (a.block_size != w.block_size) throw std::invalid_argument("gemm: block sizes differ");
  if (a.format() != w.format()) throw std::invalid_argument("gemm: mixed-format operands");

  const std::size_t kb = a.cols / a.block_size;
  Matrix out(a.rows, w.cols);
  std::visit(
      [&](const auto& ablocks) {
        using List = std::decay_t<decltype(ablocks)>;
        const auto& wblocks = std::get<List>(w.blocks);
        for (std::size_t i = 0; i < a.rows; ++i) {
          for (std::size_t j = 0; j < w.cols; ++j) {
            double sum = 0.0;
            for (std::size_t kk = 0; kk < kb; ++kk) {
              const auto& ab = ablocks[i * kb + kk];
              const auto& wb = wblocks[kk * w.cols + j];
              double partial = 0.0;
              if constexpr (std::is_same_v<List, std::vector<QuantizedBlock>>) {
                partial = block_partial_value(mac_block(ab, wb, fb));
              } else if constexpr (std::is_same_v<List, std::vector<MxBlock>>) {
                partial = block_partial_value(mac_block(ab, wb));
              } else {
                partial = nv_block_dot(ab, wb);
              }
              if (mode == AccumulatorMode::fp16) {
                sum = fp16_round(sum + fp16_round(partial));
              } else {
                sum += partial;
              }
            }
            out(i, j) = sum;
          }
        }
      },
      a.blocks);
  return out;
}

Matrix gemm_reference(const Matrix& a, const Matrix& w) {
  if (a.cols() != w.rows()) throw std::invalid_argument("gemm_reference: inner dimensions differ");
  Matrix out(a.rows(), w.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) sum += a(i, k) * w(k, j);
      out(i, j) = sum;
    }
  }
  return out;
}

double effective_bitwidth(QuantFormat format, std::size_t block_size, int num_dialects) {
  if (block_size == 0) throw std::domain_error("block size must be positive");
  const double b = static_cast<double>(block_size);
  switch (format) {
    case QuantFormat::dialect:
      return 4.0 + (5.0 + std::log2(static_cast<double>(num_dialects))) / b;
    case QuantFormat::mx:
      return 4.0 + 5.0 / b;
    case QuantFormat::nv:
      return 4.0 + 8.0 / b;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double relative_frobenius_error(const Matrix& ref, const Matrix& test) {
  if (ref.rows() != test.rows() || ref.cols() != test.cols()) {
    throw std::invalid_argument("relative_frobenius_error: shape mismatch");
  }
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = test.values()[i] - ref.values()[i];
    diff += d * d;
    norm += ref.values()[i] * ref.values()[i];
  }
  if (norm == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / norm);
}

const char* format_name(QuantFormat f) {
  switch (f) {
    case QuantFormat::dialect:
      return "dialect";
    case QuantFormat::mx:
      return "mx";
    case QuantFormat::nv:
      return "nv";
  }
  return "?";
}

QuantFormat parse_format(const std::string& name) {
  if (name == "dialect") return QuantFormat::dialect;
  if (name == "mx") return QuantFormat::mx;
  if (name == "nv") return QuantFormat::nv;
  throw std::invalid_argument("unknown format '" + name + "' (expected dialect, mx or nv)");
}

}  // namespace blockdialect
