// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/quantize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "blockdialect/minifloat.hpp"
#include "blockdialect/selection.hpp"

namespace blockdialect {

int quantize_element(QuarterCode q, const DialectValueSet& v) {
  // Upper bound of index i is the midpoint with v[i+1], i.e. v[i] + v[i+1]
  // in quarter codes; the first bound q falls below decides the index.
  int i = 0;
  while (i < kValuesPerDialect - 1 && q >= v.values[static_cast<std::size_t>(i)] + v.values[static_cast<std::size_t>(i + 1)]) {
    ++i;
  }
  return i;
}

namespace {

QuantizedBlock quantize_preprocessed(const PreprocessedBlock& pre, int dialect, const Formatbook& fb) {
  const auto& values = fb.dialect(dialect);
  QuantizedBlock qb;
  qb.se = pre.se;
  qb.dialect = dialect;
  qb.codes.resize(pre.size());
  if (pre.se.zero_block) return qb;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const auto index = static_cast<std::uint8_t>(quantize_element(pre.mags[i], values));
    qb.codes[i] = {static_cast<std::uint8_t>(index == 0 ? 0 : pre.signs[i]), index};
  }
  return qb;
}

}  // namespace

QuantizedBlock quantize_block(std::span<const double> block, const Formatbook& fb) {
  const PreprocessedBlock pre = preprocess_block(block);
  const int dialect = pre.se.zero_block ? kNumDialects - 1 : select_dialect_two_stage(pre, fb);
  return quantize_preprocessed(pre, dialect, fb);
}

QuantizedBlock quantize_block_with_dialect(std::span<const double> block, SharedExponent se, int dialect,
                                           const Formatbook& fb) {
  if (dialect < 0 || dialect >= kNumDialects) {
    throw std::domain_error("dialect id " + std::to_string(dialect) + " outside [0, 15]");
  }
  for (double x : block) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in block");
  }
  return quantize_preprocessed(preprocess_block(block, se), dialect, fb);
}

std::vector<double> dequantize_block(const QuantizedBlock& qb, const Formatbook& fb) {
  std::vector<double> out(qb.size(), 0.0);
  if (qb.se.zero_block) return out;
  const auto& values = fb.dialect(qb.dialect);
  for (std::size_t i = 0; i < qb.size(); ++i) {
    // v * 0.5 * 2^se
    const double mag = std::ldexp(static_cast<double>(values.values[qb.codes[i].index]), qb.se.value - 1);
    out[i] = qb.codes[i].negative ? -mag : mag;
  }
  return out;
}

MxBlock quantize_block_mx(std::span<const double> block) {
  MxBlock mb;
  mb.se = shared_exponent(block);
  mb.codes.resize(block.size(), 0);
  if (mb.se.zero_block) return mb;
  for (std::size_t i = 0; i < block.size(); ++i) {
    mb.codes[i] = fp4_encode(std::ldexp(block[i], -mb.se.value));
  }
  return mb;
}

std::vector<double> dequantize_block_mx(const MxBlock& mb) {
  std::vector<double> out(mb.size(), 0.0);
  if (mb.se.zero_block) return out;
  for (std::size_t i = 0; i < mb.size(); ++i) out[i] = std::ldexp(fp4_decode(mb.codes[i]), mb.se.value);
  return out;
}

NvBlock quantize_block_nv(std::span<const double> block) {
  if (block.empty()) throw std::domain_error("empty block");
  double max_abs = 0.0;
  for (double x : block) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in block");
    max_abs = std::max(max_abs, std::abs(x));
  }
  NvBlock nb;
  nb.scale = e4m3_encode(max_abs / 6.0);
  nb.codes.resize(block.size(), 0);
  const double scale = e4m3_decode(nb.scale);
  // A scale that underflows to zero leaves every element at zero.
  if (scale == 0.0) return nb;
  for (std::size_t i = 0; i < block.size(); ++i) nb.codes[i] = fp4_encode(block[i] / scale);
  return nb;
}

std::vector<double> dequantize_block_nv(const NvBlock& nb) {
  const double scale = e4m3_decode(nb.scale);
  std::vector<double> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) out[i] = scale * fp4_decode(nb.codes[i]);
  return out;
}

double block_mse(std::span<const double> original, std::span<const double> dequantized) {
  if (original.size() != dequantized.size()) {
    throw std::invalid_argument("block_mse: length mismatch");
  }
  if (original.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = dequantized[i] - original[i];
    sum += d * d;
  }
  return sum / static_cast<double>(original.size());
}

}  // namespace blockdialect
