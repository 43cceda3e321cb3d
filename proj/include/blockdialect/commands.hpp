// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockdialect/formatbook.hpp"
#include "blockdialect/gemm.hpp"
#include "blockdialect/io.hpp"
#include "blockdialect/matrix.hpp"

namespace blockdialect {

/// A checked invariant failed at run time (CLI exit code 3).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blocks always run along the last tensor dimension for profiling,
// comparison and selection reports.

struct ProfileReport {
  std::array<std::size_t, 32> magnitude_counts{};  // bins of 0.25 over [0, 8) after block scaling
  std::array<std::size_t, 8> block_max_counts{};   // block max 4.0, 4.5, ..., 7.5
  std::size_t zero_blocks = 0;
  std::size_t elements = 0;
  std::size_t blocks = 0;
};

ProfileReport cmd_profile(const Tensor& input, std::size_t block_size);
std::string profile_csv(const ProfileReport& r);

std::vector<std::uint8_t> cmd_quantize(const Tensor& input, std::size_t block_size, BlockAxis axis,
                                       QuantFormat format, const Formatbook& fb);
Tensor cmd_dequantize(std::span<const std::uint8_t> quantized, const Formatbook& fb);

struct CompareRow {
  std::string method;  // dialect, dialect-oracle, mx, nv
  double mean_block_mse = 0.0;
  double worst_block_mse = 0.0;
  double relative_error = 0.0;
  double effective_bits = 0.0;
};

/// Methods: "dialect" (two-stage), "dialect-oracle" (exhaustive MSE), "mx", "nv".
std::vector<CompareRow> cmd_compare(const Tensor& input, std::size_t block_size,
                                    const std::vector<std::string>& methods, const Formatbook& fb);
std::string compare_csv(const std::vector<CompareRow>& rows);

struct SelectReport {
  std::array<std::size_t, kNumDialects> two_stage_counts{};
  std::array<std::size_t, kNumDialects> oracle_counts{};
  std::size_t blocks = 0;  // nonzero blocks
  double agreement = 0.0;  // fraction of blocks where both methods agree

  double two_stage_frequency(int d) const;
  double oracle_frequency(int d) const;
};

SelectReport cmd_select_report(const Tensor& input, std::size_t block_size, const Formatbook& fb);
std::string select_report_csv(const SelectReport& r);

struct GemmCheckReport {
  QuantFormat format = QuantFormat::dialect;
  AccumulatorMode mode = AccumulatorMode::exact;
  double relative_error = 0.0;               // quantized gemm vs full-precision product
  double relative_error_dequantized = 0.0;   // quantized gemm vs product of dequantized operands
  std::optional<bool> bit_exact;             // dialect + exact mode only
  std::optional<double> mx_relative_error;   // baseline, when format is not mx
};

/// Quantizes A along columns and W along rows, multiplies, and compares.
/// Throws InvariantViolation when the dialect exact-mode result is not
/// bit-identical to multiplying the dequantized operands.
GemmCheckReport cmd_gemm_check(const Tensor& a, const Tensor& w, std::size_t block_size, QuantFormat format,
                               AccumulatorMode mode, const Formatbook& fb);
std::string gemm_check_csv(const GemmCheckReport& r);

}  // namespace blockdialect
