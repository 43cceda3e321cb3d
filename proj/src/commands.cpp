// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/commands.hpp"

#include <algorithm>
#include <charconv>

#include "blockdialect/fixedpoint.hpp"
#include "blockdialect/quantize.hpp"
#include "blockdialect/selection.hpp"

namespace blockdialect {

namespace {

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

// Calls f(block) for every block of `block_size` along the rows of m.
template <typename F>
void for_each_row_block(const Matrix& m, std::size_t block_size, F&& f) {
  if (block_size == 0 || block_size > kMaxBlockSize) {
    throw std::domain_error("block size " + std::to_string(block_size) + " outside [1, 64]");
  }
  if (m.cols() % block_size != 0) {
    throw std::invalid_argument("last dimension " + std::to_string(m.cols()) + " not divisible by block size " +
                                std::to_string(block_size));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); c += block_size) f(m.row(r).subspan(c, block_size));
  }
}

}  // namespace

ProfileReport cmd_profile(const Tensor& input, std::size_t block_size) {
  ProfileReport r;
  for_each_row_block(input.as_matrix(), block_size, [&r](std::span<const double> block) {
    const PreprocessedBlock pre = preprocess_block(block);
    ++r.blocks;
    r.elements += block.size();
    for (QuarterCode q : pre.mags) ++r.magnitude_counts[q];
    if (pre.se.zero_block) {
      ++r.zero_blocks;
    } else {
      ++r.block_max_counts[select_pair(pre).block_max - 8];
    }
  });
  return r;
}

std::string profile_csv(const ProfileReport& r) {
  std::string out = "histogram,bin_start,count\n";
  for (std::size_t i = 0; i < r.magnitude_counts.size(); ++i) {
    out += "magnitude," + num(0.25 * static_cast<double>(i)) + "," + std::to_string(r.magnitude_counts[i]) + "\n";
  }
  for (std::size_t i = 0; i < r.block_max_counts.size(); ++i) {
    out += "block_max," + num(4.0 + 0.5 * static_cast<double>(i)) + "," + std::to_string(r.block_max_counts[i]) + "\n";
  }
  out += "block_max,zero," + std::to_string(r.zero_blocks) + "\n";
  return out;
}

std::vector<std::uint8_t> cmd_quantize(const Tensor& input, std::size_t block_size, BlockAxis axis,
                                       QuantFormat format, const Formatbook& fb) {
  return encode_quantized(quantize_matrix(input.as_matrix(), block_size, axis, format, fb));
}

Tensor cmd_dequantize(std::span<const std::uint8_t> quantized, const Formatbook& fb) {
  return Tensor::from_matrix(dequantize_matrix(decode_quantized(quantized), fb));
}

std::vector<CompareRow> cmd_compare(const Tensor& input, std::size_t block_size,
                                    const std::vector<std::string>& methods, const Formatbook& fb) {
  const Matrix m = input.as_matrix();
  std::vector<CompareRow> rows;
  for (const auto& method : methods) {
    CompareRow row;
    row.method = method;
    const bool oracle = method == "dialect-oracle";
    const QuantFormat format = oracle ? QuantFormat::dialect : parse_format(method);
    Matrix deq(m.rows(), m.cols());
    std::size_t nblocks = 0;
    double mse_sum = 0.0;
    std::size_t offset = 0;
    for_each_row_block(m, block_size, [&](std::span<const double> block) {
      std::vector<double> d;
      switch (format) {
        case QuantFormat::dialect:
          if (oracle) {
            const SharedExponent se = shared_exponent(block);
            const int id = se.zero_block ? kNumDialects - 1 : select_dialect_mse(block, se, fb).dialect;
            d = dequantize_block(quantize_block_with_dialect(block, se, id, fb), fb);
          } else {
            d = dequantize_block(quantize_block(block, fb), fb);
          }
          break;
        case QuantFormat::mx:
          d = dequantize_block_mx(quantize_block_mx(block));
          break;
        case QuantFormat::nv:
          d = dequantize_block_nv(quantize_block_nv(block));
          break;
      }
      const double mse = block_mse(block, d);
      mse_sum += mse;
      row.worst_block_mse = std::max(row.worst_block_mse, mse);
      std::copy(d.begin(), d.end(), deq.values().begin() + static_cast<std::ptrdiff_t>(offset));
      offset += d.size();
      ++nblocks;
    });
    row.mean_block_mse = nblocks ? mse_sum / static_cast<double>(nblocks) : 0.0;
    row.relative_error = relative_frobenius_error(m, deq);
    row.effective_bits = effective_bitwidth(format, block_size);
    rows.push_back(row);
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = "method,mean_block_mse,worst_block_mse,relative_frobenius_error,effective_bits\n";
  for (const auto& r : rows) {
    out += r.method + "," + num(r.mean_block_mse) + "," + num(r.worst_block_mse) + "," + num(r.relative_error) + "," +
           num(r.effective_bits) + "\n";
  }
  return out;
}

double SelectReport::two_stage_frequency(int d) const {
  return blocks ? static_cast<double>(two_stage_counts[static_cast<std::size_t>(d)]) / static_cast<double>(blocks)
                : 0.0;
}

double SelectReport::oracle_frequency(int d) const {
  return blocks ? static_cast<double>(oracle_counts[static_cast<std::size_t>(d)]) / static_cast<double>(blocks) : 0.0;
}

SelectReport cmd_select_report(const Tensor& input, std::size_t block_size, const Formatbook& fb) {
  SelectReport r;
  std::size_t agree = 0;
  for_each_row_block(input.as_matrix(), block_size, [&](std::span<const double> block) {
    const PreprocessedBlock pre = preprocess_block(block);
    if (pre.se.zero_block) return;
    const int two_stage = select_dialect_two_stage(pre, fb);
    const int oracle = select_dialect_mse(block, pre.se, fb).dialect;
    ++r.two_stage_counts[static_cast<std::size_t>(two_stage)];
    ++r.oracle_counts[static_cast<std::size_t>(oracle)];
    agree += two_stage == oracle ? 1 : 0;
    ++r.blocks;
  });
  r.agreement = r.blocks ? static_cast<double>(agree) / static_cast<double>(r.blocks) : 0.0;
  return r;
}

std::string select_report_csv(const SelectReport& r) {
  std::string out = "dialect,two_stage_count,two_stage_frequency,oracle_count,oracle_frequency\n";
  for (int d = 0; d < kNumDialects; ++d) {
    const auto i = static_cast<std::size_t>(d);
    out += std::to_string(d) + "," + std::to_string(r.two_stage_counts[i]) + "," + num(r.two_stage_frequency(d)) + "," +
           std::to_string(r.oracle_counts[i]) + "," + num(r.oracle_frequency(d)) + "\n";
  }
  out += "# blocks=" + std::to_string(r.blocks) + " agreement=" + num(r.agreement) + "\n";
  return out;
}

GemmCheckReport cmd_gemm_check(const Tensor& a, const Tensor& w, std::size_t block_size, QuantFormat format,
                               AccumulatorMode mode, const Formatbook& fb) {
  const Matrix am = a.as_matrix();
  const Matrix wm = w.as_matrix();
  if (am.cols() != wm.rows()) throw std::invalid_argument("gemm-check: A columns differ from W rows");

  const Matrix reference = gemm_reference(am, wm);
  auto run = [&](QuantFormat f, AccumulatorMode m, Matrix* dequantized_product) {
    const QuantizedMatrix aq = quantize_matrix(am, block_size, BlockAxis::cols, f, fb);
    const QuantizedMatrix wq = quantize_matrix(wm, block_size, BlockAxis::rows, f, fb);
    if (dequantized_product) *dequantized_product = gemm_reference(dequantize_matrix(aq, fb), dequantize_matrix(wq, fb));
    return gemm(aq, wq, fb, m);
  };

  GemmCheckReport r;
  r.format = format;
  r.mode = mode;
  Matrix deq_product;
  const Matrix result = run(format, mode, &deq_product);
  r.relative_error = relative_frobenius_error(reference, result);
  r.relative_error_dequantized = relative_frobenius_error(deq_product, result);
  if (format == QuantFormat::dialect && mode == AccumulatorMode::exact) {
    r.bit_exact = result == deq_product;
    if (!*r.bit_exact) {
      throw InvariantViolation("integer-path gemm differs from the product of dequantized operands");
    }
  }
  if (format != QuantFormat::mx) {
    r.mx_relative_error = relative_frobenius_error(reference, run(QuantFormat::mx, mode, nullptr));
  }
  return r;
}

std::string gemm_check_csv(const GemmCheckReport& r) {
  std::string out = "format,mode,relative_error,relative_error_vs_dequantized,bit_exact,mx_relative_error\n";
  out += std::string(format_name(r.format)) + "," + (r.mode == AccumulatorMode::exact ? "exact" : "fp16") + "," +
         num(r.relative_error) + "," + num(r.relative_error_dequantized) + "," +
         (r.bit_exact ? (*r.bit_exact ? "true" : "false") : "n/a") + "," +
         (r.mx_relative_error ? num(*r.mx_relative_error) : "n/a") + "\n";
  return out;
}

}  // namespace blockdialect
