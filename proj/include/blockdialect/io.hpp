// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blockdialect/gemm.hpp"
#include "blockdialect/matrix.hpp"

namespace blockdialect {

// Tensor file ("BDT1"), little-endian:
//   magic[4] dtype:u8 ndim:u8 dims:u32[ndim] payload (row-major)
// dtype 0 = binary32, 1 = binary64.
//
// Quantized file ("BDQ1"), little-endian:
//   magic[4] format:u8 block_size:u16 axis:u8 rows:u32 cols:u32
//   then per block in row-major block-grid order:
//     scale:u8   dialect/mx: shared exponent as i8, -128 marks a zero block
//                nv: E4M3 scale bits
//     dialect:u8 0..15, or 0xFF for mx/nv
//     codes:u8[ceil(B/2)]  element i in byte i/2, low nibble for even i

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

/// Malformed or inconsistent file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tensor {
  DType dtype = DType::f64;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  /// Leading dimensions flattened into rows; a 1-D tensor is one row.
  Matrix as_matrix() const;
  static Tensor from_matrix(const Matrix& m, DType dtype = DType::f64);

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline constexpr std::int8_t kZeroBlockExponent = -128;
inline constexpr std::uint8_t kNoDialect = 0xFF;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_quantized(const QuantizedMatrix& q);
QuantizedMatrix decode_quantized(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

Tensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const Tensor& t);

/// One row per line, comma separated, printed with round-trip precision.
std::string matrix_to_csv(const Matrix& m);
/// Parses rectangular comma-separated numbers; blank and '#' lines skipped.
Matrix matrix_from_csv(std::string_view text);

}  // namespace blockdialect
