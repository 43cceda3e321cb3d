// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "blockdialect/minifloat.hpp"

namespace blockdialect {

namespace {

constexpr char kTensorMagic[4] = {'B', 'D', 'T', '1'};
constexpr char kQuantMagic[4] = {'B', 'D', 'Q', '1'};
constexpr std::size_t kMaxDims = 8;

class ByteWriter {
 public:
  void raw(const char (&magic)[4]) { out_.insert(out_.end(), magic, magic + 4); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  void expect_magic(const char (&magic)[4]) {
    need(4);
    if (std::memcmp(in_.data() + pos_, magic, 4) != 0) throw FormatError("bad magic");
    pos_ += 4;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("truncated file");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

Matrix Tensor::as_matrix() const {
  if (dims.empty()) return Matrix(1, 1, values);
  const std::size_t cols = dims.back();
  const std::size_t rows = cols == 0 ? 0 : values.size() / cols;
  return Matrix(rows, cols, values);
}

Tensor Tensor::from_matrix(const Matrix& m, DType dtype) {
  Tensor t;
  t.dtype = dtype;
  t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.values.assign(m.values().begin(), m.values().end());
  return t;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.size() > kMaxDims) throw FormatError("too many dimensions");
  if (element_count(t.dims) != t.values.size()) throw FormatError("tensor values do not match dims");
  ByteWriter w;
  w.raw(kTensorMagic);
  w.u8(static_cast<std::uint8_t>(t.dtype));
  w.u8(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) w.u32(d);
  for (double v : t.values) {
    if (!std::isfinite(v)) throw FormatError("non-finite tensor element");
    if (t.dtype == DType::f32) {
      w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      w.u64(std::bit_cast<std::uint64_t>(v));
    }
  }
  return w.take();
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kTensorMagic);
  Tensor t;
  const auto dtype = r.u8();
  if (dtype > 1) throw FormatError("unknown tensor dtype " + std::to_string(dtype));
  t.dtype = static_cast<DType>(dtype);
  const auto ndim = r.u8();
  if (ndim > kMaxDims) throw FormatError("too many dimensions");
  for (int i = 0; i < ndim; ++i) t.dims.push_back(r.u32());
  const std::size_t n = element_count(t.dims);
  const std::size_t width = t.dtype == DType::f32 ? 4 : 8;
  if (r.remaining() != n * width) throw FormatError("payload length does not match dims");
  t.values.resize(n);
  for (auto& v : t.values) {
    v = t.dtype == DType::f32 ? static_cast<double>(std::bit_cast<float>(r.u32())) : std::bit_cast<double>(r.u64());
    if (!std::isfinite(v)) throw FormatError("non-finite tensor element");
  }
  return t;
}

std::vector<std::uint8_t> encode_quantized(const QuantizedMatrix& q) {
  ByteWriter w;
  w.raw(kQuantMagic);
  w.u8(static_cast<std::uint8_t>(q.format()));
  w.u16(static_cast<std::uint16_t>(q.block_size));
  w.u8(static_cast<std::uint8_t>(q.axis));
  w.u32(static_cast<std::uint32_t>(q.rows));
  w.u32(static_cast<std::uint32_t>(q.cols));

  auto put_exponent = [&w](const SharedExponent& se) {
    w.u8(static_cast<std::uint8_t>(se.zero_block ? kZeroBlockExponent : static_cast<std::int8_t>(se.value)));
  };
  auto put_codes = [&w, &q](std::size_t n, auto nibble_at) {
    if (n != q.block_size) throw FormatError("block length differs from block size");
    for (std::size_t i = 0; i < n; i += 2) {
      const std::uint8_t lo = nibble_at(i);
      const std::uint8_t hi = i + 1 < n ? nibble_at(i + 1) : 0;
      w.u8(static_cast<std::uint8_t>((lo & 0xF) | (hi & 0xF) << 4));
    }
  };

  std::visit(
      [&](const auto& blocks) {
        using Block = typename std::decay_t<decltype(blocks)>::value_type;
        if (blocks.size() != q.block_count()) throw FormatError("block count does not match shape");
        for (const auto& b : blocks) {
          if constexpr (std::is_same_v<Block, QuantizedBlock>) {
            put_exponent(b.se);
            w.u8(static_cast<std::uint8_t>(b.dialect));
            put_codes(b.size(), [&b](std::size_t i) { return b.codes[i].nibble(); });
          } else if constexpr (std::is_same_v<Block, MxBlock>) {
            put_exponent(b.se);
            w.u8(kNoDialect);
            put_codes(b.size(), [&b](std::size_t i) { return b.codes[i]; });
          } else {
            w.u8(b.scale);
            w.u8(kNoDialect);
            put_codes(b.size(), [&b](std::size_t i) { return b.codes[i]; });
          }
        }
      },
      q.blocks);
  return w.take();
}

QuantizedMatrix decode_quantized(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kQuantMagic);
  QuantizedMatrix q;
  const auto format = r.u8();
  if (format > 2) throw FormatError("unknown quantized format " + std::to_string(format));
  q.block_size = r.u16();
  if (q.block_size == 0 || q.block_size > kMaxBlockSize) throw FormatError("block size outside [1, 64]");
  const auto axis = r.u8();
  if (axis > 1) throw FormatError("unknown axis " + std::to_string(axis));
  q.axis = static_cast<BlockAxis>(axis);
  q.rows = r.u32();
  q.cols = r.u32();
  const std::size_t k = q.axis == BlockAxis::cols ? q.cols : q.rows;
  if (k % q.block_size != 0) throw FormatError("contraction dimension not divisible by block size");
  const std::size_t code_bytes = (q.block_size + 1) / 2;
  const std::size_t count = q.block_count();
  if (r.remaining() != count * (2 + code_bytes)) throw FormatError("payload length does not match header");

  auto read_nibbles = [&]() {
    std::vector<std::uint8_t> nibbles(q.block_size);
    for (std::size_t i = 0; i < code_bytes; ++i) {
      const auto byte = r.u8();
      nibbles[2 * i] = byte & 0xF;
      if (2 * i + 1 < q.block_size) {
        nibbles[2 * i + 1] = byte >> 4;
      } else if ((byte >> 4) != 0) {
        throw FormatError("nonzero padding nibble");
      }
    }
    return nibbles;
  };
  auto exponent_from = [](std::uint8_t byte) {
    const auto v = static_cast<std::int8_t>(byte);
    return v == kZeroBlockExponent ? SharedExponent::zero() : SharedExponent{v, false};
  };

  switch (static_cast<QuantFormat>(format)) {
    case QuantFormat::dialect: {
      std::vector<QuantizedBlock> blocks(count);
      for (auto& b : blocks) {
        b.se = exponent_from(r.u8());
        const auto id = r.u8();
        if (id >= kNumDialects) throw FormatError("dialect id " + std::to_string(id) + " outside [0, 15]");
        b.dialect = id;
        for (auto n : read_nibbles()) b.codes.push_back(Code::from_nibble(n));
      }
      q.blocks = std::move(blocks);
      break;
    }
    case QuantFormat::mx:
    case QuantFormat::nv: {
      const bool mx = format == static_cast<std::uint8_t>(QuantFormat::mx);
      std::vector<MxBlock> mx_blocks;
      std::vector<NvBlock> nv_blocks;
      for (std::size_t i = 0; i < count; ++i) {
        const auto scale = r.u8();
        if (r.u8() != kNoDialect) throw FormatError("mx/nv block carries a dialect id");
        auto codes = read_nibbles();
        if (mx) {
          mx_blocks.push_back({exponent_from(scale), std::move(codes)});
        } else {
          if ((scale & 0x7F) == 0x7F) throw FormatError("NaN E4M3 scale");
          nv_blocks.push_back({scale, std::move(codes)});
        }
      }
      if (mx) {
        q.blocks = std::move(mx_blocks);
      } else {
        q.blocks = std::move(nv_blocks);
      }
      break;
    }
  }
  return q;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("write to '" + path + "' failed");
}

Tensor read_tensor_file(const std::string& path) { return decode_tensor(read_file(path)); }

void write_tensor_file(const std::string& path, const Tensor& t) { write_file(path, encode_tensor(t)); }

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

Matrix matrix_from_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t n = 0;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      if (b == std::string::npos) throw FormatError("empty CSV field on data row " + std::to_string(rows + 1));
      double v = 0.0;
      const char* begin = field.data() + b;
      const char* end = field.data() + e + 1;
      auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
        throw FormatError("bad CSV number '" + field + "'");
      }
      values.push_back(v);
      ++n;
    }
    if (rows == 0) {
      cols = n;
    } else if (n != cols) {
      throw FormatError("ragged CSV row " + std::to_string(rows + 1));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

}  // namespace blockdialect
