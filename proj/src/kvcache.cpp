// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/kvcache.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace blockdialect {

namespace {

void check_geometry(std::size_t dim, std::size_t block_size, const char* what) {
  if (block_size == 0 || block_size > kMaxBlockSize) {
    throw std::domain_error("block size " + std::to_string(block_size) + " outside [1, 64]");
  }
  if (dim == 0 || dim % block_size != 0) {
    throw std::invalid_argument(std::string(what) + " " + std::to_string(dim) + " not a positive multiple of block size");
  }
}

}  // namespace

StreamingKeyCache::StreamingKeyCache(std::size_t head_dim, std::size_t block_size)
    : head_dim_(head_dim), block_size_(block_size) {
  check_geometry(head_dim, block_size, "head_dim");
}

void StreamingKeyCache::append(std::span<const double> key_row, const Formatbook& fb) {
  if (key_row.size() != head_dim_) throw std::invalid_argument("key row length differs from head_dim");
  std::vector<QuantizedBlock> row;
  row.reserve(blocks_per_token());
  for (std::size_t off = 0; off < head_dim_; off += block_size_) {
    row.push_back(quantize_block(key_row.subspan(off, block_size_), fb));
  }
  blocks_.insert(blocks_.end(), std::make_move_iterator(row.begin()), std::make_move_iterator(row.end()));
  ++tokens_;
}

StreamingValueCache::StreamingValueCache(std::size_t num_channels, std::size_t block_size)
    : channels_(num_channels), block_size_(block_size), sealed_(num_channels), residual_(num_channels) {
  if (block_size == 0 || block_size > kMaxBlockSize) {
    throw std::domain_error("block size " + std::to_string(block_size) + " outside [1, 64]");
  }
  if (num_channels == 0) throw std::invalid_argument("value cache needs at least one channel");
}

void StreamingValueCache::append(std::span<const double> value_row, const Formatbook& fb) {
  if (value_row.size() != channels_) throw std::invalid_argument("value row length differs from channel count");
  // Quantize the chunk before committing anything so a throw leaves the cache unchanged.
  if (residual_tokens() + 1 == block_size_) {
    std::vector<QuantizedBlock> chunk;
    chunk.reserve(channels_);
    std::vector<double> column(block_size_);
    for (std::size_t c = 0; c < channels_; ++c) {
      std::copy(residual_[c].begin(), residual_[c].end(), column.begin());
      column.back() = value_row[c];
      chunk.push_back(quantize_block(column, fb));
    }
    for (std::size_t c = 0; c < channels_; ++c) {
      sealed_[c].push_back(std::move(chunk[c]));
      residual_[c].clear();
    }
  } else {
    for (double x : value_row) {
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in value row");
    }
    for (std::size_t c = 0; c < channels_; ++c) residual_[c].push_back(value_row[c]);
  }
  ++tokens_;
}

void append_token(StreamingKeyCache& keys, StreamingValueCache& values, std::span<const double> key_row,
                  std::span<const double> value_row, const Formatbook& fb) {
  if (key_row.size() != keys.head_dim()) throw std::invalid_argument("key row length differs from head_dim");
  if (value_row.size() != values.num_channels()) {
    throw std::invalid_argument("value row length differs from channel count");
  }
  for (double x : value_row) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in value row");
  }
  keys.append(key_row, fb);
  values.append(value_row, fb);
}

MaterializedCache materialize(const StreamingValueCache& values, const StreamingKeyCache& keys) {
  MaterializedCache out;

  out.keys.rows = keys.token_count();
  out.keys.cols = keys.head_dim();
  out.keys.block_size = keys.block_size();
  out.keys.axis = BlockAxis::cols;
  out.keys.blocks = keys.blocks();

  const std::size_t channels = values.num_channels();
  const std::size_t chunks = values.sealed_tokens() / values.block_size();
  out.values.rows = values.sealed_tokens();
  out.values.cols = channels;
  out.values.block_size = values.block_size();
  out.values.axis = BlockAxis::rows;
  std::vector<QuantizedBlock> vblocks;
  vblocks.reserve(chunks * channels);
  for (std::size_t t = 0; t < chunks; ++t) {
    for (std::size_t c = 0; c < channels; ++c) vblocks.push_back(values.sealed()[c][t]);
  }
  out.values.blocks = std::move(vblocks);

  out.value_residual = Matrix(values.residual_tokens(), channels);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < values.residual_tokens(); ++t) out.value_residual(t, c) = values.residual()[c][t];
  }
  return out;
}

}  // namespace blockdialect
