// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blockdialect/formatbook.hpp"
#include "blockdialect/gemm.hpp"
#include "blockdialect/matrix.hpp"
#include "blockdialect/quantize.hpp"

namespace blockdialect {

/// Keys quantized per token in head_dim / B blocks as they arrive.
class StreamingKeyCache {
 public:
  StreamingKeyCache(std::size_t head_dim, std::size_t block_size);

  void append(std::span<const double> key_row, const Formatbook& fb);

  std::size_t head_dim() const { return head_dim_; }
  std::size_t block_size() const { return block_size_; }
  std::size_t token_count() const { return tokens_; }
  std::size_t blocks_per_token() const { return head_dim_ / block_size_; }
  // Token-major; token t owns blocks [t * blocks_per_token(), (t + 1) * blocks_per_token()).
  const std::vector<QuantizedBlock>& blocks() const { return blocks_; }

 private:
  std::size_t head_dim_;
  std::size_t block_size_;
  std::size_t tokens_ = 0;
  std::vector<QuantizedBlock> blocks_;
};

/// Values quantized per channel over B consecutive tokens. The newest
/// N mod B tokens wait in full precision until the chunk fills; sealed chunks
/// are never touched again.
class StreamingValueCache {
 public:
  StreamingValueCache(std::size_t num_channels, std::size_t block_size);

  void append(std::span<const double> value_row, const Formatbook& fb);

  std::size_t num_channels() const { return channels_; }
  std::size_t block_size() const { return block_size_; }
  std::size_t token_count() const { return tokens_; }
  std::size_t sealed_tokens() const { return tokens_ - residual_tokens(); }
  std::size_t residual_tokens() const { return residual_.empty() ? 0 : residual_.front().size(); }

  // sealed()[channel][chunk]
  const std::vector<std::vector<QuantizedBlock>>& sealed() const { return sealed_; }
  // residual()[channel][token within the open chunk]
  const std::vector<std::vector<double>>& residual() const { return residual_; }

 private:
  std::size_t channels_;
  std::size_t block_size_;
  std::size_t tokens_ = 0;
  std::vector<std::vector<QuantizedBlock>> sealed_;
  std::vector<std::vector<double>> residual_;
};

/// Appends one token to both caches. Both row lengths are checked before
/// either cache changes; mismatches throw std::invalid_argument.
void append_token(StreamingKeyCache& keys, StreamingValueCache& values, std::span<const double> key_row,
                  std::span<const double> value_row, const Formatbook& fb);

struct MaterializedCache {
  QuantizedMatrix keys;    // N x head_dim, blocked along head_dim
  QuantizedMatrix values;  // sealed_tokens x channels, blocked along tokens
  Matrix value_residual;   // residual_tokens x channels
};

MaterializedCache materialize(const StreamingValueCache& values, const StreamingKeyCache& keys);

}  // namespace blockdialect
