// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/selection.hpp"

#include <algorithm>
#include <stdexcept>

#include "blockdialect/quantize.hpp"

namespace blockdialect {

PairChoice select_pair(const PreprocessedBlock& pre) {
  if (pre.se.zero_block || pre.mags.empty()) {
    throw std::domain_error("select_pair: zero block has no pair");
  }
  const QuarterCode max_code = *std::max_element(pre.mags.begin(), pre.mags.end());
  const HalfUnit block_max = round_to_half(max_code);
  return {pair_index_for_max(block_max), block_max};
}

int select_dialect_two_stage(const PreprocessedBlock& pre, const Formatbook& fb) {
  const int pair = select_pair(pre).pair;
  const PairRanges ranges = beneficial_ranges(fb, pair);
  int even_count = 0;
  int odd_count = 0;
  for (QuarterCode q : pre.mags) {
    even_count += ranges.even.contains(q) ? 1 : 0;
    odd_count += ranges.odd.contains(q) ? 1 : 0;
  }
  return even_count >= odd_count ? 2 * pair : 2 * pair + 1;
}

MseChoice select_dialect_mse(std::span<const double> block, SharedExponent se, const Formatbook& fb) {
  if (se.zero_block) throw std::domain_error("select_dialect_mse: zero block");
  MseChoice best{-1, 0.0};
  for (int id = 0; id < kNumDialects; ++id) {
    const auto deq = dequantize_block(quantize_block_with_dialect(block, se, id, fb), fb);
    const double mse = block_mse(block, deq);
    if (best.dialect < 0 || mse < best.mse) best = {id, mse};
  }
  return best;
}

SelectionReport tally_dialects(std::span<const int> dialects) {
  SelectionReport r;
  for (int id : dialects) {
    if (id < 0 || id >= kNumDialects) throw std::domain_error("dialect id outside [0, 15]");
    ++r.counts[static_cast<std::size_t>(id)];
    ++r.total;
  }
  if (r.total > 0) {
    for (int id = 0; id < kNumDialects; ++id) {
      r.frequencies[static_cast<std::size_t>(id)] =
          static_cast<double>(r.counts[static_cast<std::size_t>(id)]) / static_cast<double>(r.total);
    }
  }
  return r;
}

SelectionReport selection_report(std::span<const PreprocessedBlock> blocks, const Formatbook& fb) {
  std::vector<int> ids;
  ids.reserve(blocks.size());
  for (const auto& b : blocks) {
    if (!b.se.zero_block) ids.push_back(select_dialect_two_stage(b, fb));
  }
  return tally_dialects(ids);
}

}  // namespace blockdialect
