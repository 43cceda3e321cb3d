// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "blockdialect/fixedpoint.hpp"
#include "blockdialect/formatbook.hpp"

namespace blockdialect {

struct PairChoice {
  int pair = 0;
  HalfUnit block_max = 0;
};

/// Stage 1: the pair whose maximum equals the block maximum rounded to a
/// half unit. Throws std::domain_error for zero blocks.
PairChoice select_pair(const PreprocessedBlock& pre);

/// Stage 2: the pair member with more elements inside its beneficial range.
/// Equal counts select the even member.
int select_dialect_two_stage(const PreprocessedBlock& pre, const Formatbook& fb);

struct MseChoice {
  int dialect = 0;
  double mse = 0.0;
};

/// Exhaustive search: quantizes the block under all sixteen dialects and
/// measures MSE against the exact inputs. Ties go to the lower id.
MseChoice select_dialect_mse(std::span<const double> block, SharedExponent se, const Formatbook& fb);

struct SelectionReport {
  std::array<std::size_t, kNumDialects> counts{};
  std::array<double, kNumDialects> frequencies{};
  std::size_t total = 0;  // nonzero blocks counted
};

/// Two-stage selection frequencies over the nonzero blocks.
SelectionReport selection_report(std::span<const PreprocessedBlock> blocks, const Formatbook& fb);

/// Frequencies from already-selected dialect ids.
SelectionReport tally_dialects(std::span<const int> dialects);

}  // namespace blockdialect
