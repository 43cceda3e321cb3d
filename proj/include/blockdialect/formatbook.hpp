// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blockdialect {

// Magnitude in units of 0.5, range [0, 15]. 13 means 6.5.
using HalfUnit = std::uint8_t;
// Q3.2 magnitude in units of 0.25, range [0, 31].
using QuarterCode = std::uint8_t;

inline constexpr int kNumDialects = 16;
inline constexpr int kNumPairs = kNumDialects / 2;
inline constexpr int kValuesPerDialect = 8;
inline constexpr HalfUnit kMaxHalfUnit = 15;
inline constexpr QuarterCode kMaxQuarterCode = 31;

/// The eight representable magnitudes of one dialect, ascending, in half-units.
struct DialectValueSet {
  std::array<HalfUnit, kValuesPerDialect> values{};

  constexpr HalfUnit max() const { return values.back(); }
  bool contains(HalfUnit v) const;

  friend bool operator==(const DialectValueSet&, const DialectValueSet&) = default;
};

/// Half-open interval [lo, hi) of quarter codes.
struct BeneficialRange {
  QuarterCode lo = 0;
  QuarterCode hi = 0;

  constexpr bool contains(QuarterCode q) const { return q >= lo && q < hi; }
  friend bool operator==(const BeneficialRange&, const BeneficialRange&) = default;
};

struct PairRanges {
  BeneficialRange even;
  BeneficialRange odd;
};

/// Sixteen dialects. Dialects 2p and 2p+1 form pair p, both with maximum
/// 15 - p; the even member carries the larger differing value.
struct Formatbook {
  std::array<DialectValueSet, kNumDialects> dialects{};

  const DialectValueSet& dialect(int id) const;

  friend bool operator==(const Formatbook&, const Formatbook&) = default;
};

struct FormatbookViolation {
  int dialect = 0;
  std::string message;
};

/// Thrown by load_formatbook for malformed documents or invalid tables.
class FormatbookError : public std::runtime_error {
 public:
  FormatbookError(const std::string& what, std::vector<FormatbookViolation> violations = {});
  const std::vector<FormatbookViolation>& violations() const { return violations_; }

 private:
  std::vector<FormatbookViolation> violations_;
};

// The base magnitudes shared with FP4 E2M1: {0, 0.5, 1, 1.5, 2, 3}.
inline constexpr std::array<HalfUnit, 6> kBaseHalfUnits = {0, 1, 2, 3, 4, 6};

Formatbook build_default_formatbook();

/// Maps a block maximum in [8, 15] to its pair index 15 - max.
/// Throws std::domain_error outside that range.
int pair_index_for_max(HalfUnit block_max);

constexpr int partner_of(int dialect) { return dialect ^ 1; }

/// The value present in `dialect` but absent from its pair partner.
/// Assumes a valid formatbook.
HalfUnit differing_value(const Formatbook& fb, int dialect);

/// Quarter-code intervals in which each member of `pair` represents values
/// at least as well as its partner. Each differing value d owns the codes
/// nearest to it among the union of both dialects' values:
/// [d + below, d + above) where below/above are d's neighbours in the union.
/// When the two differing values are adjacent the ranges abut.
PairRanges beneficial_ranges(const Formatbook& fb, int pair);

/// Reports every violated invariant; empty means valid.
std::vector<FormatbookViolation> validate_formatbook(const Formatbook& fb);

/// Parses the line-oriented formatbook document:
///   <dialect index> v0 v1 ... v7     (half-unit integers, ascending)
/// Lines whose first non-blank character is '#' and blank lines are skipped.
Formatbook load_formatbook(std::string_view text);
Formatbook load_formatbook_file(const std::string& path);

/// Renders `fb` in the format accepted by load_formatbook.
std::string format_formatbook(const Formatbook& fb);

}  // namespace blockdialect
