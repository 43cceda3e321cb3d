// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "blockdialect/quantize.hpp"
#include "blockdialect/random.hpp"
#include "blockdialect/selection.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace blockdialect;

namespace {

PreprocessedBlock from_codes(std::vector<QuarterCode> codes) {
  PreprocessedBlock pre;
  pre.se = {0, false};
  pre.signs.assign(codes.size(), 0);
  pre.mags = std::move(codes);
  return pre;
}

// Brute-force MSE over all 16 dialects using only the oracle nearest-value
// rule applied to truncated codes, measured against the exact inputs.
std::vector<double> oracle_mse_per_dialect(const std::vector<double>& block, int se, const Formatbook& fb) {
  std::vector<double> out;
  for (int id = 0; id < kNumDialects; ++id) {
    double sum = 0.0;
    for (double x : block) {
      const int q = std::min(31, static_cast<int>(std::floor(std::ldexp(std::abs(x), 2 - se))));
      const int v = fb.dialect(id).values[static_cast<std::size_t>(oracle::nearest_index(q, fb.dialect(id).values))];
      const double deq = std::copysign(std::ldexp(v, se - 1), x);
      sum += (deq - x) * (deq - x);
    }
    out.push_back(sum / static_cast<double>(block.size()));
  }
  return out;
}

}  // namespace

TEST_CASE("select_pair") {
  CHECK(select_pair(from_codes({26, 3, 0})).pair == 2);
  CHECK(select_pair(from_codes({26, 3, 0})).block_max == 13);
  CHECK(select_pair(from_codes({16, 1})).pair == 7);
  CHECK(select_pair(from_codes({31})).block_max == 15);
  CHECK(select_pair(from_codes({31})).pair == 0);
  CHECK(select_pair(from_codes({15, 16})).block_max == 8);

  PreprocessedBlock zero = from_codes({0, 0});
  zero.se = SharedExponent::zero();
  CHECK_THROWS_AS(select_pair(zero), std::domain_error);
}

TEST_CASE("select_dialect_two_stage") {
  const Formatbook fb = build_default_formatbook();
  CHECK(select_dialect_two_stage(from_codes({26, 18, 20, 22, 15}), fb) == 4);
  CHECK(select_dialect_two_stage(from_codes({26, 18, 15, 16}), fb) == 5);
  CHECK(select_dialect_two_stage(from_codes({26, 3, 2, 1}), fb) == 4);
  CHECK(select_dialect_two_stage(from_codes(std::vector<QuarterCode>(32, 26)), fb) == 4);
}

TEST_CASE("stage 1 picks the pair whose maximum matches the rounded block maximum") {
  const Formatbook fb = build_default_formatbook();
  SplitMix64 rng(31);
  for (int t = 0; t < 2000; ++t) {
    const auto block = random_values(rng, 32, t % 2 ? Distribution::gaussian : Distribution::student_t3);
    const auto pre = preprocess_block(block);
    QuarterCode max_code = 0;
    for (auto q : pre.mags) max_code = std::max(max_code, q);
    const int id = select_dialect_two_stage(pre, fb);
    CHECK(fb.dialect(id).max() == oracle::real_round_to_half(max_code));
  }
}

TEST_CASE("stage 2 is optimal when one range is empty") {
  // Exhaustive over multisets of up to three non-max codes for every pair.
  // Codes outside both ranges cost the same under either dialect, so a block
  // touching only one range is best served by that range's dialect.
  const Formatbook fb = build_default_formatbook();
  for (int p = 0; p < kNumPairs; ++p) {
    const int max_code = 2 * (15 - p);
    const auto& even = fb.dialect(2 * p).values;
    const auto& odd = fb.dialect(2 * p + 1).values;
    for (int a = 0; a < max_code; ++a) {
      for (int b = a; b < max_code; ++b) {
        for (int c = b; c < max_code; ++c) {
          auto pre = from_codes({static_cast<QuarterCode>(max_code), static_cast<QuarterCode>(a),
                                 static_cast<QuarterCode>(b), static_cast<QuarterCode>(c)});
          const PairRanges r = beneficial_ranges(fb, p);
          int ne = 0;
          int no = 0;
          int se_even = 0;
          int se_odd = 0;
          for (auto q : pre.mags) {
            ne += r.even.contains(q);
            no += r.odd.contains(q);
            se_even += oracle::squared_error(q, even);
            se_odd += oracle::squared_error(q, odd);
          }
          if (ne > 0 && no > 0) continue;
          const int chosen = select_dialect_two_stage(pre, fb);
          CAPTURE(p);
          CAPTURE(a);
          CAPTURE(b);
          CAPTURE(c);
          CHECK(std::min(se_even, se_odd) == (chosen == 2 * p ? se_even : se_odd));
        }
      }
    }
  }
}

TEST_CASE("select_dialect_mse") {
  const Formatbook fb = build_default_formatbook();
  SUBCASE("exactly representable block") {
    std::vector<double> block;
    for (int rep = 0; rep < 4; ++rep) {
      for (double v : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 6.5}) block.push_back(std::ldexp(v, -3));
    }
    const auto choice = select_dialect_mse(block, shared_exponent(block), fb);
    CHECK(choice.dialect == 4);
    CHECK(choice.mse == 0.0);
  }
  SUBCASE("6.5 and 5.0 need dialect 4") {
    std::vector<double> block(32, 0.0);
    block[0] = 6.5;
    block[1] = 5.0;
    const auto brute = oracle_mse_per_dialect(block, 0, fb);
    CHECK(brute[4] == 0.0);
    for (int id = 0; id < kNumDialects; ++id) {
      if (id != 4) CHECK(brute[static_cast<std::size_t>(id)] > 0.0);
    }
    CHECK(brute[5] == doctest::Approx(1.0 / 32));  // 5.0 -> 4.0
    const auto choice = select_dialect_mse(block, shared_exponent(block), fb);
    CHECK(choice.dialect == 4);
    CHECK(choice.mse == 0.0);
  }
  SUBCASE("argmin over random blocks matches brute force") {
    SplitMix64 rng(41);
    for (int t = 0; t < 300; ++t) {
      const auto block = random_values(rng, 1 + rng.next() % 32, Distribution::student_t3);
      const auto se = shared_exponent(block);
      const auto brute = oracle_mse_per_dialect(block, se.value, fb);
      const auto choice = select_dialect_mse(block, se, fb);
      const auto best = std::min_element(brute.begin(), brute.end()) - brute.begin();
      CHECK(choice.dialect == best);
      CHECK(choice.mse == doctest::Approx(brute[static_cast<std::size_t>(best)]).epsilon(1e-12));
      const auto two_stage = select_dialect_two_stage(preprocess_block(block, se), fb);
      CHECK(choice.mse <= brute[static_cast<std::size_t>(two_stage)]);
    }
  }
  SUBCASE("single element") {
    const std::vector<double> block{4.3};
    const auto choice = select_dialect_mse(block, shared_exponent(block), fb);
    for (double m : oracle_mse_per_dialect(block, 0, fb)) CHECK(choice.mse <= m);
  }
  SUBCASE("zero block is rejected") {
    CHECK_THROWS_AS(select_dialect_mse(std::vector<double>{0.0}, SharedExponent::zero(), fb), std::domain_error);
  }
}

TEST_CASE("selection is invariant under power-of-two scaling") {
  const Formatbook fb = build_default_formatbook();
  SplitMix64 rng(51);
  for (int t = 0; t < 300; ++t) {
    auto block = random_values(rng, 32, Distribution::gaussian);
    const int shift = static_cast<int>(rng.next() % 21) - 10;
    std::vector<double> scaled;
    for (double x : block) scaled.push_back(std::ldexp(x, shift));
    const auto se = shared_exponent(block);
    const auto se2 = shared_exponent(scaled);
    CHECK(se2.value == se.value + shift);
    CHECK(select_dialect_two_stage(preprocess_block(block), fb) == select_dialect_two_stage(preprocess_block(scaled), fb));
    CHECK(select_dialect_mse(block, se, fb).dialect == select_dialect_mse(scaled, se2, fb).dialect);
  }
}

TEST_CASE("selection_report") {
  const Formatbook fb = build_default_formatbook();
  SUBCASE("identical blocks") {
    std::vector<PreprocessedBlock> blocks(5, preprocess_block(std::vector<double>{6.5, 5.0, 1.0}));
    const auto r = selection_report(blocks, fb);
    CHECK(r.total == 5);
    CHECK(r.frequencies[4] == 1.0);
    double sum = 0.0;
    for (double f : r.frequencies) sum += f;
    CHECK(sum == 1.0);
  }
  SUBCASE("one block per dialect") {
    // Search for a second code that steers stage 2 to each dialect.
    std::vector<PreprocessedBlock> blocks;
    for (int id = 0; id < kNumDialects; ++id) {
      const auto max_code = static_cast<QuarterCode>(2 * fb.dialect(id).max());
      bool found = false;
      for (int q = 0; q < max_code && !found; ++q) {
        auto pre = from_codes({max_code, static_cast<QuarterCode>(q)});
        if (select_dialect_two_stage(pre, fb) == id) {
          blocks.push_back(pre);
          found = true;
        }
      }
      REQUIRE(found);
    }
    const auto r = selection_report(blocks, fb);
    for (double f : r.frequencies) CHECK(f == 1.0 / 16);
  }
  SUBCASE("empty and all-zero input") {
    CHECK(selection_report({}, fb).total == 0);
    std::vector<PreprocessedBlock> zeros(3, preprocess_block(std::vector<double>{0.0, 0.0}));
    const auto r = selection_report(zeros, fb);
    CHECK(r.total == 0);
    for (double f : r.frequencies) CHECK(f == 0.0);
  }
}
