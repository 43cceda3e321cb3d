// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "blockdialect/minifloat.hpp"
#include "blockdialect/quantize.hpp"
#include "blockdialect/random.hpp"
#include "blockdialect/selection.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace blockdialect;

namespace {

std::vector<double> scaled_dialect_values(const DialectValueSet& d, int se) {
  std::vector<double> out;
  for (HalfUnit v : d.values) out.push_back(std::ldexp(v, se - 1));
  return out;
}

}  // namespace

TEST_CASE("quantize_element worked example") {
  const Formatbook fb = build_default_formatbook();
  const auto& d4 = fb.dialect(4);
  CHECK(quantize_element(17, d4) == 6);  // 8.5 half-units -> 10
  CHECK(quantize_element(16, d4) == 6);  // closed below at 8.0
  CHECK(quantize_element(15, d4) == 5);
  CHECK(quantize_element(22, d4) == 6);  // 5'b10110 still maps to 10
  CHECK(quantize_element(23, d4) == 7);  // 11.5 goes to 13
  CHECK(quantize_element(0, d4) == 0);
  CHECK(quantize_element(31, d4) == 7);
}

TEST_CASE("quantize_element equals the brute-force nearest value for every code and dialect") {
  const Formatbook fb = build_default_formatbook();
  for (int id = 0; id < kNumDialects; ++id) {
    int previous = 0;
    for (int q = 0; q <= kMaxQuarterCode; ++q) {
      CAPTURE(id);
      CAPTURE(q);
      const int idx = quantize_element(static_cast<QuarterCode>(q), fb.dialect(id));
      CHECK(idx == oracle::nearest_index(q, fb.dialect(id).values));
      CHECK(idx >= previous);
      previous = idx;
    }
  }
}

TEST_CASE("quantize_block hand-traced example") {
  const Formatbook fb = build_default_formatbook();
  // Quarter codes 26, 20, 8, 1. Pair 2; 20 lies in dialect 4's range.
  // Code 1 is the midpoint of 0 and 0.5 and goes up to index 1.
  const auto qb = quantize_block(std::vector<double>{6.5, 5.0, -2.0, 0.25}, fb);
  CHECK(qb.se == SharedExponent{0, false});
  CHECK(qb.dialect == 4);
  const std::vector<Code> expected = {{0, 7}, {0, 6}, {1, 4}, {0, 1}};
  CHECK(qb.codes == expected);
  const auto& v = fb.dialect(4).values;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(oracle::nearest_index(std::vector<int>{26, 20, 8, 1}[i], v) == expected[i].index);
  }
}

TEST_CASE("zero block") {
  const Formatbook fb = build_default_formatbook();
  const auto qb = quantize_block(std::vector<double>(32, 0.0), fb);
  CHECK(qb.se.zero_block);
  CHECK(qb.dialect == 15);
  for (const auto& c : qb.codes) CHECK(c == Code{0, 0});
  for (double x : dequantize_block(qb, fb)) CHECK(x == 0.0);
}

TEST_CASE("negative values below the first midpoint lose their sign") {
  const Formatbook fb = build_default_formatbook();
  const auto qb = quantize_block(std::vector<double>{6.0, -0.1}, fb);
  CHECK(qb.codes[1] == Code{0, 0});
}

TEST_CASE("dequantize_block") {
  const Formatbook fb = build_default_formatbook();
  QuantizedBlock qb{{0, false}, 4, {{0, 6}}};
  CHECK(dequantize_block(qb, fb) == std::vector<double>{5.0});
  QuantizedBlock neg{{-2, false}, 0, {{1, 7}}};
  CHECK(dequantize_block(neg, fb) == std::vector<double>{-1.875});
}

TEST_CASE("quantize_block_with_dialect") {
  const Formatbook fb = build_default_formatbook();
  SplitMix64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto block = random_values(rng, 32, Distribution::gaussian);
    const auto qb = quantize_block(block, fb);
    CHECK(quantize_block_with_dialect(block, qb.se, qb.dialect, fb) == qb);
  }
  const std::vector<double> block{1.0, 2.0};
  CHECK_THROWS_AS(quantize_block_with_dialect(block, shared_exponent(block), 17, fb), std::domain_error);
  CHECK_THROWS_AS(quantize_block_with_dialect(block, shared_exponent(block), -1, fb), std::domain_error);
}

TEST_CASE("exactly representable blocks round-trip") {
  const Formatbook fb = build_default_formatbook();
  SplitMix64 rng(8);
  for (int id = 0; id < kNumDialects; ++id) {
    for (int se : {-9, -2, 0, 5}) {
      auto vals = scaled_dialect_values(fb.dialect(id), se);
      std::vector<double> block;
      for (int rep = 0; rep < 4; ++rep) {
        for (double v : vals) block.push_back(rng.next() & 1 ? -v : v);
      }
      const auto qb = quantize_block_with_dialect(block, shared_exponent(block), id, fb);
      CHECK(dequantize_block(qb, fb) == block);
      // The differing value sits in the dialect's own range, so stage 2 finds it
      // unless the partner ties at zero elements.
      const auto auto_qb = quantize_block(block, fb);
      CHECK(auto_qb.dialect == id);
      CHECK(dequantize_block(auto_qb, fb) == block);
    }
  }
  // Dialect 4 values repeated four times.
  std::vector<double> d4;
  for (int rep = 0; rep < 4; ++rep) {
    for (double v : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 6.5}) d4.push_back(v);
  }
  CHECK(block_mse(d4, dequantize_block(quantize_block(d4, fb), fb)) == 0.0);
}

TEST_CASE("per-element error bound") {
  // Truncation (< 0.25) plus half the gap to the neighbouring value, in scaled units.
  const Formatbook fb = build_default_formatbook();
  SplitMix64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const auto block = random_values(rng, 32, trial % 2 ? Distribution::gaussian : Distribution::student_t3);
    const auto qb = quantize_block(block, fb);
    const auto deq = dequantize_block(qb, fb);
    const auto& v = fb.dialect(qb.dialect).values;
    for (std::size_t i = 0; i < block.size(); ++i) {
      double gap = 0.0;
      for (int k = 0; k + 1 < kValuesPerDialect; ++k) gap = std::max(gap, static_cast<double>(v[k + 1] - v[k]));
      // Elements above 7.5 (clamped) can be up to 0.5 away from the max as well.
      const double bound = std::ldexp(0.25 + 0.25 * std::max(gap, 1.0), qb.se.value);
      CHECK(std::abs(deq[i] - block[i]) <= bound);
    }
  }
}

TEST_CASE("MXFP4") {
  SUBCASE("5.0 at se 0 rounds to 4.0") {
    const auto mb = quantize_block_mx(std::vector<double>{6.0, 5.0, 0.24});
    CHECK(mb.se == SharedExponent{0, false});
    CHECK(dequantize_block_mx(mb) == std::vector<double>{6.0, 4.0, 0.0});
  }
  SUBCASE("saturates at 6 * 2^se") {
    const auto mb = quantize_block_mx(std::vector<double>{7.9, -7.0, 1.0});
    CHECK(dequantize_block_mx(mb) == std::vector<double>{6.0, -6.0, 1.0});
  }
  SUBCASE("representable values round-trip") {
    const std::vector<double> block{-6.0 / 8, 4.0 / 8, 3.0 / 8, 1.5 / 8, 0.0, -0.5 / 8};
    CHECK(dequantize_block_mx(quantize_block_mx(block)) == block);
  }
  SUBCASE("random blocks stay within 6 * 2^se") {
    SplitMix64 rng(6);
    for (int t = 0; t < 300; ++t) {
      const auto block = random_values(rng, 32, Distribution::student_t3);
      const auto mb = quantize_block_mx(block);
      for (double x : dequantize_block_mx(mb)) CHECK(std::abs(x) <= std::ldexp(6.0, mb.se.value));
    }
  }
  SUBCASE("zero block") {
    const auto mb = quantize_block_mx(std::vector<double>(8, 0.0));
    CHECK(mb.se.zero_block);
    CHECK(dequantize_block_mx(mb) == std::vector<double>(8, 0.0));
  }
}

TEST_CASE("NVFP4") {
  SUBCASE("max of 6 times an E4M3 value is exact") {
    const double s = 0.8125;  // 1.101b * 2^-1
    REQUIRE(e4m3_decode(e4m3_encode(s)) == s);
    const auto nb = quantize_block_nv(std::vector<double>{6 * s, -1.0, 0.3});
    CHECK(e4m3_decode(nb.scale) == s);
    CHECK(dequantize_block_nv(nb)[0] == 6 * s);
  }
  SUBCASE("zero block") {
    const auto nb = quantize_block_nv(std::vector<double>(16, 0.0));
    CHECK(nb.scale == 0);
    for (auto c : nb.codes) CHECK(c == 0);
  }
  SUBCASE("random blocks against independent tables") {
    const auto e4m3 = oracle::enumerate_format(4, 3, 7, true);
    const auto fp4 = oracle::enumerate_format(2, 1, 1, false);
    SplitMix64 rng(12);
    for (int t = 0; t < 300; ++t) {
      const auto block = random_values(rng, 16, t % 2 ? Distribution::gaussian : Distribution::student_t3);
      double max_abs = 0.0;
      for (double x : block) max_abs = std::max(max_abs, std::abs(x));
      const double scale = oracle::nearest_even(max_abs / 6.0, e4m3).value;
      const auto deq = dequantize_block_nv(quantize_block_nv(block));
      for (std::size_t i = 0; i < block.size(); ++i) {
        const double mag = oracle::nearest_even(std::abs(block[i]) / scale, fp4).value;
        const double expected = block[i] < 0 ? -scale * mag : scale * mag;
        CHECK(deq[i] == expected);
      }
    }
  }
  SUBCASE("a subnormal scale can shrink on requantization") {
    const auto nb = quantize_block_nv(std::vector<double>{std::ldexp(4.6, -8)});
    CHECK(nb.scale == 2);
    const auto deq = dequantize_block_nv(nb);
    CHECK(deq[0] == std::ldexp(4.0, -8));
    CHECK(quantize_block_nv(deq).scale == 1);
  }
  SUBCASE("normal scales are stable under requantization") {
    SplitMix64 rng(13);
    for (int t = 0; t < 2000; ++t) {
      const auto block = random_values(rng, 16, Distribution::student_t3, std::ldexp(1.0, static_cast<int>(rng.next() % 12) - 4));
      const auto nb = quantize_block_nv(block);
      if ((nb.scale & 0x78) == 0) continue;  // subnormal E4M3 scale
      CHECK(quantize_block_nv(dequantize_block_nv(nb)) == nb);
    }
  }
  SUBCASE("huge blocks saturate the scale") {
    const auto nb = quantize_block_nv(std::vector<double>{1e6, 1.0});
    CHECK(e4m3_decode(nb.scale) == 448.0);
  }
}

TEST_CASE("block_mse") {
  CHECK(block_mse(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) == 0.0);
  CHECK(block_mse(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 0.0}) == 0.5);
  CHECK_THROWS_AS(block_mse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}
