// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "blockdialect/matrix.hpp"

namespace blockdialect {

// Seeded deviates built only from SplitMix64 and closed-form transforms, so a
// given seed yields the same stream on every platform and standard library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Standard normal via Box-Muller (cosine branch only).
  double gaussian();
  // Student-t with `dof` degrees of freedom: Z / sqrt(chi2 / dof).
  double student_t(int dof);

 private:
  std::uint64_t state_;
};

enum class Distribution { gaussian, student_t3 };

std::vector<double> random_values(SplitMix64& rng, std::size_t n, Distribution dist, double scale = 1.0);
Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols, Distribution dist, double scale = 1.0);

}  // namespace blockdialect
