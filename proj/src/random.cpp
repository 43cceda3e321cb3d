// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/random.hpp"

#include <cmath>
#include <numbers>

namespace blockdialect {

double SplitMix64::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SplitMix64::student_t(int dof) {
  const double z = gaussian();
  double chi2 = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double g = gaussian();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / dof);
}

std::vector<double> random_values(SplitMix64& rng, std::size_t n, Distribution dist, double scale) {
  std::vector<double> out(n);
  for (auto& x : out) x = scale * (dist == Distribution::gaussian ? rng.gaussian() : rng.student_t(3));
  return out;
}

Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols, Distribution dist, double scale) {
  return Matrix(rows, cols, random_values(rng, rows * cols, dist, scale));
}

}  // namespace blockdialect
