#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tabsynth/dataset.hpp"

namespace tabsynth::testing {

// Binary label y ~ Bernoulli(0.3); numeric x | y=0 ~ N(2, 1), x | y=1 ~ N(5, 1.5);
// categorical c in {a, b, c} with P(c | y=0) = (0.6, 0.3, 0.1), P(c | y=1) = (0.1, 0.3, 0.6).
struct ToyMixture {
  static constexpr double kPositive = 0.3;
  static constexpr double kMean[2] = {2.0, 5.0};
  static constexpr double kStd[2] = {1.0, 1.5};
  static constexpr double kCat[2][3] = {{0.6, 0.3, 0.1}, {0.1, 0.3, 0.6}};

  static double numeric_mean();
  static double numeric_std();
  static double category_marginal(std::size_t k);
};

Metadata toy_metadata(std::uint64_t split_seed = 0);
std::string toy_mixture_csv(std::size_t rows, std::uint64_t seed);
// Parsed with toy_metadata(): 80/10/10 seeded split.
TabularDataset toy_mixture(std::size_t rows, std::uint64_t seed);

// Small mixed dataset with an explicit split column, two numerics, two
// categoricals and a multiclass target. Used by the format tests.
std::string small_mixed_csv(std::size_t rows, std::uint64_t seed);
Metadata small_mixed_metadata();

}  // namespace tabsynth::testing
