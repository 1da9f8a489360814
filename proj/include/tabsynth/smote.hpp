#pragma once

// Interpolation baseline for mixed-type tables. Each synthetic row is a
// convex combination of a random training row and its k-th nearest
// neighbour in the encoded space (quantile numerics + one-hot categoricals).
// Categorical values come from the base row when lambda <= 0.5 and from the
// neighbour otherwise. For classification the neighbour search is restricted
// to rows of the same class.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tabsynth/dataset.hpp"
#include "tabsynth/matrix.hpp"

namespace tabsynth {

struct SmoteConfig {
  std::size_t k_neighbours = 5;
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;
  double sample_proportion = 1.0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument.
  void validate() const;
};

// Index (into `rows`) of the k-th nearest candidate to rows[query], excluding
// the query itself. Ties are broken by lower row index. Throws
// std::out_of_range unless 1 <= k < candidates.size().
std::size_t kth_nearest(const MatrixD& rows, std::size_t query, std::size_t k);
std::size_t kth_nearest(const MatrixD& rows, std::span<const std::size_t> candidates, std::size_t query,
                        std::size_t k);

struct SmoteResult {
  TabularDataset data;
  // Per synthetic row: source rows (train split indices), lambda, and the
  // interpolated numerics in transformed space.
  std::vector<std::size_t> base;
  std::vector<std::size_t> neighbour;
  std::vector<double> lambda;
  MatrixD transformed;
};

// Uses the training split of `dataset`. Row count defaults to
// round(sample_proportion * train rows). Throws std::invalid_argument when a
// class has k rows or fewer.
SmoteResult smote_sample_detailed(const TabularDataset& dataset, const SmoteConfig& config,
                                  std::size_t threads = 0);
TabularDataset smote_sample(const TabularDataset& dataset, const SmoteConfig& config, std::size_t threads = 0);

}  // namespace tabsynth
