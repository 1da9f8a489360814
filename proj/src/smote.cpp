#include "tabsynth/smote.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "tabsynth/engine.hpp"
#include "tabsynth/parallel.hpp"
#include "tabsynth/preprocess.hpp"

namespace tabsynth {

void SmoteConfig::validate() const {
  if (k_neighbours < 1) throw std::invalid_argument("smote: k must be at least 1");
  if (!(lambda_lo >= 0.0 && lambda_hi <= 1.0 && lambda_lo <= lambda_hi)) {
    throw std::invalid_argument("smote: lambda range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(sample_proportion > 0.0) || !std::isfinite(sample_proportion)) {
    throw std::invalid_argument("smote: sample proportion must be positive");
  }
}

std::size_t kth_nearest(const MatrixD& rows, std::span<const std::size_t> candidates, std::size_t query,
                        std::size_t k) {
  if (query >= static_cast<std::size_t>(rows.rows())) throw std::out_of_range("kth_nearest: query out of range");
  if (k < 1 || k >= candidates.size()) throw std::out_of_range("kth_nearest: k out of range");
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  const auto q = rows.row(static_cast<Eigen::Index>(query));
  for (std::size_t c : candidates) {
    if (c == query) continue;
    dist.emplace_back((rows.row(static_cast<Eigen::Index>(c)) - q).squaredNorm(), c);
  }
  if (dist.size() < k) throw std::out_of_range("kth_nearest: k out of range");
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  return dist[k - 1].second;
}

std::size_t kth_nearest(const MatrixD& rows, std::size_t query, std::size_t k) {
  std::vector<std::size_t> all(static_cast<std::size_t>(rows.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return kth_nearest(rows, all, query, k);
}

SmoteResult smote_sample_detailed(const TabularDataset& dataset, const SmoteConfig& config, std::size_t threads) {
  config.validate();
  const TabularDataset train = dataset.subset(Split::kTrain);
  const std::size_t n_train = train.num_rows();
  if (n_train <= config.k_neighbours) throw std::invalid_argument("smote: training split needs more than k rows");

  const Preprocessor pre = Preprocessor::fit(train);
  const MatrixD encoded = pre.encode(train).x;
  const bool classification = is_classification(train.schema.task);

  // Candidate pools: one per class, or the whole split for regression.
  std::vector<std::vector<std::size_t>> pools(classification ? train.schema.num_classes() : 1);
  std::vector<std::size_t> pool_of(n_train, 0);
  for (std::size_t r = 0; r < n_train; ++r) {
    pool_of[r] = classification ? static_cast<std::size_t>(train.target[r]) : 0;
    pools[pool_of[r]].push_back(r);
  }
  for (std::size_t c = 0; c < pools.size(); ++c) {
    if (!pools[c].empty() && pools[c].size() <= config.k_neighbours) {
      throw std::invalid_argument("smote: class '" + (classification ? train.schema.target_vocabulary[c] : "") +
                                  "' has " + std::to_string(pools[c].size()) + " rows, need more than k = " +
                                  std::to_string(config.k_neighbours));
    }
  }

  const auto n_out = static_cast<std::size_t>(std::llround(config.sample_proportion * static_cast<double>(n_train)));
  const std::size_t n_num = pre.num_numerical();
  const std::size_t n_feat = train.num_numerical();

  SmoteResult res;
  res.base.resize(n_out);
  res.neighbour.resize(n_out);
  res.lambda.resize(n_out);
  res.transformed.resize(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_num));
  TabularDataset& out = res.data;
  out.schema = train.schema;
  out.numerical.resize(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_feat));
  out.categorical.assign(train.num_categorical(), std::vector<std::int32_t>(n_out, 0));
  out.target.assign(n_out, 0.0);
  out.split.assign(n_out, Split::kTrain);

  auto original = [&](std::size_t row, std::size_t c) {
    return c < n_feat ? train.numerical(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) : train.target[row];
  };

  parallel_for(n_out, resolve_threads(threads), [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(config.seed, i));
    const std::size_t base = std::uniform_int_distribution<std::size_t>(0, n_train - 1)(rng);
    const double lambda =
        config.lambda_lo == config.lambda_hi
            ? config.lambda_lo
            : std::uniform_real_distribution<double>(config.lambda_lo, config.lambda_hi)(rng);
    const std::size_t nb = kth_nearest(encoded, pools[pool_of[base]], base, config.k_neighbours);
    res.base[i] = base;
    res.neighbour[i] = nb;
    res.lambda[i] = lambda;

    const auto ri = static_cast<Eigen::Index>(i);
    for (std::size_t c = 0; c < n_num; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const double a = encoded(static_cast<Eigen::Index>(base), ci);
      const double b = encoded(static_cast<Eigen::Index>(nb), ci);
      const double z = (1.0 - lambda) * a + lambda * b;
      res.transformed(ri, ci) = z;
      // Endpoints copy the source value so lambda in {0, 1} reproduces real rows exactly.
      double v;
      if (lambda == 0.0) {
        v = original(base, c);
      } else if (lambda == 1.0) {
        v = original(nb, c);
      } else {
        v = pre.transforms()[c].inverse(z);
      }
      if (c < n_feat) {
        out.numerical(ri, ci) = v;
      } else {
        out.target[i] = v;
      }
    }
    const std::size_t src = lambda <= 0.5 ? base : nb;
    for (std::size_t f = 0; f < train.num_categorical(); ++f) out.categorical[f][i] = train.categorical[f][src];
    if (classification) out.target[i] = train.target[base];
  });
  out.validate();
  return res;
}

TabularDataset smote_sample(const TabularDataset& dataset, const SmoteConfig& config, std::size_t threads) {
  return smote_sample_detailed(dataset, config, threads).data;
}

}  // namespace tabsynth
