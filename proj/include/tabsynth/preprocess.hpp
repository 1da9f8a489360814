#pragma once

// Encoding between TabularDataset rows and the model's input space:
//   [quantile-normalized numerics (+ regression target) | one-hot categoricals]

#include <cstddef>
#include <span>
#include <vector>

#include "tabsynth/dataset.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/multinomial_diffusion.hpp"
#include "tabsynth/quantile.hpp"

namespace tabsynth {

struct EncodedBatch {
  MatrixD x;                // rows x (N_num + sum K_i)
  std::vector<int> labels;  // class codes; empty for regression
};

class Preprocessor {
 public:
  // Fits one quantile transform per numerical column (and the regression
  // target) on `train`. Throws std::invalid_argument for an empty split.
  static Preprocessor fit(const TabularDataset& train);
  static Preprocessor from_parts(Schema schema, std::vector<QuantileTransform> transforms);

  const Schema& schema() const { return schema_; }
  const std::vector<QuantileTransform>& transforms() const { return transforms_; }

  // Width of the Gaussian block (numerical features plus the regression target).
  std::size_t num_numerical() const { return transforms_.size(); }
  std::size_t encoded_width() const;
  std::vector<multinomial::CategoricalFeatureSpec> categorical_features() const;

  // Throws DataError when `data` does not share this schema's layout or
  // carries codes outside a vocabulary.
  EncodedBatch encode(const TabularDataset& data) const;
  std::vector<double> encode_row(const TabularDataset& data, std::size_t row) const;

  // Inverse of encode: inverse quantile on the numerical block and argmax on
  // each categorical slice. `labels` supplies class codes for classification.
  TabularDataset decode(const MatrixD& x, std::span<const int> labels) const;
  TabularDataset decode_normalized(const MatrixD& numerics, const std::vector<std::vector<std::int32_t>>& codes,
                                   std::span<const int> labels) const;

  // Quantile numerics (incl. regression target) followed by one-hot/sqrt(2)
  // categoricals and, for classification, the one-hot/sqrt(2) label. Two rows
  // differing in one category are at distance 1 along that feature.
  MatrixD encode_for_distance(const TabularDataset& data) const;

  // Learner inputs: quantile numerics without the target, then one-hot categoricals.
  MatrixD encode_features(const TabularDataset& data) const;

 private:
  void check_layout(const TabularDataset& data) const;

  Schema schema_;
  std::vector<QuantileTransform> transforms_;
};

}  // namespace tabsynth
