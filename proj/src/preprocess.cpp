#include "tabsynth/preprocess.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tabsynth/errors.hpp"

namespace tabsynth {

Preprocessor Preprocessor::fit(const TabularDataset& train) {
  if (train.num_rows() == 0) throw std::invalid_argument("cannot fit preprocessing on an empty training split");
  train.validate();
  Preprocessor p;
  p.schema_ = train.schema;
  for (Eigen::Index c = 0; c < train.numerical.cols(); ++c) {
    const Vector<double> col = train.numerical.col(c);
    p.transforms_.push_back(QuantileTransform::fit(std::span<const double>(col.data(), col.size())));
  }
  if (!is_classification(train.schema.task)) p.transforms_.push_back(QuantileTransform::fit(train.target));
  return p;
}

Preprocessor Preprocessor::from_parts(Schema schema, std::vector<QuantileTransform> transforms) {
  const std::size_t expected = schema.numerical.size() + (is_classification(schema.task) ? 0 : 1);
  if (transforms.size() != expected) throw DataError("preprocessing state does not match the schema");
  Preprocessor p;
  p.schema_ = std::move(schema);
  p.transforms_ = std::move(transforms);
  return p;
}

std::size_t Preprocessor::encoded_width() const {
  std::size_t w = num_numerical();
  for (const auto& c : schema_.categorical) w += c.vocabulary.size();
  return w;
}

std::vector<multinomial::CategoricalFeatureSpec> Preprocessor::categorical_features() const {
  std::vector<multinomial::CategoricalFeatureSpec> out;
  std::size_t offset = num_numerical();
  for (const auto& c : schema_.categorical) {
    out.push_back({c.vocabulary.size(), offset});
    offset += c.vocabulary.size();
  }
  return out;
}

void Preprocessor::check_layout(const TabularDataset& data) const {
  if (!schema_.same_layout(data.schema)) throw DataError("dataset schema does not match the fitted preprocessing");
  data.validate();
}

std::vector<double> Preprocessor::encode_row(const TabularDataset& data, std::size_t row) const {
  std::vector<double> out(encoded_width(), 0.0);
  const auto r = static_cast<Eigen::Index>(row);
  const std::size_t n_feat = schema_.numerical.size();
  for (std::size_t c = 0; c < n_feat; ++c) out[c] = transforms_[c].transform(data.numerical(r, static_cast<Eigen::Index>(c)));
  if (!is_classification(schema_.task)) out[n_feat] = transforms_[n_feat].transform(data.target[row]);
  const auto features = categorical_features();
  for (std::size_t c = 0; c < features.size(); ++c) {
    const auto code = data.categorical[c][row];
    if (code < 0 || static_cast<std::size_t>(code) >= features[c].num_categories) {
      throw DataError("unknown category code in column '" + schema_.categorical[c].name + "'");
    }
    out[features[c].offset + static_cast<std::size_t>(code)] = 1.0;
  }
  return out;
}

EncodedBatch Preprocessor::encode(const TabularDataset& data) const {
  check_layout(data);
  EncodedBatch batch;
  batch.x.resize(static_cast<Eigen::Index>(data.num_rows()), static_cast<Eigen::Index>(encoded_width()));
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const std::vector<double> row = encode_row(data, r);
    batch.x.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
  }
  if (is_classification(schema_.task)) {
    batch.labels.reserve(data.num_rows());
    for (double y : data.target) batch.labels.push_back(static_cast<int>(y));
  }
  return batch;
}

TabularDataset Preprocessor::decode_normalized(const MatrixD& numerics,
                                               const std::vector<std::vector<std::int32_t>>& codes,
                                               std::span<const int> labels) const {
  const auto n = static_cast<std::size_t>(numerics.rows());
  if (static_cast<std::size_t>(numerics.cols()) != num_numerical() || codes.size() != schema_.categorical.size()) {
    throw DimensionError("decode: block shapes do not match the preprocessing layout");
  }
  const bool classification = is_classification(schema_.task);
  if (classification && labels.size() != n) throw std::invalid_argument("decode: one class label per row required");

  TabularDataset out;
  out.schema = schema_;
  const std::size_t n_feat = schema_.numerical.size();
  out.numerical.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_feat));
  out.target.assign(n, 0.0);
  out.split.assign(n, Split::kTrain);
  for (std::size_t r = 0; r < n; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < n_feat; ++c) {
      out.numerical(ri, static_cast<Eigen::Index>(c)) = transforms_[c].inverse(numerics(ri, static_cast<Eigen::Index>(c)));
    }
    out.target[r] = classification ? static_cast<double>(labels[r])
                                   : transforms_[n_feat].inverse(numerics(ri, static_cast<Eigen::Index>(n_feat)));
  }
  for (const auto& col : codes) {
    if (col.size() != n) throw DimensionError("decode: categorical column length mismatch");
  }
  out.categorical = codes;
  out.validate();
  return out;
}

TabularDataset Preprocessor::decode(const MatrixD& x, std::span<const int> labels) const {
  if (static_cast<std::size_t>(x.cols()) != encoded_width()) throw DimensionError("decode: wrong encoded width");
  const auto features = categorical_features();
  std::vector<std::vector<std::int32_t>> codes(features.size(), std::vector<std::int32_t>(static_cast<std::size_t>(x.rows())));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < features.size(); ++c) {
      Eigen::Index best = 0;
      x.row(r).segment(static_cast<Eigen::Index>(features[c].offset), static_cast<Eigen::Index>(features[c].num_categories)).maxCoeff(&best);
      codes[c][static_cast<std::size_t>(r)] = static_cast<std::int32_t>(best);
    }
  }
  return decode_normalized(x.leftCols(static_cast<Eigen::Index>(num_numerical())), codes, labels);
}

MatrixD Preprocessor::encode_for_distance(const TabularDataset& data) const {
  check_layout(data);
  const bool classification = is_classification(schema_.task);
  const std::size_t width = encoded_width() + (classification ? schema_.num_classes() : 0);
  MatrixD out = MatrixD::Zero(static_cast<Eigen::Index>(data.num_rows()), static_cast<Eigen::Index>(width));
  constexpr double kScale = 1.0 / std::numbers::sqrt2;
  const std::size_t n_num = num_numerical();
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    std::vector<double> row = encode_row(data, r);
    for (std::size_t c = n_num; c < row.size(); ++c) row[c] *= kScale;
    const auto ri = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < row.size(); ++c) out(ri, static_cast<Eigen::Index>(c)) = row[c];
    if (classification) out(ri, static_cast<Eigen::Index>(encoded_width() + static_cast<std::size_t>(data.target[r]))) = kScale;
  }
  return out;
}

MatrixD Preprocessor::encode_features(const TabularDataset& data) const {
  check_layout(data);
  const std::size_t n_feat = schema_.numerical.size();
  const std::size_t n_num = num_numerical();
  const std::size_t width = encoded_width() - (n_num - n_feat);
  MatrixD out(static_cast<Eigen::Index>(data.num_rows()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const std::vector<double> row = encode_row(data, r);
    const auto ri = static_cast<Eigen::Index>(r);
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < n_feat; ++c) out(ri, k++) = row[c];
    for (std::size_t c = n_num; c < row.size(); ++c) out(ri, k++) = row[c];
  }
  return out;
}

}  // namespace tabsynth
