#pragma once

// Built-in learners for ML-efficiency scoring. All of them standardize the
// input features with statistics from the training set.
//
//   logistic-regression  softmax regression, full-batch gradient descent,
//                        500 iterations, lr 0.1, zero init
//   ridge-regression     closed form, alpha = 1, unpenalized intercept;
//                        classification regresses one-hot targets and takes the argmax
//   small-mlp            2 hidden ReLU layers of 64 units, Adam lr 1e-3,
//                        1000 minibatch steps of 128 rows

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "tabsynth/dataset.hpp"
#include "tabsynth/matrix.hpp"

namespace tabsynth {

enum class LearnerKind { kLogistic, kRidge, kMlp };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner(std::string_view s);

class Learner {
 public:
  virtual ~Learner() = default;
  // `y` holds class codes for classification and values for regression.
  virtual void fit(const MatrixD& x, const std::vector<double>& y) = 0;
  virtual std::vector<double> predict(const MatrixD& x) const = 0;
};

// num_classes = 0 selects regression. Logistic regression is
// classification-only (std::invalid_argument otherwise).
std::unique_ptr<Learner> make_learner(LearnerKind kind, std::size_t num_classes, std::uint64_t seed);

// Trains on `train` (features from Preprocessor::encode_features fitted on
// `train`) and scores on `test`: macro-F1 for classification, R2 for
// regression. Throws DataError on a schema mismatch or when a classification
// training set holds a single class.
double ml_efficiency(const TabularDataset& train, const TabularDataset& test, LearnerKind kind,
                     std::uint64_t seed = 0);

}  // namespace tabsynth
