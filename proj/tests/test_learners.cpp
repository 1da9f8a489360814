#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support/toy_data.hpp"
#include "tabsynth/errors.hpp"
#include "tabsynth/learners.hpp"

namespace tabsynth {
namespace {

// Two well separated clusters; the categorical column agrees with the label.
TabularDataset separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.5);
  std::ostringstream csv;
  csv << "x,c,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    csv << (y ? 4.0 : -4.0) + z(rng) << ',' << (y ? "b" : "a") << ',' << y << '\n';
  }
  auto data = parse_csv_dataset(csv.str(), testing::toy_metadata(seed));
  data.split.assign(n, Split::kTrain);
  return data;
}

TabularDataset linear_regression(std::size_t n, std::uint64_t seed) {
  const auto meta = parse_metadata(R"({"task": "regression", "columns": [
      {"name": "a", "kind": "numerical"}, {"name": "b", "kind": "numerical"},
      {"name": "y", "kind": "target"}]})");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::ostringstream csv;
  csv << "a,b,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z(rng), b = z(rng);
    csv << a << ',' << b << ',' << 2 * a - b + 0.05 * z(rng) << '\n';
  }
  auto data = parse_csv_dataset(csv.str(), meta);
  data.split.assign(n, Split::kTrain);
  return data;
}

TEST(Learners, Names) {
  for (auto k : {LearnerKind::kLogistic, LearnerKind::kRidge, LearnerKind::kMlp}) {
    EXPECT_EQ(parse_learner(to_string(k)), k);
  }
  EXPECT_THROW(parse_learner("svm"), std::invalid_argument);
  EXPECT_THROW(make_learner(LearnerKind::kLogistic, 0, 0), std::invalid_argument);
}

TEST(Learners, SeparableClassification) {
  const auto train = separable(300, 1);
  const auto test = separable(100, 2);
  for (auto k : {LearnerKind::kLogistic, LearnerKind::kRidge, LearnerKind::kMlp}) {
    EXPECT_GE(ml_efficiency(train, test, k, 3), 0.95) << to_string(k);
  }
}

TEST(Learners, LinearRegression) {
  const auto train = linear_regression(400, 1);
  const auto test = linear_regression(100, 2);
  EXPECT_GT(ml_efficiency(train, test, LearnerKind::kRidge), 0.95);
  EXPECT_GT(ml_efficiency(train, test, LearnerKind::kMlp), 0.8);
}

TEST(Learners, SingleClassTrainingRejected) {
  auto train = separable(40, 1);
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < train.num_rows(); ++i) {
    if (train.target[i] == 0.0) zeros.push_back(i);
  }
  EXPECT_THROW(ml_efficiency(train.select(zeros), separable(10, 2), LearnerKind::kLogistic), DataError);
}

TEST(Learners, SeedDeterminism) {
  const auto train = testing::toy_mixture(300, 5);
  const auto test = testing::toy_mixture(100, 6);
  EXPECT_EQ(ml_efficiency(train, test, LearnerKind::kMlp, 4), ml_efficiency(train, test, LearnerKind::kMlp, 4));
}

}  // namespace
}  // namespace tabsynth
