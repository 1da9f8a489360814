#include "toy_data.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace tabsynth::testing {

double ToyMixture::numeric_mean() { return (1.0 - kPositive) * kMean[0] + kPositive * kMean[1]; }

double ToyMixture::numeric_std() {
  const double second = (1.0 - kPositive) * (kStd[0] * kStd[0] + kMean[0] * kMean[0]) +
                        kPositive * (kStd[1] * kStd[1] + kMean[1] * kMean[1]);
  const double m = numeric_mean();
  return std::sqrt(second - m * m);
}

double ToyMixture::category_marginal(std::size_t k) {
  return (1.0 - kPositive) * kCat[0][k] + kPositive * kCat[1][k];
}

Metadata toy_metadata(std::uint64_t split_seed) {
  return parse_metadata(R"({"task": "binclass",
    "columns": [{"name": "x", "kind": "numerical"},
                {"name": "c", "kind": "categorical"},
                {"name": "y", "kind": "target"}],
    "split_seed": )" + std::to_string(split_seed) + "}");
}

std::string toy_mixture_csv(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution label(ToyMixture::kPositive);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::ostringstream out;
  out.precision(17);
  out << "x,c,y\n";
  static const char* kNames[3] = {"a", "b", "c"};
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = label(rng) ? 1 : 0;
    const double x = ToyMixture::kMean[y] + ToyMixture::kStd[y] * normal(rng);
    std::discrete_distribution<int> cat({ToyMixture::kCat[y][0], ToyMixture::kCat[y][1], ToyMixture::kCat[y][2]});
    out << x << ',' << kNames[cat(rng)] << ',' << y << '\n';
  }
  return out.str();
}

TabularDataset toy_mixture(std::size_t rows, std::uint64_t seed) {
  return parse_csv_dataset(toy_mixture_csv(rows, seed), toy_metadata(seed));
}

std::string small_mixed_csv(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> three(0, 2);
  std::uniform_int_distribution<int> two(0, 1);
  std::ostringstream out;
  out.precision(17);
  out << "age,colour,income,\"shape, kind\",label,split\n";
  static const char* kColours[3] = {"red", "green", "blue"};
  static const char* kShapes[2] = {"round", "sq\"uare"};
  static const char* kLabels[3] = {"lo", "mid", "hi"};
  static const char* kSplits[3] = {"train", "validation", "test"};
  for (std::size_t i = 0; i < rows; ++i) {
    const int label = three(rng);
    const double age = 40.0 + 10.0 * label + 5.0 * normal(rng);
    const double income = std::exp(10.0 + 0.5 * normal(rng));
    const int split = i % 10 < 7 ? 0 : (i % 10 < 8 ? 1 : 2);
    std::string shape = kShapes[two(rng)];
    if (shape.find('"') != std::string::npos) shape = "\"sq\"\"uare\"";
    out << age << ',' << kColours[(label + three(rng) % 2) % 3] << ',' << income << ',' << shape << ','
        << kLabels[label] << ',' << kSplits[split] << '\n';
  }
  return out.str();
}

Metadata small_mixed_metadata() {
  return parse_metadata(R"({"task": "multiclass",
    "columns": [{"name": "age", "kind": "numerical"},
                {"name": "colour", "kind": "categorical"},
                {"name": "income", "kind": "numerical"},
                {"name": "shape, kind", "kind": "categorical"},
                {"name": "label", "kind": "target"}],
    "split_column": "split"})");
}

}  // namespace tabsynth::testing
