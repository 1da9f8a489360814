#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "support/toy_data.hpp"
#include "tabsynth/errors.hpp"
#include "tabsynth/metrics.hpp"

namespace tabsynth {
namespace {

// Straightforward oracles kept separate from the library implementation.
double f1_oracle(const std::vector<int>& t, const std::vector<int>& p) {
  std::set<int> labels(t.begin(), t.end());
  labels.insert(p.begin(), p.end());
  double sum = 0.0;
  for (int c : labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp += t[i] == c && p[i] == c;
      fp += t[i] != c && p[i] == c;
      fn += t[i] == c && p[i] != c;
    }
    sum += tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
  }
  return sum / static_cast<double>(labels.size());
}

double entropy_oracle(const std::map<int, double>& counts) {
  double n = 0, h = 0;
  for (const auto& [k, c] : counts) n += c;
  for (const auto& [k, c] : counts) {
    if (c > 0) h -= c / n * std::log(c / n);
  }
  return h;
}

double theils_oracle(const std::vector<int>& y, const std::vector<int>& x) {
  std::map<int, double> py;
  std::map<int, std::map<int, double>> by_x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    py[y[i]] += 1;
    by_x[x[i]][y[i]] += 1;
  }
  const double hy = entropy_oracle(py);
  if (hy == 0) return 0;
  double hyx = 0;
  for (const auto& [k, m] : by_x) {
    double nx = 0;
    for (const auto& [kk, c] : m) nx += c;
    hyx += nx / static_cast<double>(y.size()) * entropy_oracle(m);
  }
  return (hy - hyx) / hy;
}

MatrixD points(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixD m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(F1, HandComputedExample) {
  // class 0: P=1, R=1/2 -> 2/3; class 1: P=2/3, R=1 -> 4/5
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  EXPECT_NEAR(f1_score(t, p), (2.0 / 3.0 + 0.8) / 2.0, 1e-12);
}

TEST(F1, SymmetricBinaryErrors) {
  // One TP, FP and FN per class: precision = recall = 1/2.
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 0, 1};
  EXPECT_NEAR(f1_score(t, p), 0.5, 1e-15);
}

TEST(F1, PerfectAndUnionOfLabels) {
  const std::vector<int> t{0, 1, 2, 2};
  EXPECT_DOUBLE_EQ(f1_score(t, t), 1.0);
  // A predicted label absent from y_true still counts as a class with F1 0.
  const std::vector<int> p{0, 1, 2, 3};
  EXPECT_NEAR(f1_score(t, p), (1.0 + 1.0 + 2.0 / 3.0 + 0.0) / 4.0, 1e-12);
}

TEST(F1, LengthMismatch) {
  const std::vector<int> t{0, 1}, p{0};
  EXPECT_THROW(f1_score(t, p), DimensionError);
}

TEST(R2, Examples) {
  const std::vector<double> y{1, 2, 3};
  EXPECT_DOUBLE_EQ(r2_score(y, y), 1.0);
  const std::vector<double> mean{2, 2, 2};
  EXPECT_NEAR(r2_score(y, mean), 0.0, 1e-15);
  const std::vector<double> p{3, 2, 1};
  EXPECT_NEAR(r2_score(y, p), 1.0 - 8.0 / 2.0, 1e-12);
  const std::vector<double> flat{4, 4, 4};
  EXPECT_THROW(r2_score(flat, y), UndefinedScoreError);
}

TEST(Median, OddAndEven) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Dcr, Examples) {
  EXPECT_DOUBLE_EQ(dcr(points({{0, 0}}), points({{3, 4}})), 5.0);
  const MatrixD real = points({{0, 0}, {1, 1}, {5, 5}});
  EXPECT_DOUBLE_EQ(dcr(real, real), 0.0);
  EXPECT_THROW(dcr(real, points({{1, 2, 3}})), DimensionError);
}

TEST(Dcr, Properties) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixD real(30, 3), synth(25, 3);
    for (Eigen::Index i = 0; i < real.size(); ++i) real.data()[i] = z(rng);
    for (Eigen::Index i = 0; i < synth.size(); ++i) synth.data()[i] = z(rng);
    const double base = dcr(real, synth, 1);
    EXPECT_GE(base, 0.0);

    // Brute-force oracle.
    std::vector<double> mins;
    for (Eigen::Index s = 0; s < synth.rows(); ++s) {
      double best = INFINITY;
      for (Eigen::Index r = 0; r < real.rows(); ++r) best = std::min(best, (real.row(r) - synth.row(s)).norm());
      mins.push_back(best);
    }
    std::sort(mins.begin(), mins.end());
    EXPECT_NEAR(base, mins[12], 1e-12);

    // Permuting the synthetic rows or the thread count does not matter.
    MatrixD perm = synth.colwise().reverse();
    EXPECT_DOUBLE_EQ(dcr(real, perm, 4), base);

    // Adding a copy of a synthetic row to the real set never increases DCR.
    MatrixD more(real.rows() + 1, 3);
    more << real, synth.row(trial % synth.rows());
    EXPECT_LE(dcr(more, synth), base);
  }
}

TEST(TheilsU, TableExample) {
  // rows = x, cols = y
  EXPECT_NEAR(theils_u_table({{2, 1}, {0, 1}}).value, 0.3113, 1e-4);
}

TEST(TheilsU, SelfAndIndependence) {
  const std::vector<std::int32_t> x{0, 1, 2, 0, 1, 2};
  EXPECT_DOUBLE_EQ(theils_u(x, x).value, 1.0);
  const std::vector<std::int32_t> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  EXPECT_NEAR(theils_u(a, b).value, 0.0, 1e-15);
  const std::vector<std::int32_t> constant{1, 1, 1, 1};
  const auto d = theils_u(constant, b);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.value, 0.0);
}

TEST(CorrelationRatio, Endpoints) {
  const std::vector<std::int32_t> g{0, 0, 1, 1};
  EXPECT_NEAR(correlation_ratio(g, std::vector<double>{1, 1, 3, 3}).value, 1.0, 1e-15);
  EXPECT_NEAR(correlation_ratio(g, std::vector<double>{1, 3, 1, 3}).value, 0.0, 1e-15);
  EXPECT_TRUE(correlation_ratio(g, std::vector<double>{2, 2, 2, 2}).degenerate);
}

TEST(Pearson, ExamplesAndDegenerate) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(pearson(x, std::vector<double>{2, 4, 6, 8}).value, 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, std::vector<double>{8, 6, 4, 2}).value, -1.0, 1e-15);
  const auto d = pearson(x, std::vector<double>{5, 5, 5, 5});
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.value, 0.0);
}

TEST(Metrics, RandomInstancesAgreeWithOracles) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 40;
    const int k = 2 + static_cast<int>(rng() % 4);
    std::vector<int> t(n), p(n);
    std::vector<std::int32_t> y(n), x(n);
    std::vector<double> v(n);
    std::normal_distribution<double> z;
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(rng() % k);
      p[i] = static_cast<int>(rng() % k);
      y[i] = static_cast<std::int32_t>(rng() % k);
      x[i] = static_cast<std::int32_t>(rng() % 3);
      v[i] = z(rng) + x[i];
    }
    EXPECT_NEAR(f1_score(t, p), f1_oracle(t, p), 1e-12);
    const double u = theils_u(y, x).value;
    EXPECT_NEAR(u, theils_oracle(std::vector<int>(y.begin(), y.end()), std::vector<int>(x.begin(), x.end())), 1e-12);
    EXPECT_GE(u, 0.0);
    EXPECT_LE(u, 1.0);
    const double eta = correlation_ratio(x, v).value;
    EXPECT_GE(eta, 0.0);
    EXPECT_LE(eta, 1.0);
    const double r = pearson(v, std::vector<double>(t.begin(), t.end())).value;
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(CorrelationMatrix, LayoutAndDiff) {
  const auto a = testing::toy_mixture(300, 1);
  const auto m = correlation_matrix(a);
  ASSERT_EQ(m.columns, (std::vector<std::string>{"x", "c", "y"}));
  EXPECT_EQ(m.categorical, (std::vector<bool>{false, true, true}));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(m.values(i, i), 1.0, 1e-12);
  const auto d = corr_diff(a, a);
  EXPECT_EQ(d.values.cwiseAbs().maxCoeff(), 0.0);
  const auto b = testing::toy_mixture(300, 2);
  const auto d2 = corr_diff(a, b);
  EXPECT_GT(d2.values.maxCoeff(), 0.0);
  EXPECT_LE(d2.values.maxCoeff(), 2.0);
}

TEST(Histogram, IdenticalSumsAndClamping) {
  const auto real = testing::toy_mixture(200, 3);
  const auto h = histogram_export(real, real, 10);
  ASSERT_EQ(h.size(), 3u);
  for (const auto& f : h) {
    EXPECT_EQ(f.real, f.synthetic);
    std::size_t total = 0;
    for (auto c : f.real) total += c;
    EXPECT_EQ(total, 200u);
  }
  EXPECT_EQ(h[0].edges.size(), 11u);
  EXPECT_EQ(h[1].labels, (std::vector<std::string>{"a", "b", "c"}));

  TabularDataset synth = real;
  synth.numerical(0, 0) = h[0].edges.front() - 100.0;
  synth.numerical(1, 0) = h[0].edges.back() + 100.0;
  const auto hc = histogram_export(real, synth, 10);
  std::size_t total = 0;
  for (auto c : hc[0].synthetic) total += c;
  EXPECT_EQ(total, 200u);
  EXPECT_GE(hc[0].synthetic.front() + hc[0].synthetic.back(), 2u);
}

TEST(Histogram, ConstantColumn) {
  auto real = testing::toy_mixture(50, 4);
  real.numerical.setConstant(3.0);
  const auto h = histogram_export(real, real, 4);
  EXPECT_DOUBLE_EQ(h[0].edges.front(), 2.5);
  EXPECT_DOUBLE_EQ(h[0].edges.back(), 3.5);
  EXPECT_THROW(histogram_export(real, real, 1), std::invalid_argument);
}

}  // namespace
}  // namespace tabsynth
