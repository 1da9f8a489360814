#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/gradcheck.hpp"
#include "tabsynth/errors.hpp"
#include "tabsynth/nn.hpp"

namespace tabsynth::nn {
namespace {

MatrixD mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixD m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

MatrixD random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixD m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

TEST(DenseLayer, IdentityWeights) {
  DenseLayer<double> layer(2, 2);
  layer.weight = MatrixD::Identity(2, 2);
  const MatrixD y = forward_dense(layer, mat({{1, 2}}));
  EXPECT_EQ(y, mat({{1, 2}}));
}

TEST(DenseLayer, HandMultiply) {
  DenseLayer<double> layer(2, 2);
  layer.weight = mat({{2, 0}, {0, 3}});
  layer.bias = mat({{1, 1}});
  EXPECT_EQ(forward_dense(layer, mat({{1, 1}})), mat({{3, 4}}));
}

TEST(DenseLayer, ZeroWeightsBroadcastBias) {
  DenseLayer<double> layer(3, 2);
  layer.bias = mat({{0.5, -2}});
  const MatrixD y = forward_dense(layer, mat({{1, 2, 3}, {-4, 5, 6}}));
  EXPECT_EQ(y, mat({{0.5, -2}, {0.5, -2}}));
}

TEST(DenseLayer, ShapeMismatchThrows) {
  DenseLayer<double> layer(3, 2);
  EXPECT_THROW(forward_dense(layer, mat({{1, 2}})), DimensionError);
}

TEST(DenseLayer, UniformInitWithinFanInBound) {
  std::mt19937_64 rng(3);
  const auto layer = DenseLayer<double>::uniform_init(16, 8, rng);
  const double bound = std::sqrt(1.0 / 16.0);
  EXPECT_LE(layer.weight.cwiseAbs().maxCoeff(), bound);
  EXPECT_LE(layer.bias.cwiseAbs().maxCoeff(), bound);
  EXPECT_GT(layer.weight.cwiseAbs().maxCoeff(), 0.5 * bound);
}

TEST(Activations, ReluSiluValues) {
  EXPECT_EQ(relu<double>(mat({{-3, 0, 2}})), mat({{0, 0, 2}}));
  const MatrixD s = silu<double>(mat({{0, 1}}));
  EXPECT_EQ(s(0, 0), 0.0);
  EXPECT_NEAR(s(0, 1), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(Activations, SoftmaxGroups) {
  const std::vector<Group> groups{{0, 2}, {2, 3}};
  const MatrixD x = mat({{0, 0, 1, 2, 3}, {100, -100, 0, 0, 0}});
  const MatrixD p = softmax_groups<double>(x, groups);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.5);
  for (Index r = 0; r < 2; ++r) {
    EXPECT_NEAR(p.row(r).segment(0, 2).sum(), 1.0, 1e-12);
    EXPECT_NEAR(p.row(r).segment(2, 3).sum(), 1.0, 1e-12);
  }
  const MatrixD lp = log_softmax_groups<double>(x, groups);
  EXPECT_NEAR(lp(0, 4), std::log(p(0, 4)), 1e-12);
  EXPECT_TRUE(lp.allFinite());
}

TEST(Activations, EmptyGroupRejected) {
  const std::vector<Group> groups{{0, 0}};
  EXPECT_THROW(softmax_groups<double>(mat({{1, 2}}), groups), std::invalid_argument);
}

TEST(Activations, DropoutInertAtZeroRate) {
  std::mt19937_64 rng(1);
  MatrixD mask;
  const MatrixD x = mat({{1, -2, 3}});
  EXPECT_EQ(dropout(x, 0.0, rng, mask), x);
}

TEST(Activations, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  MatrixD x = random_matrix(3, 4, rng);
  const MatrixD w = random_matrix(3, 4, rng);  // loss = sum(w .* f(x))
  for (int which = 0; which < 2; ++which) {
    auto f = [&](const MatrixD& in) { return which == 0 ? relu<double>(in) : silu<double>(in); };
    const MatrixD analytic = which == 0 ? relu_backward<double>(x, w) : silu_backward<double>(x, w);
    std::vector<MatrixD*> params{&x};
    const auto res = testing::check_gradients(params, {analytic}, [&] { return f(x).cwiseProduct(w).sum(); });
    EXPECT_LT(res.max_rel_error, 1e-4) << (which == 0 ? "relu" : "silu");
  }
}

TEST(Mlp, BackwardWithoutForwardThrows) {
  std::mt19937_64 rng(1);
  const std::vector<Index> widths{3, 4, 2};
  Mlp<double> mlp(widths, Activation::kRelu, rng);
  EXPECT_THROW(mlp.backward(Mlp<double>::Tape{}, MatrixD::Zero(1, 2)), StateError);
}

TEST(Mlp, SingleLayerMseGradCheck) {
  std::mt19937_64 rng(7);
  const std::vector<Index> widths{3, 2};
  Mlp<double> mlp(widths, Activation::kNone, rng);
  const MatrixD x = random_matrix(5, 3, rng);
  const MatrixD target = random_matrix(5, 2, rng);
  auto loss = [&] { return (mlp.forward(x) - target).squaredNorm() / 10.0; };
  Mlp<double>::Tape tape;
  const MatrixD out = mlp.forward(x, &tape);
  const auto grads = mlp.backward(tape, 2.0 * (out - target) / 10.0);
  const auto res = testing::check_gradients(mlp.parameters(), grads, loss);
  EXPECT_LT(res.max_rel_error, 1e-4);
}

TEST(Mlp, TwoLayerReluGradCheck) {
  std::mt19937_64 rng(11);
  const std::vector<Index> widths{3, 6, 2};
  Mlp<double> mlp(widths, Activation::kRelu, rng);
  const MatrixD x = random_matrix(4, 3, rng);
  const MatrixD w = random_matrix(4, 2, rng);
  Mlp<double>::Tape tape;
  mlp.forward(x, &tape);
  MatrixD dx;
  const auto grads = mlp.backward(tape, w, &dx);
  const auto res = testing::check_gradients(mlp.parameters(), grads, [&] { return mlp.forward(x).cwiseProduct(w).sum(); });
  EXPECT_LT(res.max_rel_error, 1e-4);

  MatrixD xv = x;
  std::vector<MatrixD*> in{&xv};
  const auto res_x = testing::check_gradients(in, {dx}, [&] { return mlp.forward(xv).cwiseProduct(w).sum(); });
  EXPECT_LT(res_x.max_rel_error, 1e-4);
}

TEST(Mlp, ZeroLossGradientGivesZeroGrads) {
  std::mt19937_64 rng(2);
  const std::vector<Index> widths{3, 5, 2};
  Mlp<double> mlp(widths, Activation::kSilu, rng);
  Mlp<double>::Tape tape;
  mlp.forward(random_matrix(4, 3, rng), &tape);
  for (const auto& g : mlp.backward(tape, MatrixD::Zero(4, 2))) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Adam<double> adam({.lr = 0.1});
  MatrixD p = mat({{1, -2}, {3, 4}});
  const MatrixD before = p;
  std::vector<MatrixD*> params{&p};
  const std::vector<MatrixD> grads{MatrixD::Zero(2, 2)};
  for (int i = 0; i < 3; ++i) adam.step(params, grads);
  EXPECT_EQ(p, before);
  EXPECT_EQ(adam.step_count(), 3);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam<double> adam({.lr = 0.1, .eps = 1e-8});
  MatrixD p = mat({{0.0}});
  std::vector<MatrixD*> params{&p};
  const double g = 0.37;
  adam.step(params, std::vector<MatrixD>{mat({{g}})});
  // m_hat = g, v_hat = g^2 after bias correction.
  EXPECT_NEAR(p(0, 0), -0.1 * g / (g + 1e-8), 1e-12);
}

TEST(Adam, ConstantGradientStepsDoNotGrow) {
  Adam<double> adam({.lr = 0.1});
  MatrixD p = mat({{1.0}});
  std::vector<MatrixD*> params{&p};
  const std::vector<MatrixD> grads{mat({{2.5}})};
  adam.step(params, grads);
  const double d1 = std::abs(p(0, 0) - 1.0);
  const double mid = p(0, 0);
  adam.step(params, grads);
  const double d2 = std::abs(p(0, 0) - mid);
  EXPECT_LE(d2, d1 * (1.0 + 1e-6));
}

TEST(Adam, ShapeMismatchThrows) {
  Adam<double> adam;
  MatrixD p = MatrixD::Zero(2, 2);
  std::vector<MatrixD*> params{&p};
  EXPECT_THROW(adam.step(params, std::vector<MatrixD>{MatrixD::Zero(1, 2)}), DimensionError);
}

}  // namespace
}  // namespace tabsynth::nn
