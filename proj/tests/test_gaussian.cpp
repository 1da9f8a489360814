#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tabsynth/errors.hpp"
#include "tabsynth/gaussian_diffusion.hpp"
#include "tabsynth/schedule.hpp"

namespace tabsynth::gaussian {
namespace {

TEST(QSample, IdentityAtFullSignal) { EXPECT_EQ(q_sample(1.7, 1.0, 0.3), 1.7); }

TEST(QSample, ClosedForm) {
  EXPECT_NEAR(q_sample(2.0, 0.25, 1.0), 0.5 * 2.0 + std::sqrt(0.75) * 1.0, 1e-15);
  EXPECT_NEAR(q_sample(2.0, 0.25, 1.0), 1.866025, 1e-6);
}

TEST(QSample, NoiselessScalesSignal) { EXPECT_NEAR(q_sample(3.0, 0.64, 0.0), 0.8 * 3.0, 1e-15); }

TEST(QSample, ShapeMismatch) {
  const std::vector<double> x0{1, 2};
  const std::vector<double> eps{1};
  EXPECT_THROW(q_sample(x0, 0.5, eps), DimensionError);
}

TEST(QSample, ForwardMarginalStatistics) {
  const auto s = NoiseSchedule::cosine(100);
  const std::size_t t = 37;
  const double abar = s.gather(t).alpha_bar;
  const double x0 = 1.3;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = q_sample(x0, abar, normal(rng));
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_LT(std::abs(mean - std::sqrt(abar) * x0), 4.0 * std::sqrt((1.0 - abar) / n));
  EXPECT_LT(std::abs(var - (1.0 - abar)) / (1.0 - abar), 0.05);
}

TEST(MseLoss, Examples) {
  const std::vector<double> a{1, 1};
  const std::vector<double> zero{0, 0};
  EXPECT_EQ(mse_loss(a, a), 0.0);
  EXPECT_EQ(mse_loss(a, zero), 1.0);
  const std::vector<double> t{0.5, -1.0, 2.0};
  const std::vector<double> p{0.1, 0.0, 1.0};
  std::vector<double> p2(3);
  for (int i = 0; i < 3; ++i) p2[i] = t[i] + 2.0 * (p[i] - t[i]);
  EXPECT_NEAR(mse_loss(t, p2), 4.0 * mse_loss(t, p), 1e-14);
  EXPECT_GE(mse_loss(t, p), 0.0);
}

TEST(MseLoss, EmptyAndMismatch) {
  const std::vector<double> empty;
  const std::vector<double> one{1};
  const std::vector<double> two{1, 2};
  EXPECT_THROW(mse_loss(empty, empty), std::invalid_argument);
  EXPECT_THROW(mse_loss(one, two), DimensionError);
}

TEST(PMean, Examples) {
  EXPECT_EQ(p_mean(0.7, 0.3, 1.0, 0.5), 0.7);
  const double expected = (1.0 - 0.1 / std::sqrt(0.55) * 0.5) / std::sqrt(0.9);
  EXPECT_NEAR(p_mean(1.0, 0.5, 0.9, 0.45), expected, 1e-15);
  EXPECT_NEAR(p_mean(1.0, 0.5, 0.9, 0.45), 0.9830256, 1e-7);
  EXPECT_NEAR(p_mean(1.2, 0.0, 0.81, 0.3), 1.2 / 0.9, 1e-15);
}

TEST(PSampleStep, LastStepDeterministic) {
  const auto s = NoiseSchedule::cosine(10);
  const auto g = s.gather(1);
  EXPECT_EQ(posterior_variance(g), 0.0);
  const double mu = p_mean(0.4, 0.2, g.alpha, g.alpha_bar);
  EXPECT_EQ(p_sample_step(g, 1, 0.4, 0.2, 5.0), mu);
}

TEST(PSampleStep, ZeroNoiseGivesMean) {
  const auto s = NoiseSchedule::cosine(10);
  const auto g = s.gather(6);
  EXPECT_EQ(p_sample_step(g, 6, 0.4, 0.2, 0.0), p_mean(0.4, 0.2, g.alpha, g.alpha_bar));
  const double sigma = std::sqrt((1.0 - g.alpha_bar_prev) / (1.0 - g.alpha_bar) * g.beta);
  EXPECT_NEAR(p_sample_step(g, 6, 0.4, 0.2, 1.5), p_mean(0.4, 0.2, g.alpha, g.alpha_bar) + sigma * 1.5, 1e-14);
}

TEST(PSampleStep, ExactNoiseRecoversSignalAtFirstStep) {
  const auto s = NoiseSchedule::cosine(50);
  const std::vector<double> x0{0.3, -1.2, 2.5};
  const std::vector<double> eps{0.7, -0.1, 1.9};
  const std::vector<double> z{3.0, 3.0, 3.0};
  const auto xt = q_sample(s, x0, 1, eps);
  const auto back = p_sample_step(s, xt, 1, eps, z);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(back[i], x0[i], 1e-6);
}

TEST(PSampleStep, OutOfRange) {
  const auto s = NoiseSchedule::cosine(10);
  const std::vector<double> v{0.0};
  EXPECT_THROW(p_sample_step(s, v, 11, v, v), std::out_of_range);
  EXPECT_THROW(p_sample_step(s, v, 0, v, v), std::out_of_range);
}

}  // namespace
}  // namespace tabsynth::gaussian
