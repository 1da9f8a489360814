#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tabsynth/schedule.hpp"

namespace tabsynth {
namespace {

double cosine_f(double t, double T, double s = 0.008) {
  const double c = std::cos(((t / T + s) / (1.0 + s)) * std::numbers::pi / 2.0);
  return c * c;
}

TEST(Schedule, ZeroTimestepsRejected) { EXPECT_THROW(NoiseSchedule::cosine(0), std::invalid_argument); }

TEST(Schedule, AlphaBarPrevAtFirstStepIsOne) {
  for (std::size_t T : {1u, 4u, 100u}) EXPECT_EQ(NoiseSchedule::cosine(T).gather(1).alpha_bar_prev, 1.0);
}

TEST(Schedule, FirstBetaMatchesDirectFormula) {
  const auto s = NoiseSchedule::cosine(4);
  EXPECT_NEAR(s.gather(1).beta, 1.0 - cosine_f(1, 4) / cosine_f(0, 4), 1e-10);
}

TEST(Schedule, MatchesClippedOracleForAllSteps) {
  for (std::size_t T : {4u, 100u, 1000u}) {
    const auto s = NoiseSchedule::cosine(T);
    double abar = 1.0;
    for (std::size_t t = 1; t <= T; ++t) {
      const double beta = std::min(0.999, 1.0 - cosine_f(double(t), double(T)) / cosine_f(double(t - 1), double(T)));
      abar *= 1.0 - beta;
      const auto g = s.gather(t);
      ASSERT_NEAR(g.beta, beta, 1e-12) << "T=" << T << " t=" << t;
      ASSERT_NEAR(g.alpha_bar, abar, 1e-12 * std::max(1.0, abar));
    }
  }
}

TEST(Schedule, LongScheduleEndsNearZero) {
  const auto s = NoiseSchedule::cosine(1000);
  EXPECT_LT(s.gather(1000).alpha_bar, 1e-3);
  EXPECT_EQ(s.gather(1000).alpha_bar, s.alpha_bar().back());
}

TEST(Schedule, Invariants) {
  for (std::size_t T : {1u, 2u, 5u, 50u, 1000u}) {
    const auto s = NoiseSchedule::cosine(T);
    for (std::size_t t = 1; t <= T; ++t) {
      const auto g = s.gather(t);
      EXPECT_GT(g.beta, 0.0);
      EXPECT_LE(g.beta, 0.999);
      EXPECT_EQ(g.alpha, 1.0 - g.beta);
      EXPECT_NEAR(g.alpha_bar, g.alpha_bar_prev * g.alpha, 1e-12 * g.alpha_bar);
      if (t > 1) {
        EXPECT_LT(g.alpha_bar, s.gather(t - 1).alpha_bar);
      }
    }
  }
}

TEST(Schedule, GatherRandomStepRecurrence) {
  const auto s = NoiseSchedule::cosine(200);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(1, 200);
  for (int i = 0; i < 50; ++i) {
    const auto g = s.gather(pick(rng));
    EXPECT_NEAR(g.alpha_bar / g.alpha_bar_prev, g.alpha, 1e-12);
  }
}

TEST(Schedule, GatherOutOfRange) {
  const auto s = NoiseSchedule::cosine(10);
  EXPECT_THROW(s.gather(0), std::out_of_range);
  EXPECT_THROW(s.gather(11), std::out_of_range);
}

}  // namespace
}  // namespace tabsynth
