#pragma once

// Gaussian diffusion over the numerical block. Functions take the schedule
// coefficients explicitly so they can be evaluated against hand-picked
// values; the timestep-indexed overloads read them from a NoiseSchedule.

#include <cstddef>
#include <span>
#include <vector>

#include "tabsynth/schedule.hpp"

namespace tabsynth::gaussian {

// x_t = sqrt(alpha_bar) x0 + sqrt(1 - alpha_bar) eps
double q_sample(double x0, double alpha_bar, double noise);
std::vector<double> q_sample(std::span<const double> x0, double alpha_bar, std::span<const double> noise);
std::vector<double> q_sample(const NoiseSchedule& schedule, std::span<const double> x0, std::size_t t,
                             std::span<const double> noise);

// Mean squared error over all coordinates. Throws std::invalid_argument on
// empty input, DimensionError on mismatched lengths.
double mse_loss(std::span<const double> eps_true, std::span<const double> eps_pred);

// mu = (x_t - beta / sqrt(1 - alpha_bar) * eps_pred) / sqrt(alpha)
double p_mean(double x_t, double eps_pred, double alpha, double alpha_bar);

// Posterior variance ((1 - alpha_bar_prev) / (1 - alpha_bar)) * beta; zero at t = 1.
double posterior_variance(const ScheduleTerms& terms);

// x_{t-1} = mu + sigma_t z for t > 1, mu at t = 1.
double p_sample_step(const ScheduleTerms& terms, std::size_t t, double x_t, double eps_pred, double z);
std::vector<double> p_sample_step(const NoiseSchedule& schedule, std::span<const double> x_t, std::size_t t,
                                  std::span<const double> eps_pred, std::span<const double> z);

}  // namespace tabsynth::gaussian
