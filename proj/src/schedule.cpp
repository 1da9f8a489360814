#include "tabsynth/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tabsynth {

NoiseSchedule NoiseSchedule::cosine(std::size_t num_timesteps, double offset, double max_beta) {
  if (num_timesteps == 0) throw std::invalid_argument("noise schedule needs at least one timestep");
  if (!(max_beta > 0.0 && max_beta < 1.0)) throw std::invalid_argument("max_beta must lie in (0, 1)");

  const double T = static_cast<double>(num_timesteps);
  auto f = [&](double t) {
    const double c = std::cos(((t / T + offset) / (1.0 + offset)) * std::numbers::pi / 2.0);
    return c * c;
  };

  NoiseSchedule s;
  s.offset_ = offset;
  s.max_beta_ = max_beta;
  s.beta_.resize(num_timesteps);
  s.alpha_.resize(num_timesteps);
  s.alpha_bar_.resize(num_timesteps);
  s.alpha_bar_prev_.resize(num_timesteps);

  const double f0 = f(0.0);
  double running = 1.0;
  for (std::size_t i = 0; i < num_timesteps; ++i) {
    const double t = static_cast<double>(i + 1);
    const double ratio = (f(t) / f0) / (f(t - 1.0) / f0);
    double beta = 1.0 - ratio;
    if (beta > max_beta) beta = max_beta;
    s.beta_[i] = beta;
    s.alpha_[i] = 1.0 - beta;
    s.alpha_bar_prev_[i] = running;
    running *= s.alpha_[i];
    s.alpha_bar_[i] = running;
  }
  return s;
}

ScheduleTerms NoiseSchedule::gather(std::size_t t) const {
  if (t < 1 || t > beta_.size()) {
    throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " +
                            std::to_string(beta_.size()) + "]");
  }
  const std::size_t i = t - 1;
  return {beta_[i], alpha_[i], alpha_bar_[i], alpha_bar_prev_[i]};
}

}  // namespace tabsynth
