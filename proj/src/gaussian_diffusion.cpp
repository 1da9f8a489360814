#include "tabsynth/gaussian_diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "tabsynth/errors.hpp"

namespace tabsynth::gaussian {

double q_sample(double x0, double alpha_bar, double noise) {
  return std::sqrt(alpha_bar) * x0 + std::sqrt(1.0 - alpha_bar) * noise;
}

std::vector<double> q_sample(std::span<const double> x0, double alpha_bar, std::span<const double> noise) {
  if (x0.size() != noise.size()) throw DimensionError("q_sample: x0 and noise lengths differ");
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = q_sample(x0[i], alpha_bar, noise[i]);
  return out;
}

std::vector<double> q_sample(const NoiseSchedule& schedule, std::span<const double> x0, std::size_t t,
                             std::span<const double> noise) {
  return q_sample(x0, schedule.gather(t).alpha_bar, noise);
}

double mse_loss(std::span<const double> eps_true, std::span<const double> eps_pred) {
  if (eps_true.empty()) throw std::invalid_argument("mse_loss: empty input");
  if (eps_true.size() != eps_pred.size()) throw DimensionError("mse_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < eps_true.size(); ++i) {
    const double d = eps_true[i] - eps_pred[i];
    acc += d * d;
  }
  return acc / static_cast<double>(eps_true.size());
}

double p_mean(double x_t, double eps_pred, double alpha, double alpha_bar) {
  const double beta = 1.0 - alpha;
  return (x_t - beta / std::sqrt(1.0 - alpha_bar) * eps_pred) / std::sqrt(alpha);
}

double posterior_variance(const ScheduleTerms& terms) {
  return (1.0 - terms.alpha_bar_prev) / (1.0 - terms.alpha_bar) * terms.beta;
}

double p_sample_step(const ScheduleTerms& terms, std::size_t t, double x_t, double eps_pred, double z) {
  const double mu = p_mean(x_t, eps_pred, terms.alpha, terms.alpha_bar);
  if (t == 1) return mu;
  return mu + std::sqrt(posterior_variance(terms)) * z;
}

std::vector<double> p_sample_step(const NoiseSchedule& schedule, std::span<const double> x_t, std::size_t t,
                                  std::span<const double> eps_pred, std::span<const double> z) {
  const ScheduleTerms terms = schedule.gather(t);
  if (x_t.size() != eps_pred.size() || (t > 1 && z.size() != x_t.size())) {
    throw DimensionError("p_sample_step: length mismatch");
  }
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    out[i] = p_sample_step(terms, t, x_t[i], eps_pred[i], t > 1 ? z[i] : 0.0);
  }
  return out;
}

}  // namespace tabsynth::gaussian
