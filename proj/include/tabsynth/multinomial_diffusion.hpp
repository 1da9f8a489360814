#pragma once

// Multinomial diffusion for one categorical feature with K categories.
// Distributions are carried as natural-log probabilities clamped at
// kLogClamp; the one-hot overloads validate their inputs, the class-index
// overloads are the training/sampling hot path.

#include <cstddef>
#include <span>
#include <vector>

#include "tabsynth/schedule.hpp"

namespace tabsynth::multinomial {

inline constexpr double kLogClamp = -70.0;

struct LogCategorical {
  std::vector<double> log_probs;

  std::size_t size() const { return log_probs.size(); }
  std::vector<double> probs() const;
};

// The contiguous slice [offset, offset + num_categories) of the model
// input/output vector owned by one categorical feature.
struct CategoricalFeatureSpec {
  std::size_t num_categories = 0;
  std::size_t offset = 0;
};

double logsumexp(std::span<const double> v);

// Returns the hot index of a one-hot vector; throws std::invalid_argument
// if v is not one-hot.
std::size_t onehot_index(std::span<const double> v);

// q(x_t | x_0) = Cat(alpha_bar x0 + (1 - alpha_bar)/K)
LogCategorical q_xt_given_x0(std::span<const double> x0_onehot, double alpha_bar);
LogCategorical q_xt_given_x0(const NoiseSchedule& schedule, std::span<const double> x0_onehot, std::size_t t);
LogCategorical q_xt_given_x0(std::size_t num_categories, std::size_t x0_class, double alpha_bar);

// q(x_{t-1} | x_t, x_0) proportional to
// [alpha x_t + (1 - alpha)/K] * [alpha_bar_prev x0 + (1 - alpha_bar_prev)/K].
// x0 may be any probability vector (a network prediction), given in log space
// for the index overload.
LogCategorical q_posterior(std::span<const double> xt_onehot, std::span<const double> x0_probs, double alpha,
                           double alpha_bar_prev);
LogCategorical q_posterior(const NoiseSchedule& schedule, std::span<const double> xt_onehot,
                           std::span<const double> x0_probs, std::size_t t);
LogCategorical q_posterior_log(std::size_t xt_class, std::span<const double> log_x0, double alpha,
                               double alpha_bar_prev);

// Reverse kernel: x0_hat = softmax(logits); posterior at x0_hat for t >= 2,
// Cat(x0_hat) at t = 1.
LogCategorical p_theta_step(const NoiseSchedule& schedule, std::span<const double> logits,
                            std::span<const double> xt_onehot, std::size_t t);
LogCategorical p_theta_step(const NoiseSchedule& schedule, std::span<const double> logits, std::size_t xt_class,
                            std::size_t t);

// KL(p || q) in nats.
double kl_divergence(const LogCategorical& p, const LogCategorical& q);

// L_t for t >= 2 (KL between true posterior and reverse kernel) and the
// decoder negative log-likelihood -log x0_hat[x0] for t = 1.
double kl_term(const NoiseSchedule& schedule, std::span<const double> x0_onehot, std::span<const double> xt_onehot,
               std::span<const double> logits, std::size_t t);

struct TermWithGrad {
  double value = 0.0;
  std::vector<double> grad_logits;
};

// kl_term together with its gradient with respect to the logits.
TermWithGrad kl_term_with_grad(const NoiseSchedule& schedule, std::size_t x0_class, std::size_t xt_class,
                               std::span<const double> logits, std::size_t t);

// Prior-matching term KL(q(x_T | x_0) || Cat(1/K)); has no learnable
// parameters and is reported for diagnostics only.
double prior_kl(const NoiseSchedule& schedule, std::size_t num_categories, std::size_t x0_class);

// Inverse-CDF draw with u in [0, 1); u = 0 picks the first category with
// nonzero probability.
std::size_t sample_category(const LogCategorical& dist, double u);

}  // namespace tabsynth::multinomial
