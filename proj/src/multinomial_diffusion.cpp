#include "tabsynth/multinomial_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tabsynth/errors.hpp"

namespace tabsynth::multinomial {
namespace {

double clamp_log(double v) { return std::isnan(v) ? kLogClamp : std::max(v, kLogClamp); }

double log_clamped(double v) { return v > 0.0 ? clamp_log(std::log(v)) : kLogClamp; }

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Normalizes in place and re-applies the clamp.
void normalize_log(std::vector<double>& v) {
  const double lse = logsumexp(v);
  for (double& x : v) x = clamp_log(x - lse);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  const double lse = logsumexp(out);
  for (double& x : out) x -= lse;
  return out;
}

void require_size(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(expected) + " categories, got " +
                         std::to_string(got));
  }
}

// log of [alpha_bar_prev * x0 + (1 - alpha_bar_prev)/K] for a log-space x0.
std::vector<double> log_mix_with_uniform(std::span<const double> log_x0, double weight) {
  const double K = static_cast<double>(log_x0.size());
  const double log_w = log_clamped(weight);
  const double log_u = log_clamped((1.0 - weight) / K);
  std::vector<double> out(log_x0.size());
  for (std::size_t k = 0; k < log_x0.size(); ++k) out[k] = clamp_log(log_add_exp(log_w + log_x0[k], log_u));
  return out;
}

}  // namespace

std::vector<double> LogCategorical::probs() const {
  std::vector<double> p(log_probs.size());
  std::transform(log_probs.begin(), log_probs.end(), p.begin(), [](double v) { return std::exp(v); });
  return p;
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("logsumexp of an empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

std::size_t onehot_index(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("categorical feature needs at least two categories");
  std::size_t hot = v.size();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] == 1.0) {
      if (hot != v.size()) throw std::invalid_argument("vector has more than one hot entry");
      hot = k;
    } else if (v[k] != 0.0) {
      throw std::invalid_argument("vector is not one-hot: entry " + std::to_string(k) + " = " +
                                  std::to_string(v[k]));
    }
  }
  if (hot == v.size()) throw std::invalid_argument("vector has no hot entry");
  return hot;
}

LogCategorical q_xt_given_x0(std::size_t num_categories, std::size_t x0_class, double alpha_bar) {
  if (num_categories < 2 || x0_class >= num_categories) throw std::invalid_argument("q_xt_given_x0: bad class");
  const double K = static_cast<double>(num_categories);
  LogCategorical out{std::vector<double>(num_categories, log_clamped((1.0 - alpha_bar) / K))};
  out.log_probs[x0_class] = log_clamped(alpha_bar + (1.0 - alpha_bar) / K);
  normalize_log(out.log_probs);
  return out;
}

LogCategorical q_xt_given_x0(std::span<const double> x0_onehot, double alpha_bar) {
  return q_xt_given_x0(x0_onehot.size(), onehot_index(x0_onehot), alpha_bar);
}

LogCategorical q_xt_given_x0(const NoiseSchedule& schedule, std::span<const double> x0_onehot, std::size_t t) {
  return q_xt_given_x0(x0_onehot, schedule.gather(t).alpha_bar);
}

LogCategorical q_posterior_log(std::size_t xt_class, std::span<const double> log_x0, double alpha,
                               double alpha_bar_prev) {
  const std::size_t K = log_x0.size();
  if (K < 2 || xt_class >= K) throw std::invalid_argument("q_posterior: bad class");
  const double Kd = static_cast<double>(K);
  const double log_off = log_clamped((1.0 - alpha) / Kd);
  const double log_on = log_clamped(alpha + (1.0 - alpha) / Kd);
  std::vector<double> lp = log_mix_with_uniform(log_x0, alpha_bar_prev);
  for (std::size_t k = 0; k < K; ++k) lp[k] += (k == xt_class ? log_on : log_off);
  normalize_log(lp);
  return {std::move(lp)};
}

LogCategorical q_posterior(std::span<const double> xt_onehot, std::span<const double> x0_probs, double alpha,
                           double alpha_bar_prev) {
  require_size(xt_onehot.size(), x0_probs.size(), "q_posterior");
  std::vector<double> log_x0(x0_probs.size());
  for (std::size_t k = 0; k < x0_probs.size(); ++k) log_x0[k] = log_clamped(x0_probs[k]);
  return q_posterior_log(onehot_index(xt_onehot), log_x0, alpha, alpha_bar_prev);
}

LogCategorical q_posterior(const NoiseSchedule& schedule, std::span<const double> xt_onehot,
                           std::span<const double> x0_probs, std::size_t t) {
  const ScheduleTerms terms = schedule.gather(t);
  return q_posterior(xt_onehot, x0_probs, terms.alpha, terms.alpha_bar_prev);
}

LogCategorical p_theta_step(const NoiseSchedule& schedule, std::span<const double> logits, std::size_t xt_class,
                            std::size_t t) {
  const ScheduleTerms terms = schedule.gather(t);
  std::vector<double> log_x0 = log_softmax(logits);
  if (t == 1) {
    for (double& v : log_x0) v = clamp_log(v);
    return {std::move(log_x0)};
  }
  return q_posterior_log(xt_class, log_x0, terms.alpha, terms.alpha_bar_prev);
}

LogCategorical p_theta_step(const NoiseSchedule& schedule, std::span<const double> logits,
                            std::span<const double> xt_onehot, std::size_t t) {
  require_size(xt_onehot.size(), logits.size(), "p_theta_step");
  return p_theta_step(schedule, logits, onehot_index(xt_onehot), t);
}

double kl_divergence(const LogCategorical& p, const LogCategorical& q) {
  require_size(p.size(), q.size(), "kl_divergence");
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = std::exp(p.log_probs[k]);
    kl += pk * (p.log_probs[k] - q.log_probs[k]);
  }
  return std::max(kl, 0.0);
}

TermWithGrad kl_term_with_grad(const NoiseSchedule& schedule, std::size_t x0_class, std::size_t xt_class,
                               std::span<const double> logits, std::size_t t) {
  const std::size_t K = logits.size();
  if (K < 2 || x0_class >= K || xt_class >= K) throw std::invalid_argument("kl_term: bad class index");
  const ScheduleTerms terms = schedule.gather(t);
  const std::vector<double> log_x0_hat = log_softmax(logits);

  TermWithGrad out;
  out.grad_logits.resize(K);
  if (t == 1) {
    out.value = -std::max(log_x0_hat[x0_class], kLogClamp);
    for (std::size_t k = 0; k < K; ++k) {
      out.grad_logits[k] = std::exp(log_x0_hat[k]) - (k == x0_class ? 1.0 : 0.0);
    }
    return out;
  }

  std::vector<double> log_x0_true(K, kLogClamp);
  log_x0_true[x0_class] = 0.0;
  const LogCategorical q = q_posterior_log(xt_class, log_x0_true, terms.alpha, terms.alpha_bar_prev);
  const LogCategorical p = q_posterior_log(xt_class, log_x0_hat, terms.alpha, terms.alpha_bar_prev);
  out.value = kl_divergence(q, p);

  // log p_k = log a_k + log b_k - log sum_j a_j b_j with
  // b_k = alpha_bar_prev * x0_hat_k + (1 - alpha_bar_prev)/K, hence
  // dKL/db_k = (p_k - q_k)/b_k and db_k/dx0_hat_k = alpha_bar_prev.
  const std::vector<double> log_b = log_mix_with_uniform(log_x0_hat, terms.alpha_bar_prev);
  std::vector<double> g(K);
  double weighted = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double pk = std::exp(p.log_probs[k]);
    const double qk = std::exp(q.log_probs[k]);
    g[k] = terms.alpha_bar_prev * (pk - qk) / std::exp(log_b[k]);
    weighted += std::exp(log_x0_hat[k]) * g[k];
  }
  for (std::size_t k = 0; k < K; ++k) out.grad_logits[k] = std::exp(log_x0_hat[k]) * (g[k] - weighted);
  return out;
}

double kl_term(const NoiseSchedule& schedule, std::span<const double> x0_onehot, std::span<const double> xt_onehot,
               std::span<const double> logits, std::size_t t) {
  require_size(x0_onehot.size(), logits.size(), "kl_term");
  require_size(xt_onehot.size(), logits.size(), "kl_term");
  return kl_term_with_grad(schedule, onehot_index(x0_onehot), onehot_index(xt_onehot), logits, t).value;
}

double prior_kl(const NoiseSchedule& schedule, std::size_t num_categories, std::size_t x0_class) {
  const LogCategorical q =
      q_xt_given_x0(num_categories, x0_class, schedule.alpha_bar().back());
  LogCategorical uniform{std::vector<double>(num_categories, -std::log(static_cast<double>(num_categories)))};
  return kl_divergence(q, uniform);
}

std::size_t sample_category(const LogCategorical& dist, double u) {
  if (dist.log_probs.empty()) throw std::invalid_argument("sample_category: empty distribution");
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    // Entries at the clamp floor stand for log 0.
    if (dist.log_probs[k] <= kLogClamp) continue;
    const double p = std::exp(dist.log_probs[k]);
    last_nonzero = k;
    cumulative += p;
    if (u < cumulative) return k;
  }
  return last_nonzero;
}

}  // namespace tabsynth::multinomial
