#pragma once

#include <cstddef>
#include <vector>

namespace tabsynth {

// Per-timestep coefficients at timestep t (1-based).
struct ScheduleTerms {
  double beta;
  double alpha;
  double alpha_bar;
  double alpha_bar_prev;  // 1 at t = 1
};

// Variance schedule shared by the Gaussian and multinomial processes.
// Vectors are stored 0-based: entry i holds timestep t = i + 1.
class NoiseSchedule {
 public:
  static constexpr double kCosineOffset = 0.008;
  static constexpr double kMaxBeta = 0.999;

  // Cosine schedule: alpha_bar(t) = f(t) / f(0), f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2),
  // beta_t = 1 - alpha_bar(t)/alpha_bar(t-1) clipped to kMaxBeta; the stored
  // alpha_bar is the running product of (1 - beta) so the recurrence is exact.
  // Throws std::invalid_argument for T = 0.
  static NoiseSchedule cosine(std::size_t num_timesteps, double offset = kCosineOffset,
                              double max_beta = kMaxBeta);

  std::size_t num_timesteps() const { return beta_.size(); }
  double offset() const { return offset_; }
  double max_beta() const { return max_beta_; }

  // Throws std::out_of_range unless 1 <= t <= T.
  ScheduleTerms gather(std::size_t t) const;

  const std::vector<double>& beta() const { return beta_; }
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<double>& alpha_bar() const { return alpha_bar_; }
  const std::vector<double>& alpha_bar_prev() const { return alpha_bar_prev_; }

 private:
  NoiseSchedule() = default;

  double offset_ = kCosineOffset;
  double max_beta_ = kMaxBeta;
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> alpha_bar_prev_;
};

}  // namespace tabsynth
