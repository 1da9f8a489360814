#pragma once

// Training and ancestral sampling for the mixed Gaussian/multinomial
// diffusion model.
//
// Per training step every row gets its own timestep t ~ U{1..T}; the
// numerical block is noised in closed form and each categorical feature is
// resampled from q(x_t | x_0) independently. The loss is
//
//   total = MSE(eps, eps_hat) + (sum_i L_i) / C
//
// where L_i is the multinomial KL term of feature i (decoder NLL at t = 1)
// and C the number of categorical features (the sum is 0 when C = 0).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tabsynth/dataset.hpp"
#include "tabsynth/denoiser.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/multinomial_diffusion.hpp"
#include "tabsynth/preprocess.hpp"
#include "tabsynth/schedule.hpp"

namespace tabsynth {

struct TrainConfig {
  double learning_rate = 2e-3;  // initial rate, decays linearly to 0 over the run
  std::size_t batch_size = 256;
  std::size_t num_timesteps = 100;
  std::size_t iterations = 10000;
  std::size_t num_layers = 4;
  std::size_t layer_width = 256;
  double sample_proportion = 1.0;
  std::uint64_t seed = 0;
  std::size_t log_every = 100;

  // Throws std::invalid_argument on non-positive values.
  void validate() const;
};

struct LossBreakdown {
  double l_simple = 0.0;
  double l_multinomial_mean = 0.0;  // sum of per-feature terms / C
  double total = 0.0;
  std::vector<double> per_feature;
  double l_prior = 0.0;  // mean KL(q(x_T|x_0) || uniform); diagnostic only
};

// Layout of the model vector: Gaussian block first, then one slice per
// categorical feature.
struct DiffusionLayout {
  std::size_t num_numerical = 0;
  std::vector<multinomial::CategoricalFeatureSpec> categorical;

  std::size_t width() const;
  static DiffusionLayout from(const Preprocessor& preprocess);
};

// One batch after forward noising.
struct NoisedBatch {
  MatrixD x_t;                                  // model input
  MatrixD noise;                                // rows x num_numerical
  std::vector<double> timesteps;                // 1-based
  std::vector<int> labels;                      // empty when unconditional
  std::vector<std::vector<std::size_t>> x0_class;  // per row, per feature
  std::vector<std::vector<std::size_t>> xt_class;
};

NoisedBatch make_noised_batch(const MatrixD& x0, std::span<const int> labels, const DiffusionLayout& layout,
                              const NoiseSchedule& schedule, std::mt19937_64& rng);

template <typename S>
struct LossAndGrad {
  LossBreakdown loss;
  Matrix<S> d_out;  // dTotal / dModelOutput
};

// Loss of a model output for a noised batch and its gradient with respect to
// that output.
template <typename S>
LossAndGrad<S> diffusion_loss(const Matrix<S>& model_out, const NoisedBatch& batch, const DiffusionLayout& layout,
                              const NoiseSchedule& schedule);

// Forward pass plus loss; fills `grads` (parameters() order) when non-null.
template <typename S>
LossBreakdown evaluate_loss(const DenoiserModel<S>& model, const NoisedBatch& batch, const DiffusionLayout& layout,
                            const NoiseSchedule& schedule, std::vector<Matrix<S>>* grads = nullptr);

struct Checkpoint {
  DenoiserModel<float> model;
  Preprocessor preprocess;
  NoiseSchedule schedule = NoiseSchedule::cosine(1);
  TrainConfig config;
  std::vector<std::size_t> train_class_counts;  // empty for regression
  std::size_t train_rows = 0;
};

// Owns the model and optimizer for a training run.
class Trainer {
 public:
  Trainer(const EncodedBatch& train, DiffusionLayout layout, std::size_t num_classes, const TrainConfig& config);

  // One optimizer step on a batch drawn uniformly with replacement. Throws
  // NumericError naming the offending term when the loss is not finite.
  LossBreakdown step();

  const DenoiserModel<float>& model() const { return model_; }
  DenoiserModel<float>& model() { return model_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const DiffusionLayout& layout() const { return layout_; }
  std::size_t steps_done() const { return steps_; }

 private:
  MatrixD train_x_;
  std::vector<int> train_labels_;
  DiffusionLayout layout_;
  TrainConfig config_;
  NoiseSchedule schedule_;
  DenoiserModel<float> model_;
  nn::Adam<float> optimizer_;
  std::mt19937_64 rng_;
  std::size_t steps_ = 0;
};

struct LossRecord {
  std::size_t step = 0;
  LossBreakdown loss;
  double smoothed_total = 0.0;  // EMA with decay 0.99
};

struct FitResult {
  Checkpoint checkpoint;
  std::vector<LossRecord> log;  // every config.log_every steps
};

using FitCallback = std::function<void(const LossRecord&)>;

// Fits preprocessing on the training split and trains for config.iterations steps.
FitResult fit(const TabularDataset& dataset, const TrainConfig& config, const FitCallback& on_log = {});

// Splits n across classes proportionally to `weights` with largest-remainder
// rounding; ties go to the lower class index.
std::vector<std::size_t> allocate_counts(std::size_t n, std::span<const std::size_t> weights);

struct SampleOptions {
  std::optional<std::size_t> num_rows;              // default: round(proportion * train rows)
  std::optional<std::vector<std::size_t>> class_counts;  // overrides num_rows
  std::optional<double> proportion;                 // default: checkpoint config
  std::uint64_t seed = 0;
  std::size_t threads = 0;                          // 0 = hardware concurrency
};

// Ancestral sampling from x_T ~ N(0, I) x Uniform categories down to t = 1,
// decoded to the original feature space. Each row draws from its own
// generator seeded by (seed, row index), so output does not depend on the
// thread count.
TabularDataset sample(const Checkpoint& checkpoint, const SampleOptions& options);

// Reverse chain in the normalized space (no decoding). Exposed for tests.
struct RawSamples {
  MatrixD numerics;
  std::vector<std::vector<std::int32_t>> codes;  // per feature
  std::vector<int> labels;
};
RawSamples sample_raw(const DenoiserModel<float>& model, const DiffusionLayout& layout, const NoiseSchedule& schedule,
                      std::span<const int> labels, std::size_t num_rows, std::uint64_t seed, std::size_t threads);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace tabsynth
