#pragma once

// Reverse-process network. Input, sinusoidal time embedding and class
// embedding are summed in a 128-wide space and fed through ReLU blocks:
//
//   t_emb = Linear(SiLU(Linear(SinTimeEmb(t))))
//   h     = Linear(x_in) + t_emb + Embedding(y)
//   out   = Linear(Block(...Block(h)))        Block = Dropout(ReLU(Linear))
//
// The output has the input's dimensionality: epsilon predictions for the
// numerical coordinates followed by one logit group per categorical feature.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tabsynth/matrix.hpp"
#include "tabsynth/nn.hpp"

namespace tabsynth {

inline constexpr std::size_t kEmbedDim = 128;

struct DenoiserConfig {
  std::size_t input_dim = 0;
  std::size_t num_layers = 4;
  std::size_t layer_width = 256;
  std::size_t num_classes = 0;  // 0 = unconditional (regression)
  std::size_t embed_dim = kEmbedDim;
  double dropout = 0.0;

  // Throws std::invalid_argument on an inconsistent config.
  void validate() const;
  // Closed-form number of trainable scalars.
  std::size_t parameter_count() const;
};

// 64 sines followed by 64 cosines of t * 10000^(-j/63), j = 0..63.
template <typename S>
Matrix<S> sinusoidal_embedding(std::span<const double> timesteps, std::size_t dim = kEmbedDim);
std::vector<double> time_embedding(double t, std::size_t dim = kEmbedDim);

template <typename S>
class DenoiserModel {
 public:
  struct Cache {
    Matrix<S> x_in;
    Matrix<S> sin_emb;
    Matrix<S> time_hidden;  // pre-SiLU
    Matrix<S> time_act;
    std::vector<int> labels;
    std::vector<Matrix<S>> block_inputs;
    std::vector<Matrix<S>> block_pre;
    std::vector<Matrix<S>> dropout_masks;
    Matrix<S> head_input;
    bool empty() const { return block_inputs.empty(); }
  };

  DenoiserModel() = default;
  DenoiserModel(const DenoiserConfig& config, std::uint64_t seed);

  const DenoiserConfig& config() const { return config_; }

  // x_in: batch x input_dim; timesteps: one per row; labels: one per row and
  // required iff num_classes > 0. When `cache` is given the intermediate
  // activations are recorded for backward(). `dropout_rng` enables dropout
  // (only relevant when config().dropout > 0).
  Matrix<S> forward(const Matrix<S>& x_in, std::span<const double> timesteps, std::span<const int> labels,
                    Cache* cache = nullptr, std::mt19937_64* dropout_rng = nullptr) const;

  // Gradients in parameters() order. Throws StateError for an empty cache.
  std::vector<Matrix<S>> backward(const Cache& cache, const Matrix<S>& d_out) const;

  // Row `y` of the class embedding table; a zero vector for unconditional
  // models. Throws std::out_of_range for an invalid class.
  Vector<S> class_embed(std::optional<int> y) const;

  std::vector<Matrix<S>*> parameters();
  std::vector<const Matrix<S>*> parameters() const;
  std::size_t num_parameters() const;

  template <typename T>
  DenoiserModel<T> cast() const;

 private:
  template <typename T>
  friend class DenoiserModel;

  DenoiserConfig config_;
  nn::DenseLayer<S> input_proj_;
  nn::DenseLayer<S> time_in_;
  nn::DenseLayer<S> time_out_;
  Matrix<S> class_embedding_;  // num_classes x embed_dim
  std::vector<nn::DenseLayer<S>> blocks_;
  nn::DenseLayer<S> head_;
};

}  // namespace tabsynth
