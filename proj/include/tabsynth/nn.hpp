#pragma once

// Dense-network building blocks: affine layers, elementwise activations,
// grouped softmax, a small multi-layer perceptron with an explicit tape for
// reverse-mode gradients, and Adam.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tabsynth/matrix.hpp"

namespace tabsynth::nn {

using Index = Eigen::Index;

template <typename S>
struct DenseLayer {
  Matrix<S> weight;  // out x in
  Matrix<S> bias;    // 1 x out

  DenseLayer() = default;
  // Zero-initialized layer.
  DenseLayer(Index in_dim, Index out_dim);

  // Weights and biases drawn from U(-sqrt(1/in), sqrt(1/in)).
  static DenseLayer uniform_init(Index in_dim, Index out_dim, std::mt19937_64& rng);

  Index in_dim() const { return weight.cols(); }
  Index out_dim() const { return weight.rows(); }
};

template <typename S>
struct DenseGrad {
  Matrix<S> weight;
  Matrix<S> bias;
};

// y = x W^T + b. Throws DimensionError when x.cols() != in_dim.
template <typename S>
Matrix<S> forward_dense(const DenseLayer<S>& layer, const Matrix<S>& x);

// Given the layer input x and dL/dy, writes dL/dW, dL/db into `grad` and
// returns dL/dx.
template <typename S>
Matrix<S> backward_dense(const DenseLayer<S>& layer, const Matrix<S>& x, const Matrix<S>& dy,
                         DenseGrad<S>& grad);

template <typename S>
Matrix<S> relu(const Matrix<S>& x);
template <typename S>
Matrix<S> relu_backward(const Matrix<S>& x, const Matrix<S>& dy);

template <typename S>
Matrix<S> silu(const Matrix<S>& x);
template <typename S>
Matrix<S> silu_backward(const Matrix<S>& x, const Matrix<S>& dy);

// A contiguous run of columns normalized together (one categorical feature).
struct Group {
  Index offset = 0;
  Index size = 0;
};

// Softmax / log-softmax applied independently inside each group; columns not
// covered by any group pass through unchanged. Empty groups or groups that
// fall outside the matrix throw std::invalid_argument.
template <typename S>
Matrix<S> softmax_groups(const Matrix<S>& x, std::span<const Group> groups);
template <typename S>
Matrix<S> log_softmax_groups(const Matrix<S>& x, std::span<const Group> groups);

// Inverted dropout. `rate` is the drop probability; rate == 0 returns x and
// leaves the mask empty.
template <typename S>
Matrix<S> dropout(const Matrix<S>& x, double rate, std::mt19937_64& rng, Matrix<S>& mask);

enum class Activation { kNone, kRelu, kSilu };

// Stack of dense layers with a shared hidden activation and a linear output.
template <typename S>
class Mlp {
 public:
  struct Tape {
    std::vector<Matrix<S>> inputs;       // input of every layer
    std::vector<Matrix<S>> preactivations;  // output of every hidden layer before activation
    bool empty() const { return inputs.empty(); }
  };

  Mlp() = default;
  // `widths` = {in, hidden..., out}; needs at least two entries.
  Mlp(std::span<const Index> widths, Activation hidden, std::mt19937_64& rng);

  Matrix<S> forward(const Matrix<S>& x, Tape* tape = nullptr) const;

  // Parameter gradients in parameters() order. Throws StateError when the tape
  // is empty or was recorded for a different batch.
  std::vector<Matrix<S>> backward(const Tape& tape, const Matrix<S>& dy,
                                  Matrix<S>* dx = nullptr) const;

  std::vector<Matrix<S>*> parameters();
  std::vector<const Matrix<S>*> parameters() const;
  std::size_t num_parameters() const;

  const std::vector<DenseLayer<S>>& layers() const { return layers_; }
  std::vector<DenseLayer<S>>& layers() { return layers_; }

 private:
  std::vector<DenseLayer<S>> layers_;
  Activation hidden_ = Activation::kRelu;
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are zero-initialized on the
// first step and shaped like the parameters they track.
template <typename S>
class Adam {
 public:
  explicit Adam(AdamOptions options = {});

  void step(std::span<Matrix<S>* const> params, std::span<const Matrix<S>> grads);

  std::int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }

 private:
  AdamOptions options_;
  std::int64_t step_ = 0;
  std::vector<Matrix<S>> m_;
  std::vector<Matrix<S>> v_;
};

}  // namespace tabsynth::nn
