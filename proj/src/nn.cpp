#include "tabsynth/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tabsynth/errors.hpp"

namespace tabsynth::nn {
namespace {

template <typename S>
S sigmoid(S x) {
  if (x >= 0) return S(1) / (S(1) + std::exp(-x));
  const S e = std::exp(x);
  return e / (S(1) + e);
}

void check_groups(Index cols, std::span<const Group> groups) {
  for (const Group& g : groups) {
    if (g.size <= 0) throw std::invalid_argument("softmax group is empty");
    if (g.offset < 0 || g.offset + g.size > cols) {
      throw std::invalid_argument("softmax group [" + std::to_string(g.offset) + ", " +
                                  std::to_string(g.offset + g.size) + ") outside " +
                                  std::to_string(cols) + " columns");
    }
  }
}

}  // namespace

template <typename S>
DenseLayer<S>::DenseLayer(Index in_dim, Index out_dim)
    : weight(Matrix<S>::Zero(out_dim, in_dim)), bias(Matrix<S>::Zero(1, out_dim)) {}

template <typename S>
DenseLayer<S> DenseLayer<S>::uniform_init(Index in_dim, Index out_dim, std::mt19937_64& rng) {
  DenseLayer layer(in_dim, out_dim);
  const double bound = std::sqrt(1.0 / static_cast<double>(in_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = static_cast<S>(dist(rng));
  for (Index i = 0; i < layer.bias.size(); ++i) layer.bias.data()[i] = static_cast<S>(dist(rng));
  return layer;
}

template <typename S>
Matrix<S> forward_dense(const DenseLayer<S>& layer, const Matrix<S>& x) {
  if (x.cols() != layer.in_dim()) {
    throw DimensionError("dense layer expects " + std::to_string(layer.in_dim()) +
                         " input columns, got " + std::to_string(x.cols()));
  }
  Matrix<S> y(x.rows(), layer.out_dim());
  y.noalias() = x * layer.weight.transpose();
  y.rowwise() += layer.bias.row(0);
  return y;
}

template <typename S>
Matrix<S> backward_dense(const DenseLayer<S>& layer, const Matrix<S>& x, const Matrix<S>& dy,
                         DenseGrad<S>& grad) {
  if (x.cols() != layer.in_dim() || dy.cols() != layer.out_dim() || x.rows() != dy.rows()) {
    throw DimensionError("dense backward: inconsistent shapes");
  }
  grad.weight.resize(layer.out_dim(), layer.in_dim());
  grad.weight.noalias() = dy.transpose() * x;
  grad.bias = dy.colwise().sum();
  Matrix<S> dx(x.rows(), x.cols());
  dx.noalias() = dy * layer.weight;
  return dx;
}

template <typename S>
Matrix<S> relu(const Matrix<S>& x) {
  return x.cwiseMax(S(0));
}

template <typename S>
Matrix<S> relu_backward(const Matrix<S>& x, const Matrix<S>& dy) {
  if (x.rows() != dy.rows() || x.cols() != dy.cols()) throw DimensionError("relu backward: shape");
  return (x.array() > S(0)).select(dy, Matrix<S>::Zero(dy.rows(), dy.cols()));
}

template <typename S>
Matrix<S> silu(const Matrix<S>& x) {
  return x.unaryExpr([](S v) { return v * sigmoid(v); });
}

template <typename S>
Matrix<S> silu_backward(const Matrix<S>& x, const Matrix<S>& dy) {
  if (x.rows() != dy.rows() || x.cols() != dy.cols()) throw DimensionError("silu backward: shape");
  Matrix<S> dx(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    const S v = x.data()[i];
    const S s = sigmoid(v);
    dx.data()[i] = dy.data()[i] * s * (S(1) + v * (S(1) - s));
  }
  return dx;
}

template <typename S>
Matrix<S> log_softmax_groups(const Matrix<S>& x, std::span<const Group> groups) {
  check_groups(x.cols(), groups);
  Matrix<S> y = x;
  for (Index r = 0; r < x.rows(); ++r) {
    for (const Group& g : groups) {
      auto seg = y.row(r).segment(g.offset, g.size);
      const S mx = seg.maxCoeff();
      const S lse = mx + std::log((seg.array() - mx).exp().sum());
      seg.array() -= lse;
    }
  }
  return y;
}

template <typename S>
Matrix<S> softmax_groups(const Matrix<S>& x, std::span<const Group> groups) {
  Matrix<S> y = log_softmax_groups(x, groups);
  for (Index r = 0; r < y.rows(); ++r) {
    for (const Group& g : groups) {
      auto seg = y.row(r).segment(g.offset, g.size);
      seg = seg.array().exp().matrix();
    }
  }
  return y;
}

template <typename S>
Matrix<S> dropout(const Matrix<S>& x, double rate, std::mt19937_64& rng, Matrix<S>& mask) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (rate == 0.0) {
    mask.resize(0, 0);
    return x;
  }
  std::bernoulli_distribution keep(1.0 - rate);
  const S scale = static_cast<S>(1.0 / (1.0 - rate));
  mask.resize(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : S(0);
  return x.cwiseProduct(mask);
}

template <typename S>
Mlp<S>::Mlp(std::span<const Index> widths, Activation hidden, std::mt19937_64& rng)
    : hidden_(hidden) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp needs at least input and output widths");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers_.push_back(DenseLayer<S>::uniform_init(widths[i], widths[i + 1], rng));
  }
}

template <typename S>
Matrix<S> Mlp<S>::forward(const Matrix<S>& x, Tape* tape) const {
  if (tape != nullptr) {
    tape->inputs.clear();
    tape->preactivations.clear();
  }
  Matrix<S> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (tape != nullptr) tape->inputs.push_back(h);
    Matrix<S> z = forward_dense(layers_[i], h);
    if (i + 1 == layers_.size()) return z;
    if (tape != nullptr) tape->preactivations.push_back(z);
    switch (hidden_) {
      case Activation::kRelu: h = relu(z); break;
      case Activation::kSilu: h = silu(z); break;
      case Activation::kNone: h = std::move(z); break;
    }
  }
  return h;
}

template <typename S>
std::vector<Matrix<S>> Mlp<S>::backward(const Tape& tape, const Matrix<S>& dy, Matrix<S>* dx) const {
  if (tape.empty() || tape.inputs.size() != layers_.size()) {
    throw StateError("Mlp::backward called without a matching forward tape");
  }
  if (tape.inputs.front().rows() != dy.rows()) {
    throw StateError("Mlp::backward: tape batch size differs from gradient batch size");
  }
  std::vector<Matrix<S>> grads(2 * layers_.size());
  Matrix<S> g = dy;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      const Matrix<S>& z = tape.preactivations[k];
      switch (hidden_) {
        case Activation::kRelu: g = relu_backward(z, g); break;
        case Activation::kSilu: g = silu_backward(z, g); break;
        case Activation::kNone: break;
      }
    }
    DenseGrad<S> lg;
    g = backward_dense(layers_[k], tape.inputs[k], g, lg);
    grads[2 * k] = std::move(lg.weight);
    grads[2 * k + 1] = std::move(lg.bias);
  }
  if (dx != nullptr) *dx = std::move(g);
  return grads;
}

template <typename S>
std::vector<Matrix<S>*> Mlp<S>::parameters() {
  std::vector<Matrix<S>*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

template <typename S>
std::vector<const Matrix<S>*> Mlp<S>::parameters() const {
  std::vector<const Matrix<S>*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

template <typename S>
std::size_t Mlp<S>::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

template <typename S>
Adam<S>::Adam(AdamOptions options) : options_(options) {
  if (!(options_.lr > 0.0)) throw std::invalid_argument("Adam learning rate must be positive");
  if (!(options_.beta1 > 0.0 && options_.beta1 < 1.0) || !(options_.beta2 > 0.0 && options_.beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in (0, 1)");
  }
}

template <typename S>
void Adam<S>::step(std::span<Matrix<S>* const> params, std::span<const Matrix<S>> grads) {
  if (params.size() != grads.size()) throw DimensionError("Adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const Matrix<S>* p : params) {
      m_.push_back(Matrix<S>::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix<S>::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw DimensionError("Adam: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols() ||
        m_[i].rows() != grads[i].rows() || m_[i].cols() != grads[i].cols()) {
      throw DimensionError("Adam: shape mismatch for parameter " + std::to_string(i));
    }
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const S sb1 = static_cast<S>(b1);
  const S sb2 = static_cast<S>(b2);
  const S step_size = static_cast<S>(options_.lr / c1);
  const S inv_sqrt_c2 = static_cast<S>(1.0 / std::sqrt(c2));
  const S eps = static_cast<S>(options_.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto m = m_[i].array();
    auto v = v_[i].array();
    const auto g = grads[i].array();
    m = sb1 * m + (S(1) - sb1) * g;
    v = sb2 * v + (S(1) - sb2) * g.square();
    params[i]->array() -= step_size * m / (v.sqrt() * inv_sqrt_c2 + eps);
  }
}

#define TABSYNTH_INSTANTIATE_NN(S)                                                           \
  template struct DenseLayer<S>;                                                             \
  template Matrix<S> forward_dense(const DenseLayer<S>&, const Matrix<S>&);                  \
  template Matrix<S> backward_dense(const DenseLayer<S>&, const Matrix<S>&, const Matrix<S>&, \
                                    DenseGrad<S>&);                                          \
  template Matrix<S> relu(const Matrix<S>&);                                                 \
  template Matrix<S> relu_backward(const Matrix<S>&, const Matrix<S>&);                      \
  template Matrix<S> silu(const Matrix<S>&);                                                 \
  template Matrix<S> silu_backward(const Matrix<S>&, const Matrix<S>&);                      \
  template Matrix<S> softmax_groups(const Matrix<S>&, std::span<const Group>);               \
  template Matrix<S> log_softmax_groups(const Matrix<S>&, std::span<const Group>);           \
  template Matrix<S> dropout(const Matrix<S>&, double, std::mt19937_64&, Matrix<S>&);        \
  template class Mlp<S>;                                                                     \
  template class Adam<S>;

TABSYNTH_INSTANTIATE_NN(float)
TABSYNTH_INSTANTIATE_NN(double)

}  // namespace tabsynth::nn
