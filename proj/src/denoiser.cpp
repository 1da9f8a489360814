#include "tabsynth/denoiser.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tabsynth/errors.hpp"

namespace tabsynth {

void DenoiserConfig::validate() const {
  if (input_dim == 0) throw std::invalid_argument("denoiser input_dim must be positive");
  if (num_layers == 0) throw std::invalid_argument("denoiser needs at least one MLP block");
  if (layer_width == 0) throw std::invalid_argument("denoiser layer_width must be positive");
  if (embed_dim != kEmbedDim || embed_dim % 2 != 0) {
    throw std::invalid_argument("denoiser embed_dim is fixed at " + std::to_string(kEmbedDim));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
}

std::size_t DenoiserConfig::parameter_count() const {
  const std::size_t e = embed_dim;
  const std::size_t w = layer_width;
  std::size_t n = input_dim * e + e;       // input projection
  n += 2 * (e * e + e);                    // time MLP
  n += num_classes * e;                    // class embedding
  n += e * w + w;                          // first block
  n += (num_layers - 1) * (w * w + w);     // hidden blocks
  n += w * input_dim + input_dim;          // head
  return n;
}

template <typename S>
Matrix<S> sinusoidal_embedding(std::span<const double> timesteps, std::size_t dim) {
  const std::size_t half = dim / 2;
  Matrix<S> out(static_cast<Eigen::Index>(timesteps.size()), static_cast<Eigen::Index>(dim));
  std::vector<double> freqs(half);
  for (std::size_t j = 0; j < half; ++j) {
    freqs[j] = std::pow(10000.0, -static_cast<double>(j) / static_cast<double>(half - 1));
  }
  for (std::size_t r = 0; r < timesteps.size(); ++r) {
    for (std::size_t j = 0; j < half; ++j) {
      const double arg = timesteps[r] * freqs[j];
      out(r, j) = static_cast<S>(std::sin(arg));
      out(r, half + j) = static_cast<S>(std::cos(arg));
    }
  }
  return out;
}

std::vector<double> time_embedding(double t, std::size_t dim) {
  const double ts[] = {t};
  const MatrixD m = sinusoidal_embedding<double>(ts, dim);
  return {m.data(), m.data() + m.size()};
}

template <typename S>
DenoiserModel<S>::DenoiserModel(const DenoiserConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const auto in = static_cast<Eigen::Index>(config_.input_dim);
  const auto e = static_cast<Eigen::Index>(config_.embed_dim);
  const auto w = static_cast<Eigen::Index>(config_.layer_width);
  input_proj_ = nn::DenseLayer<S>::uniform_init(in, e, rng);
  time_in_ = nn::DenseLayer<S>::uniform_init(e, e, rng);
  time_out_ = nn::DenseLayer<S>::uniform_init(e, e, rng);
  class_embedding_ = Matrix<S>::Zero(static_cast<Eigen::Index>(config_.num_classes), e);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < class_embedding_.size(); ++i) {
    class_embedding_.data()[i] = static_cast<S>(normal(rng));
  }
  blocks_.push_back(nn::DenseLayer<S>::uniform_init(e, w, rng));
  for (std::size_t i = 1; i < config_.num_layers; ++i) blocks_.push_back(nn::DenseLayer<S>::uniform_init(w, w, rng));
  head_ = nn::DenseLayer<S>::uniform_init(w, in, rng);
}

template <typename S>
Matrix<S> DenoiserModel<S>::forward(const Matrix<S>& x_in, std::span<const double> timesteps,
                                    std::span<const int> labels, Cache* cache,
                                    std::mt19937_64* dropout_rng) const {
  if (static_cast<std::size_t>(x_in.cols()) != config_.input_dim) {
    throw DimensionError("denoiser expects " + std::to_string(config_.input_dim) + " input columns, got " +
                         std::to_string(x_in.cols()));
  }
  const auto batch = static_cast<std::size_t>(x_in.rows());
  if (timesteps.size() != batch) throw DimensionError("denoiser: one timestep per row required");
  if (config_.num_classes > 0) {
    if (labels.size() != batch) throw std::invalid_argument("class-conditional denoiser requires a label per row");
    for (int y : labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= config_.num_classes) {
        throw std::out_of_range("class label " + std::to_string(y) + " out of range");
      }
    }
  }

  Matrix<S> sin_emb = sinusoidal_embedding<S>(timesteps, config_.embed_dim);
  Matrix<S> time_hidden = nn::forward_dense(time_in_, sin_emb);
  Matrix<S> time_act = nn::silu(time_hidden);
  Matrix<S> h = nn::forward_dense(time_out_, time_act);
  h.noalias() += nn::forward_dense(input_proj_, x_in);
  if (config_.num_classes > 0) {
    for (std::size_t r = 0; r < batch; ++r) h.row(r) += class_embedding_.row(labels[r]);
  }

  if (cache != nullptr) {
    cache->x_in = x_in;
    cache->sin_emb = std::move(sin_emb);
    cache->time_hidden = std::move(time_hidden);
    cache->time_act = std::move(time_act);
    cache->labels.assign(labels.begin(), labels.end());
    cache->block_inputs.clear();
    cache->block_pre.clear();
    cache->dropout_masks.clear();
  }
  const bool use_dropout = config_.dropout > 0.0 && dropout_rng != nullptr;
  for (const auto& block : blocks_) {
    Matrix<S> pre = nn::forward_dense(block, h);
    Matrix<S> act = nn::relu(pre);
    Matrix<S> mask;
    if (use_dropout) act = nn::dropout(act, config_.dropout, *dropout_rng, mask);
    if (cache != nullptr) {
      cache->block_inputs.push_back(std::move(h));
      cache->block_pre.push_back(std::move(pre));
      cache->dropout_masks.push_back(std::move(mask));
    }
    h = std::move(act);
  }
  Matrix<S> out = nn::forward_dense(head_, h);
  if (cache != nullptr) cache->head_input = std::move(h);
  return out;
}

template <typename S>
std::vector<Matrix<S>> DenoiserModel<S>::backward(const Cache& cache, const Matrix<S>& d_out) const {
  if (cache.empty() || cache.block_inputs.size() != blocks_.size()) {
    throw StateError("denoiser backward called without a forward cache");
  }
  if (d_out.rows() != cache.x_in.rows() || static_cast<std::size_t>(d_out.cols()) != config_.input_dim) {
    throw DimensionError("denoiser backward: output gradient shape does not match the cached batch");
  }
  nn::DenseGrad<S> g_head;
  Matrix<S> dh = nn::backward_dense(head_, cache.head_input, d_out, g_head);
  std::vector<nn::DenseGrad<S>> g_blocks(blocks_.size());
  for (std::size_t k = blocks_.size(); k-- > 0;) {
    if (cache.dropout_masks[k].size() > 0) dh = dh.cwiseProduct(cache.dropout_masks[k]);
    const Matrix<S> d_pre = nn::relu_backward(cache.block_pre[k], dh);
    dh = nn::backward_dense(blocks_[k], cache.block_inputs[k], d_pre, g_blocks[k]);
  }

  nn::DenseGrad<S> g_proj;
  nn::backward_dense(input_proj_, cache.x_in, dh, g_proj);
  Matrix<S> g_class = Matrix<S>::Zero(class_embedding_.rows(), class_embedding_.cols());
  if (config_.num_classes > 0) {
    for (std::size_t r = 0; r < cache.labels.size(); ++r) g_class.row(cache.labels[r]) += dh.row(r);
  }
  nn::DenseGrad<S> g_time_out;
  const Matrix<S> d_time_act = nn::backward_dense(time_out_, cache.time_act, dh, g_time_out);
  const Matrix<S> d_time_hidden = nn::silu_backward(cache.time_hidden, d_time_act);
  nn::DenseGrad<S> g_time_in;
  nn::backward_dense(time_in_, cache.sin_emb, d_time_hidden, g_time_in);

  std::vector<Matrix<S>> grads;
  grads.reserve(8 + 2 * blocks_.size());
  auto push = [&](nn::DenseGrad<S>& g) {
    grads.push_back(std::move(g.weight));
    grads.push_back(std::move(g.bias));
  };
  push(g_proj);
  push(g_time_in);
  push(g_time_out);
  if (config_.num_classes > 0) grads.push_back(std::move(g_class));
  for (auto& g : g_blocks) push(g);
  push(g_head);
  return grads;
}

template <typename S>
Vector<S> DenoiserModel<S>::class_embed(std::optional<int> y) const {
  if (config_.num_classes == 0) return Vector<S>::Zero(static_cast<Eigen::Index>(config_.embed_dim));
  if (!y.has_value() || *y < 0 || static_cast<std::size_t>(*y) >= config_.num_classes) {
    throw std::out_of_range("class label out of range for the class embedding table");
  }
  return class_embedding_.row(*y).transpose();
}

template <typename S>
std::vector<Matrix<S>*> DenoiserModel<S>::parameters() {
  std::vector<Matrix<S>*> out;
  auto push = [&](nn::DenseLayer<S>& l) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  };
  push(input_proj_);
  push(time_in_);
  push(time_out_);
  if (config_.num_classes > 0) out.push_back(&class_embedding_);
  for (auto& b : blocks_) push(b);
  push(head_);
  return out;
}

template <typename S>
std::vector<const Matrix<S>*> DenoiserModel<S>::parameters() const {
  auto mut = const_cast<DenoiserModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

template <typename S>
std::size_t DenoiserModel<S>::num_parameters() const {
  std::size_t n = 0;
  for (const Matrix<S>* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

template <typename S>
template <typename T>
DenoiserModel<T> DenoiserModel<S>::cast() const {
  DenoiserModel<T> out;
  out.config_ = config_;
  auto conv = [](const nn::DenseLayer<S>& l) {
    nn::DenseLayer<T> r;
    r.weight = l.weight.template cast<T>();
    r.bias = l.bias.template cast<T>();
    return r;
  };
  out.input_proj_ = conv(input_proj_);
  out.time_in_ = conv(time_in_);
  out.time_out_ = conv(time_out_);
  out.class_embedding_ = class_embedding_.template cast<T>();
  for (const auto& b : blocks_) out.blocks_.push_back(conv(b));
  out.head_ = conv(head_);
  return out;
}

template class DenoiserModel<float>;
template class DenoiserModel<double>;
template DenoiserModel<double> DenoiserModel<float>::cast<double>() const;
template DenoiserModel<float> DenoiserModel<double>::cast<float>() const;
template DenoiserModel<float> DenoiserModel<float>::cast<float>() const;
template Matrix<float> sinusoidal_embedding<float>(std::span<const double>, std::size_t);
template Matrix<double> sinusoidal_embedding<double>(std::span<const double>, std::size_t);

}  // namespace tabsynth
