#include "tabsynth/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tabsynth/errors.hpp"
#include "tabsynth/gaussian_diffusion.hpp"
#include "tabsynth/parallel.hpp"

namespace tabsynth {
namespace {

constexpr std::size_t kSampleChunk = 256;
constexpr double kLogDecay = 0.99;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (num_timesteps == 0) throw std::invalid_argument("num_timesteps must be positive");
  if (num_layers == 0 || layer_width == 0) throw std::invalid_argument("denoiser size must be positive");
  if (!(sample_proportion > 0.0)) throw std::invalid_argument("sample_proportion must be positive");
  if (log_every == 0) throw std::invalid_argument("log_every must be positive");
}

std::size_t DiffusionLayout::width() const {
  std::size_t w = num_numerical;
  for (const auto& c : categorical) w += c.num_categories;
  return w;
}

DiffusionLayout DiffusionLayout::from(const Preprocessor& preprocess) {
  return {preprocess.num_numerical(), preprocess.categorical_features()};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

NoisedBatch make_noised_batch(const MatrixD& x0, std::span<const int> labels, const DiffusionLayout& layout,
                              const NoiseSchedule& schedule, std::mt19937_64& rng) {
  if (static_cast<std::size_t>(x0.cols()) != layout.width()) throw DimensionError("noised batch: width mismatch");
  const auto rows = static_cast<std::size_t>(x0.rows());
  const auto n_num = static_cast<Eigen::Index>(layout.num_numerical);
  std::uniform_int_distribution<std::size_t> pick_t(1, schedule.num_timesteps());
  std::normal_distribution<double> normal(0.0, 1.0);

  NoisedBatch b;
  b.x_t = MatrixD::Zero(x0.rows(), x0.cols());
  b.noise.resize(x0.rows(), n_num);
  b.timesteps.resize(rows);
  b.labels.assign(labels.begin(), labels.end());
  b.x0_class.assign(rows, std::vector<std::size_t>(layout.categorical.size()));
  b.xt_class.assign(rows, std::vector<std::size_t>(layout.categorical.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    const std::size_t t = pick_t(rng);
    const double alpha_bar = schedule.gather(t).alpha_bar;
    b.timesteps[r] = static_cast<double>(t);
    for (Eigen::Index j = 0; j < n_num; ++j) {
      const double eps = normal(rng);
      b.noise(ri, j) = eps;
      b.x_t(ri, j) = gaussian::q_sample(x0(ri, j), alpha_bar, eps);
    }
    for (std::size_t f = 0; f < layout.categorical.size(); ++f) {
      const auto& spec = layout.categorical[f];
      const auto off = static_cast<Eigen::Index>(spec.offset);
      Eigen::Index hot = 0;
      x0.row(ri).segment(off, static_cast<Eigen::Index>(spec.num_categories)).maxCoeff(&hot);
      const auto x0c = static_cast<std::size_t>(hot);
      const auto q = multinomial::q_xt_given_x0(spec.num_categories, x0c, alpha_bar);
      const std::size_t xtc = multinomial::sample_category(q, uniform01(rng));
      b.x0_class[r][f] = x0c;
      b.xt_class[r][f] = xtc;
      b.x_t(ri, off + static_cast<Eigen::Index>(xtc)) = 1.0;
    }
  }
  return b;
}

template <typename S>
LossAndGrad<S> diffusion_loss(const Matrix<S>& model_out, const NoisedBatch& batch, const DiffusionLayout& layout,
                              const NoiseSchedule& schedule) {
  const auto rows = static_cast<std::size_t>(model_out.rows());
  if (rows == 0) throw std::invalid_argument("diffusion loss on an empty batch");
  if (static_cast<std::size_t>(model_out.cols()) != layout.width() || batch.timesteps.size() != rows) {
    throw DimensionError("diffusion loss: model output does not match the batch layout");
  }
  LossAndGrad<S> out;
  out.d_out = Matrix<S>::Zero(model_out.rows(), model_out.cols());
  LossBreakdown& loss = out.loss;

  const std::size_t n_num = layout.num_numerical;
  if (n_num > 0) {
    const double denom = static_cast<double>(rows * n_num);
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n_num; ++j) {
        const auto ri = static_cast<Eigen::Index>(r);
        const auto ji = static_cast<Eigen::Index>(j);
        const double d = static_cast<double>(model_out(ri, ji)) - batch.noise(ri, ji);
        acc += d * d;
        out.d_out(ri, ji) = static_cast<S>(2.0 * d / denom);
      }
    }
    loss.l_simple = acc / denom;
  }

  const std::size_t C = layout.categorical.size();
  loss.per_feature.assign(C, 0.0);
  if (C > 0) {
    const double scale = 1.0 / (static_cast<double>(rows) * static_cast<double>(C));
    std::vector<double> logits;
    double prior = 0.0;
    for (std::size_t f = 0; f < C; ++f) {
      const auto& spec = layout.categorical[f];
      logits.resize(spec.num_categories);
      double acc = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        for (std::size_t k = 0; k < spec.num_categories; ++k) {
          logits[k] = static_cast<double>(model_out(ri, static_cast<Eigen::Index>(spec.offset + k)));
        }
        const auto t = static_cast<std::size_t>(batch.timesteps[r]);
        const auto term = multinomial::kl_term_with_grad(schedule, batch.x0_class[r][f], batch.xt_class[r][f], logits, t);
        acc += term.value;
        for (std::size_t k = 0; k < spec.num_categories; ++k) {
          out.d_out(ri, static_cast<Eigen::Index>(spec.offset + k)) = static_cast<S>(term.grad_logits[k] * scale);
        }
        prior += multinomial::prior_kl(schedule, spec.num_categories, batch.x0_class[r][f]);
      }
      loss.per_feature[f] = acc / static_cast<double>(rows);
    }
    double sum = 0.0;
    for (double v : loss.per_feature) sum += v;
    loss.l_multinomial_mean = sum / static_cast<double>(C);
    loss.l_prior = prior / (static_cast<double>(rows) * static_cast<double>(C));
  }
  loss.total = loss.l_simple + loss.l_multinomial_mean;
  return out;
}

template <typename S>
LossBreakdown evaluate_loss(const DenoiserModel<S>& model, const NoisedBatch& batch, const DiffusionLayout& layout,
                            const NoiseSchedule& schedule, std::vector<Matrix<S>>* grads) {
  typename DenoiserModel<S>::Cache cache;
  const Matrix<S> x_t = batch.x_t.template cast<S>();
  const Matrix<S> out = model.forward(x_t, batch.timesteps, batch.labels, grads != nullptr ? &cache : nullptr);
  LossAndGrad<S> lg = diffusion_loss(out, batch, layout, schedule);
  if (grads != nullptr) *grads = model.backward(cache, lg.d_out);
  return lg.loss;
}

Trainer::Trainer(const EncodedBatch& train, DiffusionLayout layout, std::size_t num_classes, const TrainConfig& config)
    : train_x_(train.x),
      train_labels_(train.labels),
      layout_(std::move(layout)),
      config_(config),
      schedule_(NoiseSchedule::cosine(config.num_timesteps)),
      optimizer_(nn::AdamOptions{.lr = config.learning_rate}),
      rng_(derive_seed(config.seed, 0x7472616e)) {
  config_.validate();
  if (train_x_.rows() == 0) throw std::invalid_argument("training split is empty");
  if (static_cast<std::size_t>(train_x_.cols()) != layout_.width()) throw DimensionError("trainer: layout width mismatch");
  if (num_classes > 0 && train_labels_.size() != static_cast<std::size_t>(train_x_.rows())) {
    throw std::invalid_argument("class-conditional training requires one label per row");
  }
  DenoiserConfig dc;
  dc.input_dim = layout_.width();
  dc.num_layers = config_.num_layers;
  dc.layer_width = config_.layer_width;
  dc.num_classes = num_classes;
  model_ = DenoiserModel<float>(dc, derive_seed(config_.seed, 0x6d6f64656c));
}

LossBreakdown Trainer::step() {
  const auto n = static_cast<std::size_t>(train_x_.rows());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  MatrixD x0(static_cast<Eigen::Index>(config_.batch_size), train_x_.cols());
  std::vector<int> labels;
  if (model_.config().num_classes > 0) labels.reserve(config_.batch_size);
  for (std::size_t i = 0; i < config_.batch_size; ++i) {
    const std::size_t r = pick(rng_);
    x0.row(static_cast<Eigen::Index>(i)) = train_x_.row(static_cast<Eigen::Index>(r));
    if (model_.config().num_classes > 0) labels.push_back(train_labels_[r]);
  }
  const NoisedBatch batch = make_noised_batch(x0, labels, layout_, schedule_, rng_);

  std::vector<MatrixF> grads;
  const LossBreakdown loss = evaluate_loss(model_, batch, layout_, schedule_, &grads);
  ++steps_;
  if (!std::isfinite(loss.total)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << steps_ << ": l_simple=" << loss.l_simple
        << " l_multinomial=" << loss.l_multinomial_mean;
    for (std::size_t f = 0; f < loss.per_feature.size(); ++f) {
      if (!std::isfinite(loss.per_feature[f])) msg << " (categorical feature " << f << " diverged)";
    }
    if (!std::isfinite(loss.l_simple)) msg << " (Gaussian MSE term diverged)";
    throw NumericError(msg.str());
  }
  // Linear decay to zero over the configured run.
  const double done = static_cast<double>(steps_ - 1) / static_cast<double>(config_.iterations);
  optimizer_.set_lr(config_.learning_rate * std::max(0.0, 1.0 - done));
  const auto params = model_.parameters();
  optimizer_.step(params, grads);
  return loss;
}

FitResult fit(const TabularDataset& dataset, const TrainConfig& config, const FitCallback& on_log) {
  config.validate();
  const TabularDataset train = dataset.subset(Split::kTrain);
  if (train.num_rows() == 0) throw std::invalid_argument("training split is empty");
  Preprocessor preprocess = Preprocessor::fit(train);
  const EncodedBatch encoded = preprocess.encode(train);
  const DiffusionLayout layout = DiffusionLayout::from(preprocess);

  Trainer trainer(encoded, layout, train.schema.num_classes(), config);
  FitResult result;
  double ema = 0.0;
  for (std::size_t s = 1; s <= config.iterations; ++s) {
    const LossBreakdown loss = trainer.step();
    ema = s == 1 ? loss.total : kLogDecay * ema + (1.0 - kLogDecay) * loss.total;
    if (s % config.log_every == 0) {
      LossRecord rec{s, loss, ema};
      if (on_log) on_log(rec);
      result.log.push_back(std::move(rec));
    }
  }
  result.checkpoint.model = trainer.model();
  result.checkpoint.preprocess = std::move(preprocess);
  result.checkpoint.schedule = trainer.schedule();
  result.checkpoint.config = config;
  if (is_classification(train.schema.task)) result.checkpoint.train_class_counts = train.class_counts();
  result.checkpoint.train_rows = train.num_rows();
  return result;
}

std::vector<std::size_t> allocate_counts(std::size_t n, std::span<const std::size_t> weights) {
  const std::size_t total = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  if (weights.empty() || total == 0) throw std::invalid_argument("allocate_counts needs positive weights");
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * static_cast<double>(weights[i]) / static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
  return counts;
}

RawSamples sample_raw(const DenoiserModel<float>& model, const DiffusionLayout& layout, const NoiseSchedule& schedule,
                      std::span<const int> labels, std::size_t num_rows, std::uint64_t seed, std::size_t threads) {
  if (static_cast<std::size_t>(model.config().input_dim) != layout.width()) {
    throw DimensionError("sampling: model width does not match the layout");
  }
  const bool conditional = model.config().num_classes > 0;
  if (conditional && labels.size() != num_rows) throw std::invalid_argument("sampling: one label per row required");

  const std::size_t n_num = layout.num_numerical;
  const std::size_t C = layout.categorical.size();
  const std::size_t T = schedule.num_timesteps();
  RawSamples out;
  out.numerics.resize(static_cast<Eigen::Index>(num_rows), static_cast<Eigen::Index>(n_num));
  out.codes.assign(C, std::vector<std::int32_t>(num_rows));
  if (conditional) out.labels.assign(labels.begin(), labels.end());

  const std::size_t chunks = (num_rows + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, resolve_threads(threads), [&](std::size_t chunk) {
    const std::size_t begin = chunk * kSampleChunk;
    const std::size_t end = std::min(num_rows, begin + kSampleChunk);
    const std::size_t m = end - begin;
    std::vector<std::mt19937_64> rngs;
    rngs.reserve(m);
    for (std::size_t r = begin; r < end; ++r) rngs.emplace_back(derive_seed(seed, r));

    // One distribution per row: libstdc++ caches a spare normal draw.
    std::vector<std::normal_distribution<double>> normal(m);
    MatrixD num(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_num));
    std::vector<std::vector<std::size_t>> cls(m, std::vector<std::size_t>(C));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n_num; ++j) num(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal[i](rngs[i]);
      for (std::size_t f = 0; f < C; ++f) {
        const double K = static_cast<double>(layout.categorical[f].num_categories);
        cls[i][f] = std::min(static_cast<std::size_t>(uniform01(rngs[i]) * K), layout.categorical[f].num_categories - 1);
      }
    }
    std::vector<int> chunk_labels;
    if (conditional) chunk_labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin), labels.begin() + static_cast<std::ptrdiff_t>(end));

    MatrixF x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(layout.width()));
    std::vector<double> ts(m);
    std::vector<double> logits;
    for (std::size_t t = T; t >= 1; --t) {
      x.setZero();
      for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < n_num; ++j) x(ii, static_cast<Eigen::Index>(j)) = static_cast<float>(num(ii, static_cast<Eigen::Index>(j)));
        for (std::size_t f = 0; f < C; ++f) x(ii, static_cast<Eigen::Index>(layout.categorical[f].offset + cls[i][f])) = 1.0f;
      }
      std::fill(ts.begin(), ts.end(), static_cast<double>(t));
      const MatrixF pred = model.forward(x, ts, chunk_labels);
      const ScheduleTerms terms = schedule.gather(t);
      for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < n_num; ++j) {
          const auto ji = static_cast<Eigen::Index>(j);
          const double z = t > 1 ? normal[i](rngs[i]) : 0.0;
          num(ii, ji) = gaussian::p_sample_step(terms, t, num(ii, ji), static_cast<double>(pred(ii, ji)), z);
        }
        for (std::size_t f = 0; f < C; ++f) {
          const auto& spec = layout.categorical[f];
          logits.resize(spec.num_categories);
          for (std::size_t k = 0; k < spec.num_categories; ++k) {
            logits[k] = static_cast<double>(pred(ii, static_cast<Eigen::Index>(spec.offset + k)));
          }
          const auto dist = multinomial::p_theta_step(schedule, logits, cls[i][f], t);
          cls[i][f] = multinomial::sample_category(dist, uniform01(rngs[i]));
        }
      }
      if (!num.allFinite()) throw NumericError("non-finite values in the reverse chain at t=" + std::to_string(t));
    }
    for (std::size_t i = 0; i < m; ++i) {
      out.numerics.row(static_cast<Eigen::Index>(begin + i)) = num.row(static_cast<Eigen::Index>(i));
      for (std::size_t f = 0; f < C; ++f) out.codes[f][begin + i] = static_cast<std::int32_t>(cls[i][f]);
    }
  });
  return out;
}

TabularDataset sample(const Checkpoint& checkpoint, const SampleOptions& options) {
  if (checkpoint.train_rows == 0 || checkpoint.model.config().input_dim == 0) {
    throw StateError("sampling requires a fitted checkpoint");
  }
  const Preprocessor& pre = checkpoint.preprocess;
  const bool conditional = checkpoint.model.config().num_classes > 0;

  std::size_t n = 0;
  std::vector<int> labels;
  if (options.class_counts) {
    if (!conditional) throw std::invalid_argument("class counts given for an unconditional model");
    if (options.class_counts->size() != checkpoint.model.config().num_classes) {
      throw std::invalid_argument("class counts must list every class");
    }
    for (std::size_t c = 0; c < options.class_counts->size(); ++c) {
      labels.insert(labels.end(), (*options.class_counts)[c], static_cast<int>(c));
    }
    n = labels.size();
  } else {
    const double proportion = options.proportion.value_or(checkpoint.config.sample_proportion);
    n = options.num_rows.value_or(
        static_cast<std::size_t>(std::llround(proportion * static_cast<double>(checkpoint.train_rows))));
    if (conditional) {
      const auto counts = allocate_counts(n, checkpoint.train_class_counts);
      for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c));
    }
  }
  if (conditional) {
    std::mt19937_64 label_rng(derive_seed(options.seed, 0x6c6162656c));
    std::shuffle(labels.begin(), labels.end(), label_rng);
  }

  const DiffusionLayout layout = DiffusionLayout::from(pre);
  const RawSamples raw = sample_raw(checkpoint.model, layout, checkpoint.schedule, labels, n, options.seed, options.threads);
  return pre.decode_normalized(raw.numerics, raw.codes, raw.labels);
}

template LossAndGrad<float> diffusion_loss(const MatrixF&, const NoisedBatch&, const DiffusionLayout&, const NoiseSchedule&);
template LossAndGrad<double> diffusion_loss(const MatrixD&, const NoisedBatch&, const DiffusionLayout&, const NoiseSchedule&);
template LossBreakdown evaluate_loss(const DenoiserModel<float>&, const NoisedBatch&, const DiffusionLayout&,
                                     const NoiseSchedule&, std::vector<MatrixF>*);
template LossBreakdown evaluate_loss(const DenoiserModel<double>&, const NoisedBatch&, const DiffusionLayout&,
                                     const NoiseSchedule&, std::vector<MatrixD>*);

}  // namespace tabsynth
