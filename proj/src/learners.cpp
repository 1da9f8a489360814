#include "tabsynth/learners.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "tabsynth/errors.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/nn.hpp"
#include "tabsynth/preprocess.hpp"

namespace tabsynth {
namespace {

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  void fit(const MatrixD& x) {
    mean = x.colwise().mean();
    scale = ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(std::max<Eigen::Index>(1, x.rows())))
                .sqrt()
                .matrix();
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
      if (!(scale[c] > 0.0)) scale[c] = 1.0;
    }
  }
  MatrixD apply(const MatrixD& x) const {
    if (x.cols() != mean.size()) throw DimensionError("learner: feature width differs from training");
    return (x.rowwise() - mean).array().rowwise() / scale.array();
  }
};

MatrixD one_hot(const std::vector<double>& y, std::size_t k) {
  MatrixD out = MatrixD::Zero(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(y[i]);
    if (c < 0 || c >= out.cols()) throw std::invalid_argument("learner: class code out of range");
    out(static_cast<Eigen::Index>(i), c) = 1.0;
  }
  return out;
}

std::vector<double> row_argmax(const MatrixD& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index best = 0;
    m.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<double>(best);
  }
  return out;
}

class LogisticRegression final : public Learner {
 public:
  explicit LogisticRegression(std::size_t k) : k_(k) {}

  void fit(const MatrixD& x_raw, const std::vector<double>& y) override {
    scaler_.fit(x_raw);
    const MatrixD x = scaler_.apply(x_raw);
    const MatrixD target = one_hot(y, k_);
    layer_ = nn::DenseLayer<double>(x.cols(), static_cast<Eigen::Index>(k_));
    const nn::Group all{0, static_cast<Eigen::Index>(k_)};
    nn::DenseGrad<double> grad;
    for (int it = 0; it < kIterations; ++it) {
      const MatrixD p = nn::softmax_groups<double>(nn::forward_dense(layer_, x), std::span(&all, 1));
      const MatrixD dy = (p - target) / static_cast<double>(x.rows());
      nn::backward_dense(layer_, x, dy, grad);
      layer_.weight -= kLr * grad.weight;
      layer_.bias -= kLr * grad.bias;
    }
  }

  std::vector<double> predict(const MatrixD& x) const override {
    return row_argmax(nn::forward_dense(layer_, scaler_.apply(x)));
  }

 private:
  static constexpr int kIterations = 500;
  static constexpr double kLr = 0.1;
  std::size_t k_;
  Standardizer scaler_;
  nn::DenseLayer<double> layer_;
};

class RidgeRegression final : public Learner {
 public:
  explicit RidgeRegression(std::size_t k) : k_(k) {}

  void fit(const MatrixD& x_raw, const std::vector<double>& y) override {
    scaler_.fit(x_raw);
    const MatrixD x = scaler_.apply(x_raw);  // zero-mean columns
    MatrixD target = k_ > 0 ? one_hot(y, k_)
                            : MatrixD(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
    intercept_ = target.colwise().mean();
    target.rowwise() -= intercept_;
    MatrixD gram = x.transpose() * x;
    gram.diagonal().array() += kAlpha;
    coef_ = gram.ldlt().solve(x.transpose() * target);
  }

  std::vector<double> predict(const MatrixD& x) const override {
    MatrixD out = scaler_.apply(x) * coef_;
    out.rowwise() += intercept_;
    if (k_ > 0) return row_argmax(out);
    return {out.data(), out.data() + out.size()};
  }

 private:
  static constexpr double kAlpha = 1.0;
  std::size_t k_;
  Standardizer scaler_;
  MatrixD coef_;
  Eigen::RowVectorXd intercept_;
};

class SmallMlp final : public Learner {
 public:
  SmallMlp(std::size_t k, std::uint64_t seed) : k_(k), seed_(seed) {}

  void fit(const MatrixD& x_raw, const std::vector<double>& y) override {
    scaler_.fit(x_raw);
    const MatrixD x = scaler_.apply(x_raw);
    MatrixD target;
    if (k_ > 0) {
      target = one_hot(y, k_);
    } else {
      target = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
      y_mean_ = target.mean();
      y_scale_ = std::sqrt((target.array() - y_mean_).square().mean());
      if (!(y_scale_ > 0.0)) y_scale_ = 1.0;
      target = (target.array() - y_mean_) / y_scale_;
    }
    std::mt19937_64 rng(seed_);
    const std::array<nn::Index, 4> widths{x.cols(), 64, 64, static_cast<nn::Index>(k_ > 0 ? k_ : 1)};
    mlp_ = nn::Mlp<double>(widths, nn::Activation::kRelu, rng);
    nn::Adam<double> adam({.lr = 1e-3});
    const nn::Group all{0, widths[3]};
    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t batch = std::min<std::size_t>(kBatch, n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    MatrixD xb(static_cast<Eigen::Index>(batch), x.cols());
    MatrixD tb(static_cast<Eigen::Index>(batch), target.cols());
    for (int step = 0; step < kSteps; ++step) {
      for (std::size_t i = 0; i < batch; ++i) {
        const auto r = static_cast<Eigen::Index>(pick(rng));
        xb.row(static_cast<Eigen::Index>(i)) = x.row(r);
        tb.row(static_cast<Eigen::Index>(i)) = target.row(r);
      }
      nn::Mlp<double>::Tape tape;
      const MatrixD out = mlp_.forward(xb, &tape);
      MatrixD dy = k_ > 0 ? MatrixD(nn::softmax_groups<double>(out, std::span(&all, 1)) - tb) : MatrixD(2.0 * (out - tb));
      dy /= static_cast<double>(batch);
      const auto grads = mlp_.backward(tape, dy);
      const auto params = mlp_.parameters();
      adam.step(params, grads);
    }
  }

  std::vector<double> predict(const MatrixD& x) const override {
    const MatrixD out = mlp_.forward(scaler_.apply(x));
    if (k_ > 0) return row_argmax(out);
    std::vector<double> y(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index r = 0; r < out.rows(); ++r) y[static_cast<std::size_t>(r)] = out(r, 0) * y_scale_ + y_mean_;
    return y;
  }

 private:
  static constexpr int kSteps = 1000;
  static constexpr std::size_t kBatch = 128;
  std::size_t k_;
  std::uint64_t seed_;
  Standardizer scaler_;
  nn::Mlp<double> mlp_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

}  // namespace

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kLogistic:
      return "logistic-regression";
    case LearnerKind::kRidge:
      return "ridge-regression";
    case LearnerKind::kMlp:
      return "small-mlp";
  }
  return "?";
}

LearnerKind parse_learner(std::string_view s) {
  for (auto k : {LearnerKind::kLogistic, LearnerKind::kRidge, LearnerKind::kMlp}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown learner '" + std::string(s) + "'");
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, std::size_t num_classes, std::uint64_t seed) {
  switch (kind) {
    case LearnerKind::kLogistic:
      if (num_classes == 0) throw std::invalid_argument("logistic-regression needs a classification task");
      return std::make_unique<LogisticRegression>(num_classes);
    case LearnerKind::kRidge:
      return std::make_unique<RidgeRegression>(num_classes);
    case LearnerKind::kMlp:
      return std::make_unique<SmallMlp>(num_classes, seed);
  }
  throw std::invalid_argument("unknown learner kind");
}

double ml_efficiency(const TabularDataset& train, const TabularDataset& test, LearnerKind kind, std::uint64_t seed) {
  if (!train.schema.same_layout(test.schema)) throw DataError("ml_efficiency: train and test schemas differ");
  if (train.num_rows() == 0 || test.num_rows() == 0) throw DataError("ml_efficiency: empty train or test set");
  const bool classification = is_classification(train.schema.task);
  if (classification && std::set<double>(train.target.begin(), train.target.end()).size() < 2) {
    throw DataError("ml_efficiency: training data holds a single class");
  }
  const Preprocessor pre = Preprocessor::fit(train);
  auto learner = make_learner(kind, train.schema.num_classes(), seed);
  learner->fit(pre.encode_features(train), train.target);
  const std::vector<double> pred = learner->predict(pre.encode_features(test));
  if (!classification) return r2_score(test.target, pred);
  std::vector<int> yt(test.target.begin(), test.target.end());
  std::vector<int> yp(pred.begin(), pred.end());
  return f1_score(yt, yp);
}

}  // namespace tabsynth
