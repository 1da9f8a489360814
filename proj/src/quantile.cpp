#include "tabsynth/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace tabsynth {
namespace {

// Value at the last knot <= x (numpy.interp on repeated knots).
double interp_right(double x, const std::vector<double>& xp, const std::vector<double>& fp) {
  const auto it = std::upper_bound(xp.begin(), xp.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xp.begin()) - 1;
  if (j + 1 >= xp.size()) return fp.back();
  return fp[j] + (fp[j + 1] - fp[j]) * (x - xp[j]) / (xp[j + 1] - xp[j]);
}

// Value at the first knot >= x.
double interp_left(double x, const std::vector<double>& xp, const std::vector<double>& fp) {
  const auto it = std::lower_bound(xp.begin(), xp.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xp.begin());
  if (j == 0) return fp.front();
  return fp[j - 1] + (fp[j] - fp[j - 1]) * (x - xp[j - 1]) / (xp[j] - xp[j - 1]);
}

std::vector<double> linspace01(std::size_t n) {
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n && n > 1; ++i) r[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return r;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile needs p in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

QuantileTransform QuantileTransform::fit(std::span<const double> values, std::size_t max_landmarks) {
  if (values.empty()) throw std::invalid_argument("cannot fit a quantile transform on an empty column");
  if (max_landmarks == 0) throw std::invalid_argument("max_landmarks must be positive");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantile transform input must be finite");
  }
  std::sort(sorted.begin(), sorted.end());

  QuantileTransform qt;
  const std::size_t q = std::min(max_landmarks, sorted.size());
  qt.references_ = linspace01(q);
  qt.landmarks_.resize(q);
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t i = 0; i < q; ++i) {
    // Linear-interpolated percentile.
    const double pos = qt.references_[i] * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    qt.landmarks_[i] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  // Interpolation rounding must not break monotonicity.
  for (std::size_t i = 1; i < q; ++i) qt.landmarks_[i] = std::max(qt.landmarks_[i], qt.landmarks_[i - 1]);
  return qt;
}

QuantileTransform QuantileTransform::from_landmarks(std::vector<double> landmarks) {
  if (landmarks.empty()) throw std::invalid_argument("quantile transform needs at least one landmark");
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    if (!std::isfinite(landmarks[i]) || (i > 0 && landmarks[i] < landmarks[i - 1])) {
      throw std::invalid_argument("quantile landmarks must be finite and non-decreasing");
    }
  }
  QuantileTransform qt;
  qt.references_ = linspace01(landmarks.size());
  qt.landmarks_ = std::move(landmarks);
  return qt;
}

double QuantileTransform::cdf(double x) const {
  const double lo = landmarks_.front();
  const double hi = landmarks_.back();
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  return 0.5 * (interp_right(x, landmarks_, references_) + interp_left(x, landmarks_, references_));
}

double QuantileTransform::transform(double x) const {
  if (constant()) return 0.0;
  const double p = std::clamp(cdf(x), kBound, 1.0 - kBound);
  return normal_quantile(p);
}

double QuantileTransform::inverse(double z) const {
  if (constant()) return landmarks_.front();
  const double p = normal_cdf(z);
  constexpr double kEdge = kBound * (1.0 + 1e-6);
  if (p <= kEdge) return landmarks_.front();
  if (p >= 1.0 - kEdge) return landmarks_.back();
  return interp_right(p, references_, landmarks_);
}

}  // namespace tabsynth
