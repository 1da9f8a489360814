#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tabsynth {

double normal_cdf(double z);
// Inverse standard-normal CDF for p in (0, 1).
double normal_quantile(double p);

// Maps a numerical column to a standard normal through its empirical CDF.
// Landmarks are min(1000, n) empirical quantiles at evenly spaced
// probabilities; values are placed on the CDF by linear interpolation
// between landmarks (ties resolved to the middle of the tied run), clipped to
// [1e-7, 1 - 1e-7] and pushed through the normal quantile function.
class QuantileTransform {
 public:
  static constexpr std::size_t kMaxLandmarks = 1000;
  static constexpr double kBound = 1e-7;

  // Throws std::invalid_argument for an empty column or non-finite values.
  static QuantileTransform fit(std::span<const double> values, std::size_t max_landmarks = kMaxLandmarks);
  // Rebuilds a fitted transform; landmarks must be non-decreasing.
  static QuantileTransform from_landmarks(std::vector<double> landmarks);

  double transform(double x) const;
  // Inverse map. z at or beyond the clip boundary returns the extreme
  // landmark, so every training value round-trips.
  double inverse(double z) const;

  double cdf(double x) const;

  const std::vector<double>& landmarks() const { return landmarks_; }
  const std::vector<double>& references() const { return references_; }
  bool constant() const { return landmarks_.front() == landmarks_.back(); }

 private:
  QuantileTransform() = default;

  std::vector<double> landmarks_;
  std::vector<double> references_;
};

}  // namespace tabsynth
