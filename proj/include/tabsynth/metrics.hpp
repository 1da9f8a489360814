#pragma once

// Scores and association statistics used by the evaluation report.
// Entropies are in nats.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabsynth/dataset.hpp"
#include "tabsynth/matrix.hpp"

namespace tabsynth {

// Macro-averaged F1 over the classes appearing in y_true or y_pred. Per-class
// F1 = 2TP / (2TP + FP + FN).
double f1_score(std::span<const int> y_true, std::span<const int> y_pred);

// 1 - SS_res / SS_tot. Throws UndefinedScoreError when y_true is constant.
double r2_score(std::span<const double> y_true, std::span<const double> y_pred);

double median(std::vector<double> values);

// Per synthetic row, the Euclidean distance to the closest real row; the
// median of those distances is the DCR score.
std::vector<double> closest_record_distances(const MatrixD& real, const MatrixD& synthetic, std::size_t threads = 0);
double dcr(const MatrixD& real, const MatrixD& synthetic, std::size_t threads = 0);

// `degenerate` marks a statistic that is undefined because an input is
// constant; its value is then 0.
struct Association {
  double value = 0.0;
  bool degenerate = false;
};

Association pearson(std::span<const double> x, std::span<const double> y);
// sqrt(between-group sum of squares / total sum of squares).
Association correlation_ratio(std::span<const std::int32_t> categories, std::span<const double> values);
// U(Y|X) = (H(Y) - H(Y|X)) / H(Y): share of the entropy of y explained by x.
Association theils_u(std::span<const std::int32_t> y, std::span<const std::int32_t> x);
// Same statistic from a contingency table with rows indexed by x and columns by y.
Association theils_u_table(const std::vector<std::vector<double>>& counts_x_by_y);

// Association matrix over the feature columns and the target. Numerical
// pairs use Pearson, mixed pairs the correlation ratio, categorical pairs
// Theil's U with entry (i, j) = U(column i | column j).
struct CorrelationMatrix {
  std::vector<std::string> columns;
  std::vector<bool> categorical;
  MatrixD values;
  std::vector<std::vector<bool>> degenerate;
};

CorrelationMatrix correlation_matrix(const TabularDataset& data);
// Elementwise |real - synthetic|; a cell is flagged when either side is degenerate.
CorrelationMatrix corr_diff(const TabularDataset& real, const TabularDataset& synthetic);

struct FeatureHistogram {
  std::string name;
  bool categorical = false;
  std::vector<double> edges;        // numerical: bins + 1 edges
  std::vector<std::string> labels;  // categorical: one bin per category
  std::vector<std::size_t> real;
  std::vector<std::size_t> synthetic;
};

// Edges span the real data range; values outside it land in the edge bins.
// Throws std::invalid_argument when bins < 2.
std::vector<FeatureHistogram> histogram_export(const TabularDataset& real, const TabularDataset& synthetic,
                                               std::size_t bins);

}  // namespace tabsynth
