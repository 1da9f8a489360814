#include "tabsynth/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "tabsynth/errors.hpp"
#include "tabsynth/parallel.hpp"

namespace tabsynth {
namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": inputs differ in length");
  if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

double entropy(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

std::int32_t max_code(std::span<const std::int32_t> v) {
  std::int32_t m = -1;
  for (auto c : v) {
    if (c < 0) throw std::invalid_argument("negative category code");
    m = std::max(m, c);
  }
  return m;
}

}  // namespace

double f1_score(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "f1_score");
  std::map<int, std::array<std::size_t, 3>> stats;  // tp, fp, fn
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) {
      ++stats[y_true[i]][0];
    } else {
      ++stats[y_pred[i]][1];
      ++stats[y_true[i]][2];
    }
  }
  double sum = 0.0;
  for (const auto& [label, s] : stats) {
    const double denom = 2.0 * static_cast<double>(s[0]) + static_cast<double>(s[1] + s[2]);
    sum += denom > 0.0 ? 2.0 * static_cast<double>(s[0]) / denom : 0.0;
  }
  return sum / static_cast<double>(stats.size());
}

double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "r2_score");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot == 0.0) throw UndefinedScoreError("r2_score: y_true has zero variance");
  return 1.0 - ss_res / ss_tot;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<double> closest_record_distances(const MatrixD& real, const MatrixD& synthetic, std::size_t threads) {
  if (real.rows() == 0 || synthetic.rows() == 0) throw std::invalid_argument("dcr: empty input");
  if (real.cols() != synthetic.cols()) throw DimensionError("dcr: real and synthetic widths differ");
  std::vector<double> out(static_cast<std::size_t>(synthetic.rows()));
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (out.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, resolve_threads(threads), [&](std::size_t chunk) {
    const std::size_t end = std::min(out.size(), (chunk + 1) * kChunk);
    for (std::size_t i = chunk * kChunk; i < end; ++i) {
      const auto s = synthetic.row(static_cast<Eigen::Index>(i));
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < real.rows(); ++r) best = std::min(best, (real.row(r) - s).squaredNorm());
      out[i] = std::sqrt(best);
    }
  });
  return out;
}

double dcr(const MatrixD& real, const MatrixD& synthetic, std::size_t threads) {
  return median(closest_record_distances(real, synthetic, threads));
}

Association pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), "pearson");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

Association correlation_ratio(std::span<const std::int32_t> categories, std::span<const double> values) {
  check_lengths(categories.size(), values.size(), "correlation_ratio");
  const auto groups = static_cast<std::size_t>(max_code(categories) + 1);
  std::vector<double> sum(groups, 0.0), count(groups, 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[static_cast<std::size_t>(categories[i])] += values[i];
    count[static_cast<std::size_t>(categories[i])] += 1.0;
    mean += values[i];
  }
  mean /= static_cast<double>(values.size());
  double ss_total = 0.0;
  for (double v : values) ss_total += (v - mean) * (v - mean);
  if (ss_total == 0.0) return {0.0, true};
  double ss_between = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    if (count[g] > 0.0) {
      const double gm = sum[g] / count[g];
      ss_between += count[g] * (gm - mean) * (gm - mean);
    }
  }
  return {std::clamp(std::sqrt(ss_between / ss_total), 0.0, 1.0), false};
}

Association theils_u_table(const std::vector<std::vector<double>>& counts) {
  if (counts.empty() || counts[0].empty()) throw std::invalid_argument("theils_u: empty contingency table");
  const std::size_t ny = counts[0].size();
  std::vector<double> y_marginal(ny, 0.0);
  double total = 0.0;
  for (const auto& row : counts) {
    if (row.size() != ny) throw DimensionError("theils_u: ragged contingency table");
    for (std::size_t j = 0; j < ny; ++j) {
      y_marginal[j] += row[j];
      total += row[j];
    }
  }
  const double h_y = entropy(y_marginal);
  if (h_y == 0.0) return {0.0, true};
  double h_y_given_x = 0.0;
  for (const auto& row : counts) {
    double rt = 0.0;
    for (double c : row) rt += c;
    if (rt > 0.0) h_y_given_x += (rt / total) * entropy(row);
  }
  return {std::clamp((h_y - h_y_given_x) / h_y, 0.0, 1.0), false};
}

Association theils_u(std::span<const std::int32_t> y, std::span<const std::int32_t> x) {
  check_lengths(y.size(), x.size(), "theils_u");
  const auto ny = static_cast<std::size_t>(max_code(y) + 1);
  const auto nx = static_cast<std::size_t>(max_code(x) + 1);
  std::vector<std::vector<double>> table(nx, std::vector<double>(ny, 0.0));
  for (std::size_t i = 0; i < y.size(); ++i) table[static_cast<std::size_t>(x[i])][static_cast<std::size_t>(y[i])] += 1.0;
  return theils_u_table(table);
}

namespace {

struct Column {
  std::string name;
  bool categorical = false;
  std::vector<double> values;
  std::vector<std::int32_t> codes;
};

std::vector<Column> columns_of(const TabularDataset& d) {
  std::vector<Column> cols;
  for (std::size_t c = 0; c < d.num_numerical(); ++c) {
    Column col{d.schema.numerical[c], false, {}, {}};
    const auto v = d.numerical.col(static_cast<Eigen::Index>(c));
    col.values.assign(v.begin(), v.end());
    cols.push_back(std::move(col));
  }
  for (std::size_t c = 0; c < d.num_categorical(); ++c) {
    cols.push_back({d.schema.categorical[c].name, true, {}, d.categorical[c]});
  }
  Column target{d.schema.target, is_classification(d.schema.task), {}, {}};
  if (target.categorical) {
    for (double v : d.target) target.codes.push_back(static_cast<std::int32_t>(v));
  } else {
    target.values = d.target;
  }
  cols.push_back(std::move(target));
  return cols;
}

}  // namespace

CorrelationMatrix correlation_matrix(const TabularDataset& data) {
  if (data.num_rows() < 2) throw std::invalid_argument("correlation_matrix: need at least 2 rows");
  const auto cols = columns_of(data);
  const std::size_t n = cols.size();
  CorrelationMatrix m;
  m.values = MatrixD::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.degenerate.assign(n, std::vector<bool>(n, false));
  for (const auto& c : cols) {
    m.columns.push_back(c.name);
    m.categorical.push_back(c.categorical);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Column& a = cols[i];
      const Column& b = cols[j];
      Association s;
      if (!a.categorical && !b.categorical) {
        s = pearson(a.values, b.values);
      } else if (a.categorical && b.categorical) {
        s = theils_u(a.codes, b.codes);
      } else if (a.categorical) {
        s = correlation_ratio(a.codes, b.values);
      } else {
        s = correlation_ratio(b.codes, a.values);
      }
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.value;
      m.degenerate[i][j] = s.degenerate;
    }
  }
  return m;
}

CorrelationMatrix corr_diff(const TabularDataset& real, const TabularDataset& synthetic) {
  if (!real.schema.same_layout(synthetic.schema)) throw DataError("corr_diff: schemas differ");
  CorrelationMatrix a = correlation_matrix(real);
  const CorrelationMatrix b = correlation_matrix(synthetic);
  a.values = (a.values - b.values).cwiseAbs();
  for (std::size_t i = 0; i < a.degenerate.size(); ++i) {
    for (std::size_t j = 0; j < a.degenerate.size(); ++j) a.degenerate[i][j] = a.degenerate[i][j] || b.degenerate[i][j];
  }
  return a;
}

std::vector<FeatureHistogram> histogram_export(const TabularDataset& real, const TabularDataset& synthetic,
                                               std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("histogram_export: need at least 2 bins");
  if (!real.schema.same_layout(synthetic.schema)) throw DataError("histogram_export: schemas differ");
  if (real.num_rows() == 0) throw std::invalid_argument("histogram_export: real data is empty");
  const auto rc = columns_of(real);
  const auto sc = columns_of(synthetic);
  std::vector<FeatureHistogram> out;
  for (std::size_t c = 0; c < rc.size(); ++c) {
    FeatureHistogram h;
    h.name = rc[c].name;
    h.categorical = rc[c].categorical;
    if (h.categorical) {
      const bool is_target = c + 1 == rc.size();
      h.labels = is_target ? real.schema.target_vocabulary
                           : real.schema.categorical[c - real.num_numerical()].vocabulary;
      h.real.assign(h.labels.size(), 0);
      h.synthetic.assign(h.labels.size(), 0);
      for (auto code : rc[c].codes) ++h.real.at(static_cast<std::size_t>(code));
      for (auto code : sc[c].codes) ++h.synthetic.at(static_cast<std::size_t>(code));
    } else {
      const auto [lo_it, hi_it] = std::minmax_element(rc[c].values.begin(), rc[c].values.end());
      double lo = *lo_it;
      double hi = *hi_it;
      if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
      }
      const double width = (hi - lo) / static_cast<double>(bins);
      for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + width * static_cast<double>(b));
      auto bin_of = [&](double v) {
        const double pos = std::floor((v - lo) / width);
        if (!(pos > 0.0)) return std::size_t{0};
        return std::min(bins - 1, static_cast<std::size_t>(pos));
      };
      h.real.assign(bins, 0);
      h.synthetic.assign(bins, 0);
      for (double v : rc[c].values) ++h.real[bin_of(v)];
      for (double v : sc[c].values) ++h.synthetic[bin_of(v)];
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace tabsynth
