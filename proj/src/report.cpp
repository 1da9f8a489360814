#include "tabsynth/report.hpp"

#include <cstdio>
#include <json.hpp>

#include "tabsynth/errors.hpp"
#include "tabsynth/preprocess.hpp"

namespace tabsynth {
namespace {

using nlohmann::json;

std::vector<LearnerKind> default_learners(TaskKind task) {
  if (is_classification(task)) return {LearnerKind::kLogistic, LearnerKind::kRidge, LearnerKind::kMlp};
  return {LearnerKind::kRidge, LearnerKind::kMlp};
}

json efficiency_json(TaskKind task, const std::vector<LearnerScore>& scores) {
  json out = json::object();
  for (const auto& s : scores) {
    out[std::string(to_string(s.learner))] = {
        {"metric", is_classification(task) ? "f1" : "r2"}, {"mean", s.mean}, {"per_seed", s.per_seed}};
  }
  return out;
}

}  // namespace

EvalReport evaluate(const TabularDataset& real, const TabularDataset& synthetic, const EvalOptions& options) {
  if (!real.schema.same_layout(synthetic.schema)) throw DataError("real and synthetic schemas differ");
  if (options.seeds == 0) throw std::invalid_argument("eval: seeds must be at least 1");
  const TabularDataset train = real.subset(Split::kTrain);
  const TabularDataset test = real.subset(Split::kTest);
  if (train.num_rows() == 0 || test.num_rows() == 0) throw DataError("real data needs non-empty train and test splits");
  if (synthetic.num_rows() == 0) throw DataError("synthetic data is empty");

  EvalReport report;
  report.task = real.schema.task;
  const auto learners = options.learners.empty() ? default_learners(real.schema.task) : options.learners;
  for (LearnerKind kind : learners) {
    LearnerScore score{kind, 0.0, {}};
    for (std::size_t s = 0; s < options.seeds; ++s) {
      score.per_seed.push_back(ml_efficiency(synthetic, test, kind, options.base_seed + s));
      score.mean += score.per_seed.back();
    }
    score.mean /= static_cast<double>(options.seeds);
    report.efficiency.push_back(std::move(score));
  }

  const Preprocessor pre = Preprocessor::fit(train);
  report.dcr = dcr(pre.encode_for_distance(train), pre.encode_for_distance(synthetic), options.threads);
  if (synthetic.num_rows() >= 2 && train.num_rows() >= 2) report.corr_diff = corr_diff(train, synthetic);
  report.histograms = histogram_export(train, synthetic, options.bins);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["task"] = std::string(to_string(report.task));
  j["efficiency"] = efficiency_json(report.task, report.efficiency);
  j["dcr"] = report.dcr;

  const auto& cd = report.corr_diff;
  json values = json::array();
  for (Eigen::Index r = 0; r < cd.values.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < cd.values.cols(); ++c) row.push_back(cd.values(r, c));
    values.push_back(std::move(row));
  }
  j["corr_diff"] = {{"columns", cd.columns}, {"values", values}, {"degenerate", cd.degenerate}};

  json hist = json::object();
  for (const auto& h : report.histograms) {
    json e = {{"kind", h.categorical ? "categorical" : "numerical"}, {"real", h.real}, {"synthetic", h.synthetic}};
    if (h.categorical) {
      e["labels"] = h.labels;
    } else {
      e["edges"] = h.edges;
    }
    hist[h.name] = std::move(e);
  }
  j["histograms"] = std::move(hist);
  return j.dump(2) + "\n";
}

std::string compare_to_json(TaskKind task, const std::vector<CompareRow>& rows) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["task"] = std::string(to_string(task));
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"method", r.method}, {"efficiency", efficiency_json(task, r.efficiency)}, {"dcr", r.dcr}});
  }
  j["methods"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string compare_to_table(const std::vector<CompareRow>& rows) {
  std::string out = "method";
  if (!rows.empty()) {
    for (const auto& s : rows.front().efficiency) out += "\t" + std::string(to_string(s.learner));
  }
  out += "\tdcr\n";
  char buf[32];
  for (const auto& r : rows) {
    out += r.method;
    for (const auto& s : r.efficiency) {
      std::snprintf(buf, sizeof buf, "\t%.4f", s.mean);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "\t%.4f\n", r.dcr);
    out += buf;
  }
  return out;
}

}  // namespace tabsynth
