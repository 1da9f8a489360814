#pragma once

// Evaluation report. JSON layout (schema_version 1):
//
//   {"schema_version": 1,
//    "task": "binclass",
//    "efficiency": {"logistic-regression": {"metric": "f1", "mean": 0.81, "per_seed": [...]}, ...},
//    "dcr": 0.12,
//    "corr_diff": {"columns": [...], "values": [[...], ...], "degenerate": [[...], ...]},
//    "histograms": {"<column>": {"kind": "numerical", "edges": [...], "real": [...], "synthetic": [...]},
//                   "<column>": {"kind": "categorical", "labels": [...], "real": [...], "synthetic": [...]}}}

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tabsynth/dataset.hpp"
#include "tabsynth/learners.hpp"
#include "tabsynth/metrics.hpp"

namespace tabsynth {

inline constexpr int kReportSchemaVersion = 1;

struct LearnerScore {
  LearnerKind learner = LearnerKind::kLogistic;
  double mean = 0.0;
  std::vector<double> per_seed;
};

struct EvalReport {
  TaskKind task = TaskKind::kBinClass;
  std::vector<LearnerScore> efficiency;
  double dcr = 0.0;
  CorrelationMatrix corr_diff;
  std::vector<FeatureHistogram> histograms;
};

struct EvalOptions {
  std::vector<LearnerKind> learners;  // empty: every learner valid for the task
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;
  std::size_t bins = 20;
  std::size_t threads = 0;
};

// `real` carries split tags: learners are scored on its test split, and DCR,
// correlations and histograms compare `synthetic` against its train split.
// DCR uses Preprocessor::encode_for_distance fitted on the real train split.
EvalReport evaluate(const TabularDataset& real, const TabularDataset& synthetic, const EvalOptions& options);

std::string report_to_json(const EvalReport& report);

struct CompareRow {
  std::string method;
  std::vector<LearnerScore> efficiency;
  double dcr = 0.0;
};

std::string compare_to_json(TaskKind task, const std::vector<CompareRow>& rows);
// Plain-text table: method, one column per learner, dcr.
std::string compare_to_table(const std::vector<CompareRow>& rows);

}  // namespace tabsynth
