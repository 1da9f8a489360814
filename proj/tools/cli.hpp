#pragma once

// Command-line pipelines: train, sample, smote, eval, compare.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/engine.hpp"
#include "tabsynth/report.hpp"
#include "tabsynth/smote.hpp"

namespace tabsynth::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

// JSON run configuration. Every section and key is optional; unknown keys
// are rejected.
//
//   {"data": "train.csv", "meta": "train.meta.json",
//    "train": {"learning_rate": 0.002, "batch_size": 256, "num_timesteps": 100,
//              "iterations": 10000, "num_layers": 4, "layer_width": 256,
//              "sample_proportion": 1.0, "seed": 0, "log_every": 100},
//    "smote": {"k_neighbours": 5, "lambda_lo": 0.0, "lambda_hi": 1.0,
//              "sample_proportion": 1.0, "seed": 0},
//    "eval":  {"learners": ["logistic-regression", "ridge-regression", "small-mlp"],
//              "seeds": 1, "bins": 20},
//    "sample_seed": 0}
struct RunConfig {
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> meta;
  TrainConfig train;
  SmoteConfig smote;
  EvalOptions eval;
  std::uint64_t sample_seed = 0;
};

// Throws std::invalid_argument on malformed JSON, unknown keys or bad values.
// Relative dataset paths are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Loss log CSV: step,l_simple,l_multinomial,total
std::string loss_log_csv(const std::vector<LossRecord>& log);

// Loads a synthetic CSV against a reference schema; every row is tagged train.
TabularDataset load_synthetic(const std::filesystem::path& path, const Metadata& meta, const Schema& reference);

// Runs one command line (args exclude the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tabsynth::cli
