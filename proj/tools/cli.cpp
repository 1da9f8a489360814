#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "tabsynth/checkpoint.hpp"
#include "tabsynth/errors.hpp"

namespace tabsynth::cli {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    check_keys(j, {"data", "meta", "train", "smote", "eval", "sample_seed"}, "config");
    auto path = [&](const char* key) -> std::optional<std::filesystem::path> {
      if (!j.contains(key)) return std::nullopt;
      std::filesystem::path p = j.at(key).get<std::string>();
      return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    cfg.data = path("data");
    cfg.meta = path("meta");
    read(j, "sample_seed", cfg.sample_seed);
    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t,
                 {"learning_rate", "batch_size", "num_timesteps", "iterations", "num_layers", "layer_width",
                  "sample_proportion", "seed", "log_every"},
                 "train");
      read(t, "learning_rate", cfg.train.learning_rate);
      read(t, "batch_size", cfg.train.batch_size);
      read(t, "num_timesteps", cfg.train.num_timesteps);
      read(t, "iterations", cfg.train.iterations);
      read(t, "num_layers", cfg.train.num_layers);
      read(t, "layer_width", cfg.train.layer_width);
      read(t, "sample_proportion", cfg.train.sample_proportion);
      read(t, "seed", cfg.train.seed);
      read(t, "log_every", cfg.train.log_every);
    }
    if (j.contains("smote")) {
      const json& s = j.at("smote");
      check_keys(s, {"k_neighbours", "lambda_lo", "lambda_hi", "sample_proportion", "seed"}, "smote");
      read(s, "k_neighbours", cfg.smote.k_neighbours);
      read(s, "lambda_lo", cfg.smote.lambda_lo);
      read(s, "lambda_hi", cfg.smote.lambda_hi);
      read(s, "sample_proportion", cfg.smote.sample_proportion);
      read(s, "seed", cfg.smote.seed);
    }
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      check_keys(e, {"learners", "seeds", "bins"}, "eval");
      if (e.contains("learners")) {
        for (const auto& name : e.at("learners")) cfg.eval.learners.push_back(parse_learner(name.get<std::string>()));
      }
      read(e, "seeds", cfg.eval.seeds);
      read(e, "bins", cfg.eval.bins);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.train.validate();
  cfg.smote.validate();
  if (cfg.eval.seeds == 0) throw std::invalid_argument("config: eval.seeds must be at least 1");
  if (cfg.eval.bins < 2) throw std::invalid_argument("config: eval.bins must be at least 2");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string loss_log_csv(const std::vector<LossRecord>& log) {
  std::string out = "step,l_simple,l_multinomial,total\n";
  for (const auto& r : log) {
    out += std::to_string(r.step) + "," + format_number(r.loss.l_simple) + "," +
           format_number(r.loss.l_multinomial_mean) + "," + format_number(r.loss.total) + "\n";
  }
  return out;
}

TabularDataset load_synthetic(const std::filesystem::path& path, const Metadata& meta, const Schema& reference) {
  Metadata m = meta;
  m.schema.split_column.reset();
  TabularDataset data = load_csv(path, m, &reference);
  data.split.assign(data.num_rows(), Split::kTrain);
  return data;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion-based synthesizer for mixed-type tabular data"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker cap (default: TABSYNTH_THREADS or all cores)");

  // train
  std::filesystem::path data_path, meta_path, config_path, out_path, loss_path;
  std::optional<std::uint64_t> seed;
  auto* train = app.add_subcommand("train", "Fit a model and write a checkpoint plus loss log");
  train->add_option("--data", data_path, "CSV dataset");
  train->add_option("--meta", meta_path, "Metadata JSON");
  train->add_option("--config", config_path, "Run config JSON");
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--loss-log", loss_path, "Loss log CSV (default: <out>.loss.csv)");
  train->add_option("--seed", seed, "Training seed");

  // sample
  std::filesystem::path checkpoint_path;
  std::optional<std::size_t> n_rows;
  std::optional<double> proportion;
  auto* sample_cmd = app.add_subcommand("sample", "Draw synthetic rows from a checkpoint");
  sample_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  auto* n_opt = sample_cmd->add_option("--n", n_rows, "Number of rows");
  sample_cmd->add_option("--proportion", proportion, "Rows as a multiple of the training split size")->excludes(n_opt);
  sample_cmd->add_option("--seed", seed, "Sampling seed");
  sample_cmd->add_option("--out", out_path, "Output CSV")->required();

  // smote
  std::optional<std::size_t> k;
  std::optional<double> lambda_lo, lambda_hi;
  auto* smote_cmd = app.add_subcommand("smote", "Interpolation baseline");
  smote_cmd->add_option("--data", data_path, "CSV dataset");
  smote_cmd->add_option("--meta", meta_path, "Metadata JSON");
  smote_cmd->add_option("--config", config_path, "Run config JSON");
  smote_cmd->add_option("--k", k, "Neighbour rank");
  smote_cmd->add_option("--lambda-lo", lambda_lo, "Lower interpolation bound");
  smote_cmd->add_option("--lambda-hi", lambda_hi, "Upper interpolation bound");
  smote_cmd->add_option("--proportion", proportion, "Rows as a multiple of the training split size");
  smote_cmd->add_option("--seed", seed, "Seed");
  smote_cmd->add_option("--out", out_path, "Output CSV")->required();

  // eval
  std::filesystem::path real_path, synthetic_path;
  std::optional<std::size_t> seeds, bins;
  std::vector<std::string> learner_names;
  auto* eval_cmd = app.add_subcommand("eval", "Score synthetic data against real data");
  eval_cmd->add_option("--real", real_path, "Real CSV with splits")->required();
  eval_cmd->add_option("--synthetic", synthetic_path, "Synthetic CSV")->required();
  eval_cmd->add_option("--meta", meta_path, "Metadata JSON")->required();
  eval_cmd->add_option("--config", config_path, "Run config JSON");
  eval_cmd->add_option("--out", out_path, "Report JSON")->required();
  eval_cmd->add_option("--seeds", seeds, "Learner seeds to average over");
  eval_cmd->add_option("--bins", bins, "Histogram bins for numerical columns");
  eval_cmd->add_option("--learners", learner_names, "Learners to run");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Run the diffusion model and the baseline end to end");
  compare_cmd->add_option("--real", real_path, "Real CSV with splits")->required();
  compare_cmd->add_option("--meta", meta_path, "Metadata JSON")->required();
  compare_cmd->add_option("--config", config_path, "Run config JSON");
  compare_cmd->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    cfg.eval.threads = threads;
    if (seeds) cfg.eval.seeds = *seeds;
    if (bins) cfg.eval.bins = *bins;
    if (!learner_names.empty()) {
      cfg.eval.learners.clear();
      for (const auto& name : learner_names) cfg.eval.learners.push_back(parse_learner(name));
    }
    auto resolve = [](const std::filesystem::path& flag, const std::optional<std::filesystem::path>& from_cfg,
                      const char* name) {
      if (!flag.empty()) return flag;
      if (from_cfg) return *from_cfg;
      throw std::invalid_argument(std::string("--") + name + " is required (flag or config)");
    };
    auto on_log = [&err](const LossRecord& r) {
      err << "step " << r.step << "  total " << r.loss.total << "  smoothed " << r.smoothed_total << "\n";
    };

    if (*train) {
      const Metadata meta = load_metadata(resolve(meta_path, cfg.meta, "meta"));
      const TabularDataset data = load_csv(resolve(data_path, cfg.data, "data"), meta);
      if (seed) cfg.train.seed = *seed;
      const FitResult result = fit(data, cfg.train, on_log);
      save_checkpoint(out_path, result.checkpoint);
      const auto log_path = loss_path.empty() ? std::filesystem::path(out_path.string() + ".loss.csv") : loss_path;
      write_text(log_path, loss_log_csv(result.log));
      out << "wrote " << out_path.string() << " and " << log_path.string() << "\n";
    } else if (*sample_cmd) {
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      SampleOptions opts;
      opts.num_rows = n_rows;
      opts.proportion = proportion;
      opts.seed = seed.value_or(0);
      opts.threads = threads;
      const TabularDataset synth = sample(ck, opts);
      write_csv(out_path, synth);
      out << "wrote " << synth.num_rows() << " rows to " << out_path.string() << "\n";
    } else if (*smote_cmd) {
      const Metadata meta = load_metadata(resolve(meta_path, cfg.meta, "meta"));
      const TabularDataset data = load_csv(resolve(data_path, cfg.data, "data"), meta);
      if (k) cfg.smote.k_neighbours = *k;
      if (lambda_lo) cfg.smote.lambda_lo = *lambda_lo;
      if (lambda_hi) cfg.smote.lambda_hi = *lambda_hi;
      if (proportion) cfg.smote.sample_proportion = *proportion;
      if (seed) cfg.smote.seed = *seed;
      const TabularDataset synth = smote_sample(data, cfg.smote, threads);
      write_csv(out_path, synth);
      out << "wrote " << synth.num_rows() << " rows to " << out_path.string() << "\n";
    } else if (*eval_cmd) {
      const Metadata meta = load_metadata(meta_path);
      const TabularDataset real = load_csv(real_path, meta);
      const TabularDataset synth = load_synthetic(synthetic_path, meta, real.schema);
      const EvalReport report = evaluate(real, synth, cfg.eval);
      write_text(out_path, report_to_json(report));
      out << "dcr " << report.dcr << "\n";
    } else if (*compare_cmd) {
      const Metadata meta = load_metadata(meta_path);
      const TabularDataset real = load_csv(real_path, meta);
      std::filesystem::create_directories(out_path);

      const FitResult result = fit(real, cfg.train, on_log);
      save_checkpoint(out_path / "model.tbdd", result.checkpoint);
      write_text(out_path / "loss.csv", loss_log_csv(result.log));
      SampleOptions opts;
      opts.seed = cfg.sample_seed;
      opts.threads = threads;
      const TabularDataset ddpm = sample(result.checkpoint, opts);
      write_csv(out_path / "diffusion.csv", ddpm);
      const TabularDataset smote = smote_sample(real, cfg.smote, threads);
      write_csv(out_path / "smote.csv", smote);

      std::vector<CompareRow> rows;
      for (const auto& [name, synth] : {std::pair<std::string, const TabularDataset*>{"diffusion", &ddpm},
                                        std::pair<std::string, const TabularDataset*>{"smote", &smote}}) {
        const EvalReport report = evaluate(real, *synth, cfg.eval);
        write_text(out_path / ("report_" + name + ".json"), report_to_json(report));
        rows.push_back({name, report.efficiency, report.dcr});
      }
      write_text(out_path / "compare.json", compare_to_json(real.schema.task, rows));
      const std::string table = compare_to_table(rows);
      write_text(out_path / "compare.tsv", table);
      out << table;
    }
    return kOk;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const UndefinedScoreError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::logic_error& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace tabsynth::cli
