#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "support/toy_data.hpp"

namespace tabsynth {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tabsynth_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    spit(dir_ / "toy.csv", testing::toy_mixture_csv(400, 3));
    spit(dir_ / "toy.meta.json", R"({"task": "binclass", "split_seed": 3, "columns": [
        {"name": "x", "kind": "numerical"}, {"name": "c", "kind": "categorical"},
        {"name": "y", "kind": "target"}]})");
    spit(dir_ / "small.json", R"({"train": {"iterations": 30, "num_timesteps": 20, "num_layers": 2,
        "layer_width": 32, "batch_size": 32}})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }
  std::string p(const char* name) const { return (dir_ / name).string(); }

  int train() {
    return run({"train", "--data", p("toy.csv"), "--meta", p("toy.meta.json"), "--config", p("small.json"), "--out",
                p("model.tbdd")});
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, ConfigRejectsUnknownKeys) {
  EXPECT_THROW(cli::parse_run_config(R"({"train": {"iterationz": 5}})"), std::invalid_argument);
  EXPECT_THROW(cli::parse_run_config(R"({"bogus": 1})"), std::invalid_argument);
  EXPECT_THROW(cli::parse_run_config("{"), std::invalid_argument);
  const auto cfg = cli::parse_run_config(R"({"data": "d.csv", "train": {"iterations": 7}, "sample_seed": 4})", "/base");
  EXPECT_EQ(cfg.train.iterations, 7u);
  EXPECT_EQ(cfg.sample_seed, 4u);
  EXPECT_EQ(*cfg.data, fs::path("/base/d.csv"));

  spit(dir_ / "bad.json", R"({"train": {"iterationz": 5}})");
  EXPECT_EQ(run({"train", "--data", p("toy.csv"), "--meta", p("toy.meta.json"), "--config", p("bad.json"), "--out",
                 p("m.tbdd")}),
            cli::kUsage);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
  EXPECT_EQ(run({"sample", "--out", p("x.csv")}), cli::kUsage);
  EXPECT_EQ(run({"--help"}), cli::kOk);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(run({"train", "--data", p("missing.csv"), "--meta", p("toy.meta.json"), "--out", p("m.tbdd")}),
            cli::kData);
  spit(dir_ / "broken.csv", "x,c,y\n1,a\n");
  EXPECT_EQ(run({"smote", "--data", p("broken.csv"), "--meta", p("toy.meta.json"), "--out", p("s.csv")}), cli::kData);
  spit(dir_ / "junk.tbdd", "junk");
  EXPECT_EQ(run({"sample", "--checkpoint", p("junk.tbdd"), "--out", p("s.csv")}), cli::kData);
}

TEST_F(CliTest, TrainThenSampleIsReproducible) {
  ASSERT_EQ(train(), cli::kOk) << err_.str();
  const std::string log = slurp(dir_ / "model.tbdd.loss.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')), "step,l_simple,l_multinomial,total");

  ASSERT_EQ(run({"sample", "--checkpoint", p("model.tbdd"), "--n", "100", "--seed", "5", "--out", p("a.csv")}),
            cli::kOk);
  ASSERT_EQ(run({"--threads", "1", "sample", "--checkpoint", p("model.tbdd"), "--n", "100", "--seed", "5", "--out",
                 p("b.csv")}),
            cli::kOk);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));

  const auto meta = load_metadata(dir_ / "toy.meta.json");
  const auto real = load_csv(dir_ / "toy.csv", meta);
  const auto synth = cli::load_synthetic(dir_ / "a.csv", meta, real.schema);
  EXPECT_EQ(synth.num_rows(), 100u);
  const auto counts = real.subset(Split::kTrain).class_counts();
  const auto expected = allocate_counts(100, counts);
  EXPECT_EQ(synth.class_counts(), expected);

  EXPECT_EQ(run({"sample", "--checkpoint", p("model.tbdd"), "--n", "5", "--proportion", "1", "--out", p("c.csv")}),
            cli::kUsage);
}

TEST_F(CliTest, EvalOfTrainingRowsHasZeroDcr) {
  const auto meta = load_metadata(dir_ / "toy.meta.json");
  const auto real = load_csv(dir_ / "toy.csv", meta);
  write_csv(dir_ / "copy.csv", real.subset(Split::kTrain));
  ASSERT_EQ(run({"eval", "--real", p("toy.csv"), "--synthetic", p("copy.csv"), "--meta", p("toy.meta.json"), "--out",
                 p("report.json"), "--learners", "logistic-regression"}),
            cli::kOk)
      << err_.str();
  const auto j = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["dcr"].get<double>(), 0.0);
  EXPECT_EQ(j["task"], "binclass");
  EXPECT_EQ(j["histograms"].size(), 3u);
}

TEST_F(CliTest, SmoteCommand) {
  ASSERT_EQ(run({"smote", "--data", p("toy.csv"), "--meta", p("toy.meta.json"), "--k", "3", "--proportion", "0.5",
                 "--out", p("s.csv")}),
            cli::kOk)
      << err_.str();
  const auto meta = load_metadata(dir_ / "toy.meta.json");
  const auto real = load_csv(dir_ / "toy.csv", meta);
  EXPECT_EQ(cli::load_synthetic(dir_ / "s.csv", meta, real.schema).num_rows(), 160u);
  EXPECT_EQ(run({"smote", "--data", p("toy.csv"), "--meta", p("toy.meta.json"), "--lambda-lo", "0.9", "--lambda-hi",
                 "0.1", "--out", p("s.csv")}),
            cli::kUsage);
}

TEST_F(CliTest, CompareWritesEveryArtifact) {
  ASSERT_EQ(run({"compare", "--real", p("toy.csv"), "--meta", p("toy.meta.json"), "--config", p("small.json"), "--out",
                 p("cmp")}),
            cli::kOk)
      << err_.str();
  for (const char* f : {"model.tbdd", "loss.csv", "diffusion.csv", "smote.csv", "report_diffusion.json",
                        "report_smote.json", "compare.json", "compare.tsv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "cmp" / f)) << f;
  }
  const auto j = nlohmann::json::parse(slurp(dir_ / "cmp" / "compare.json"));
  EXPECT_EQ(j["methods"].size(), 2u);
}

}  // namespace
}  // namespace tabsynth
