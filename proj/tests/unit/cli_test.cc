#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "sent/dataset.h"
#include "sent/error.h"
#include "sent/model.h"
#include "sent/trainer.h"
#include "sent_cli/commands.h"
#include "sent_cli/config.h"
#include "test_util.h"

namespace sent::cli {
namespace {

using sent::testing::ReadFile;
using sent::testing::TempDir;
using sent::testing::WriteFile;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Sent(std::vector<std::string> args) {
  args.insert(args.begin(), "sent");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> ReadLines(const std::filesystem::path &path) {
  std::vector<nlohmann::json> lines;
  std::istringstream in(ReadFile(path));
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  return lines;
}

const char *kFastConf = R"(# small and quick
[run]
k = 3
epochs = 4
max_iterations = 2
final_pt_epochs = 3
[optimizer]
kind = sgd
learning_rate = 6
[featurizer]
hash_dim = 4096
length_normalize = false
[refine]
th = 0.3
)";

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") {}

  void Synth() {
    ASSERT_EQ(Sent({"synth", "--classes", "5", "--per-class", "60", "--seed", "1", "--out",
                   (dir_ / "data").string()}).code, 0);
  }
  std::string P(const std::string &name) const { return (dir_ / name).string(); }

  TempDir dir_;
};

TEST_F(CliTest, SynthWritesSplitsAndIsReproducible) {
  Synth();
  const std::string first = ReadFile(dir_ / "data/train.jsonl");
  EXPECT_EQ(ReadLines(dir_ / "data/train.jsonl").size(), 5u * 42);
  EXPECT_EQ(ReadLines(dir_ / "data/dev.jsonl").size(), 5u * 9);
  EXPECT_EQ(ReadLines(dir_ / "data/test.jsonl").size(), 5u * 9);
  EXPECT_EQ(LoadLabelSpace(dir_ / "data/labels.txt").size(), 5);
  Synth();
  EXPECT_EQ(ReadFile(dir_ / "data/train.jsonl"), first);
  EXPECT_EQ(ReadFile(dir_ / "data/dev.jsonl"), ReadFile(dir_ / "data/dev.jsonl"));
}

TEST_F(CliTest, SynthSingleClassIsUsageError) {
  const Outcome o = Sent({"synth", "--classes", "1", "--out", P("x")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("error[usage]"), std::string::npos);
}

TEST_F(CliTest, CorruptCountsAndManifest) {
  Synth();
  const std::string in = P("data/train.jsonl");
  ASSERT_EQ(Sent({"corrupt", "--ratio", "0.3", "--seed", "5", in, P("noisy.jsonl")}).code, 0);
  const auto lines = ReadLines(dir_ / "noisy.jsonl");
  int noisy = 0;
  for (const auto &line : lines) noisy += line["is_noise"].get<bool>();
  EXPECT_EQ(noisy, static_cast<int>(std::nearbyint(0.3 * lines.size())));
  const auto manifest = nlohmann::json::parse(ReadFile(dir_ / "noisy.jsonl.manifest.json"));
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["corrupted"], noisy);

  ASSERT_EQ(Sent({"corrupt", "--ratio", "0.3", "--seed", "5", in, P("again.jsonl")}).code, 0);
  EXPECT_EQ(ReadFile(dir_ / "again.jsonl"), ReadFile(dir_ / "noisy.jsonl"));
}

TEST_F(CliTest, CorruptZeroRatioKeepsLabels) {
  Synth();
  ASSERT_EQ(Sent({"corrupt", "--ratio", "0", P("data/train.jsonl"), P("same.jsonl")}).code, 0);
  const auto in = ReadLines(dir_ / "data/train.jsonl");
  const auto out = ReadLines(dir_ / "same.jsonl");
  ASSERT_EQ(in.size(), out.size());
  for (size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[i]["assigned_label"], in[i]["assigned_label"]);
    EXPECT_EQ(out[i]["is_noise"], false);
  }
}

TEST_F(CliTest, CorruptErrors) {
  Synth();
  EXPECT_EQ(Sent({"corrupt", "--ratio", "1.1", P("data/train.jsonl"), P("o.jsonl")}).code, 2);
  EXPECT_EQ(Sent({"corrupt", P("missing.jsonl"), P("o.jsonl")}).code, 6);
  WriteFile(dir_ / "nogold.jsonl",
            R"({"id":"a","tokens":["x","y"],"head_span":[0,1],"tail_span":[1,2],)"
            R"("head_type":"P","tail_type":"O","bag_labels":["NA"],"assigned_label":"NA"})"
            "\n"
            R"({"id":"b","tokens":["x","y"],"head_span":[0,1],"tail_span":[1,2],)"
            R"("head_type":"P","tail_type":"O","bag_labels":["r"],"assigned_label":"r",)"
            R"("gold_label":"r"})"
            "\n");
  const Outcome o = Sent({"corrupt", P("nogold.jsonl"), P("o.jsonl")});
  EXPECT_EQ(o.code, 7);
  EXPECT_NE(o.err.find("error[data]"), std::string::npos);
}

TEST_F(CliTest, TrainWritesRunDirectoryDeterministically) {
  Synth();
  WriteFile(dir_ / "run.conf", kFastConf);
  ASSERT_EQ(Sent({"corrupt", P("data/train.jsonl"), P("noisy.jsonl")}).code, 0);
  const std::vector<std::string> base{"train", "--config", P("run.conf"), "--train",
                                      P("noisy.jsonl"), "--dev", P("data/dev.jsonl"),
                                      "--test", P("data/test.jsonl")};
  auto with_out = [&](const std::string &out) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--out", P(out)});
    return args;
  };
  ASSERT_EQ(Sent(with_out("run_a")).code, 0);
  ASSERT_EQ(Sent(with_out("run_b")).code, 0);
  for (const char *file :
       {"history.json", "refined_train.jsonl", "summary.json", "final_model.ckpt",
        "best_model.ckpt", "pt_baseline.ckpt", "hist_a_pt_baseline.json",
        "hist_b_nt_iteration1.json", "hist_c_sent.json", "hist_d_final_pt.json",
        "iter_01/model.ckpt", "iter_01/refine_report.json"}) {
    ASSERT_TRUE(std::filesystem::exists(dir_ / "run_a" / file)) << file;
    EXPECT_EQ(ReadFile(dir_ / "run_a" / file), ReadFile(dir_ / "run_b" / file)) << file;
  }
  const auto history = nlohmann::json::parse(ReadFile(dir_ / "run_a/history.json"));
  EXPECT_GE(history["iterations"].size(), 1u);

  // The echoed config alone reproduces the run.
  ASSERT_EQ(Sent({"train", "--config", P("run_a/config.resolved.conf"), "--out", P("run_c")}).code, 0);
  EXPECT_EQ(ReadFile(dir_ / "run_c/history.json"), ReadFile(dir_ / "run_a/history.json"));
  EXPECT_EQ(ReadFile(dir_ / "run_c/final_model.ckpt"), ReadFile(dir_ / "run_a/final_model.ckpt"));
}

TEST_F(CliTest, TrainWithoutFinalPt) {
  Synth();
  WriteFile(dir_ / "run.conf", kFastConf);
  ASSERT_EQ(Sent({"train", "--config", P("run.conf"), "--train", P("data/train.jsonl"), "--dev",
                 P("data/dev.jsonl"), "--max-iterations", "1", "--final-pt-epochs", "0", "--out",
                 P("run")}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "run/best_model.ckpt"));
  EXPECT_FALSE(std::filesystem::exists(dir_ / "run/final_model.ckpt"));
  EXPECT_FALSE(std::filesystem::exists(dir_ / "run/hist_d_final_pt.json"));
  const auto history = nlohmann::json::parse(ReadFile(dir_ / "run/history.json"));
  EXPECT_EQ(history["iterations"].size(), 1u);
  const std::string resolved = ReadFile(dir_ / "run/config.resolved.conf");
  EXPECT_NE(resolved.find("max_iterations = 1"), std::string::npos);
}

TEST_F(CliTest, TrainConfigErrors) {
  Synth();
  EXPECT_EQ(Sent({"train", "--train", P("data/train.jsonl"), "--dev", P("data/dev.jsonl"), "--k",
                 "0", "--out", P("r")}).code, 5);
  EXPECT_EQ(Sent({"train", "--dev", P("data/dev.jsonl"), "--out", P("r")}).code, 2);
  WriteFile(dir_ / "bad.conf", "[run]\nnot_a_key = 3\n");
  const Outcome o = Sent({"train", "--config", P("bad.conf"), "--out", P("r")});
  EXPECT_EQ(o.code, 5);
  EXPECT_NE(o.err.find("error[config]"), std::string::npos);
}

TEST_F(CliTest, EvalPerfectModelAndErrors) {
  Synth();
  WriteFile(dir_ / "run.conf", kFastConf);
  ASSERT_EQ(Sent({"train", "--config", P("run.conf"), "--train", P("data/train.jsonl"), "--dev",
                 P("data/dev.jsonl"), "--final-pt-epochs", "10", "--out", P("run")}).code, 0);
  // A model that fits its training split exactly.
  const RefinedDataset train = LoadDataset(dir_ / "data/train.jsonl");
  RunConfig config;
  config.optimizer.kind = OptimizerKind::kSgd;
  config.optimizer.learning_rate = 6.0;
  config.featurizer.length_normalize = false;
  Model fit = Model::Init(train.label_space(), config.featurizer, std::nullopt, 1);
  fit = TrainEpochs(std::move(fit), train, config, LossKind::kPositive, 30, 0);
  SaveCheckpoint(fit, dir_ / "fit.ckpt");
  const Outcome o = Sent({"eval", "--checkpoint", P("fit.ckpt"), "--test", P("data/train.jsonl")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(nlohmann::json::parse(o.out)["f1"], 1.0);

  ASSERT_EQ(Sent({"eval", "--checkpoint", P("run/final_model.ckpt"), "--test",
                 P("data/test.jsonl"), "--out", P("metrics.json"), "--refined",
                 P("run/refined_train.jsonl"), "--noise-out", P("noise.json")}).code, 0);
  const auto metrics = nlohmann::json::parse(ReadFile(dir_ / "metrics.json"));
  for (const char *key : {"precision", "recall", "f1", "support"}) EXPECT_TRUE(metrics.contains(key));
  EXPECT_TRUE(nlohmann::json::parse(ReadFile(dir_ / "noise.json")).contains("noise_detection"));

  EXPECT_EQ(Sent({"eval", "--checkpoint", P("nope.ckpt"), "--test", P("data/test.jsonl")}).code, 6);
  WriteFile(dir_ / "nogold.jsonl",
            R"({"id":"a","tokens":["x","y"],"head_span":[0,1],"tail_span":[1,2],)"
            R"("head_type":"P","tail_type":"O","bag_labels":["NA"],"assigned_label":"NA"})"
            "\n");
  EXPECT_NE(Sent({"eval", "--checkpoint", P("run/final_model.ckpt"), "--test",
                 P("nogold.jsonl")}).code, 0);
}

TEST_F(CliTest, RefineCommand) {
  Synth();
  const LabelSpace labels = LoadLabelSpace(dir_ / "data/labels.txt");
  FeaturizerConfig f;
  f.hash_dim = 64;
  SaveCheckpoint(Model::Zeros(labels, f), dir_ / "uniform.ckpt");
  ASSERT_EQ(Sent({"refine", "--checkpoint", P("uniform.ckpt"), "--th", "0.1",
                 P("data/train.jsonl"), P("same.jsonl")}).code, 0);
  EXPECT_EQ(ReadFile(dir_ / "same.jsonl"), ReadFile(dir_ / "data/train.jsonl"));
  const auto report = nlohmann::json::parse(ReadFile(dir_ / "same.jsonl.report.json"));
  EXPECT_EQ(report["filtered"], 0);

  WriteFile(dir_ / "empty.jsonl", "");
  ASSERT_EQ(Sent({"refine", "--checkpoint", P("uniform.ckpt"), P("empty.jsonl"),
                 P("empty_out.jsonl")}).code, 0);
  EXPECT_EQ(ReadFile(dir_ / "empty_out.jsonl"), "");
  const auto empty = nlohmann::json::parse(ReadFile(dir_ / "empty_out.jsonl.report.json"));
  EXPECT_EQ(empty["kept"].get<int>() + empty["filtered"].get<int>() + empty["relabeled"].get<int>(), 0);

  WriteFile(dir_ / "run.conf", kFastConf);
  ASSERT_EQ(Sent({"corrupt", P("data/train.jsonl"), P("noisy.jsonl")}).code, 0);
  ASSERT_EQ(Sent({"train", "--config", P("run.conf"), "--train", P("noisy.jsonl"), "--dev",
                 P("data/dev.jsonl"), "--max-iterations", "1", "--final-pt-epochs", "0",
                 "--out", P("run")}).code, 0);
  ASSERT_EQ(Sent({"refine", "--checkpoint", P("run/best_model.ckpt"), P("noisy.jsonl"),
                 P("r1.jsonl")}).code, 0);
  ASSERT_EQ(Sent({"refine", "--checkpoint", P("run/best_model.ckpt"), P("r1.jsonl"),
                 P("r2.jsonl")}).code, 0);
  const auto first = nlohmann::json::parse(ReadFile(dir_ / "r1.jsonl.report.json"));
  const auto second = nlohmann::json::parse(ReadFile(dir_ / "r2.jsonl.report.json"));
  EXPECT_GT(first["newly_filtered"].get<int>(), 0);
  EXPECT_EQ(second["newly_filtered"], 0);
  EXPECT_EQ(second["newly_relabeled"], 0);
}

TEST_F(CliTest, HistogramCommand) {
  Synth();
  const LabelSpace labels = LoadLabelSpace(dir_ / "data/labels.txt");
  SaveCheckpoint(Model::Zeros(labels, FeaturizerConfig{}), dir_ / "uniform.ckpt");
  ASSERT_EQ(Sent({"histogram", "--checkpoint", P("uniform.ckpt"), "--bins", "5",
                 "--exclude-na=false", P("data/dev.jsonl"), "--out", P("h.json")}).code, 0);
  const auto h = nlohmann::json::parse(ReadFile(dir_ / "h.json"));
  EXPECT_EQ(h["edges"].size(), 6u);
  EXPECT_EQ(h["clean"][1], 45);  // p = 0.2 lands in the second bin
  EXPECT_EQ(h["exclude_na"], false);
}

TEST_F(CliTest, UnknownCommandAndHelp) {
  EXPECT_EQ(Sent({"bogus"}).code, 2);
  EXPECT_EQ(Sent({}).code, 2);
  const Outcome help = Sent({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("synth"), std::string::npos);
}

TEST(CliConfig, OverridesAndDump) {
  CliConfig config;
  EXPECT_EQ(config.GetDouble("refine.th"), 0.25);
  EXPECT_EQ(config.GetInt("run.k"), 10);
  EXPECT_EQ(config.GetDouble("optimizer.learning_rate"), 5e-4);
  config.MergeText("run.k = 7\n[refine]\nth = 0.15\n# comment\n\n");
  EXPECT_EQ(config.GetDouble("refine.th"), 0.15);
  EXPECT_EQ(config.GetInt("run.k"), 7);
  config.Set("refine.th", "0.2");
  EXPECT_EQ(config.ToRunConfig().refine.th, 0.2);
  CliConfig again;
  again.MergeText(config.Dump());
  EXPECT_EQ(again.Dump(), config.Dump());
  EXPECT_THROW(config.Set("run.nope", "1"), Error);
  EXPECT_THROW(config.MergeText("no equals sign\n"), Error);
  config.Set("run.k", "abc");
  EXPECT_THROW(config.ToRunConfig(), Error);
}

TEST(ExitCodes, DistinctPerCategory) {
  std::set<int> codes;
  for (int c = 0; c <= static_cast<int>(ErrorCategory::kData); ++c) {
    const int code = ExitCode(c);
    EXPECT_NE(code, 0);
    EXPECT_TRUE(codes.insert(code).second);
  }
}

}  // namespace
}  // namespace sent::cli
