#include "sent_cli/commands.h"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "sent/error.h"
#include "sent/logging.h"
#include "sent/metrics.h"
#include "sent/noisegen.h"
#include "sent/refine.h"
#include "sent/rng.h"
#include "sent/trainer.h"
#include "sent_cli/config.h"

namespace sent::cli {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

int ExitCode(int category) {
  switch (static_cast<ErrorCategory>(category)) {
    case ErrorCategory::kUsage: return 2;
    case ErrorCategory::kParse: return 3;
    case ErrorCategory::kValidation: return 4;
    case ErrorCategory::kConfig: return 5;
    case ErrorCategory::kIo: return 6;
    case ErrorCategory::kData: return 7;
    case ErrorCategory::kContract: return 8;
    case ErrorCategory::kNumerical: return 9;
  }
  return 1;
}

namespace {

// Raw flag values; empty optionals leave the config untouched.
struct Flags {
  std::string config;
  std::optional<std::string> seed, threads, ratio, th, th_relabel, k, epochs,
      max_iterations, patience, out, final_pt_epochs, classes, per_class, total,
      na_fraction, bins, exclude_na, train, dev, test, labels;
  std::string checkpoint, refined, noise_out, input, output;
};

void WriteText(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCategory::kIo, "write failed for " + path.string());
}

void WriteJson(const fs::path &path, const Json &json) {
  WriteText(path, json.dump(2) + "\n");
}

CliConfig ResolveConfig(const Flags &f) {
  CliConfig config;
  if (!f.config.empty()) config.MergeFile(f.config);
  auto set = [&](const char *key, const std::optional<std::string> &value) {
    if (value) config.Set(key, *value);
  };
  set("run.seed", f.seed);
  set("run.threads", f.threads);
  set("noise.ratio", f.ratio);
  set("refine.th", f.th);
  set("refine.th_relabel", f.th_relabel);
  set("run.k", f.k);
  set("run.epochs", f.epochs);
  set("run.max_iterations", f.max_iterations);
  set("run.patience", f.patience);
  set("run.final_pt_epochs", f.final_pt_epochs);
  set("paths.out", f.out);
  set("synth.classes", f.classes);
  set("synth.per_class", f.per_class);
  set("synth.total", f.total);
  set("synth.na_fraction", f.na_fraction);
  set("histogram.bins", f.bins);
  set("histogram.exclude_na", f.exclude_na);
  set("paths.train", f.train);
  set("paths.dev", f.dev);
  set("paths.test", f.test);
  set("paths.labels", f.labels);
  return config;
}

std::string RequirePath(const CliConfig &config, const char *key, const char *flag) {
  auto value = config.GetOptional(key);
  if (!value) throw Error(ErrorCategory::kUsage, std::string("missing ") + flag);
  return *value;
}

LoadOptions OptionsFor(const CliConfig &config) {
  LoadOptions options;
  if (auto labels = config.GetOptional("paths.labels")) {
    options.label_space = LoadLabelSpace(*labels);
  }
  return options;
}

// Loads a corpus for training; unassigned instances draw y* from their bag.
RefinedDataset LoadTrainable(const fs::path &path, const LoadOptions &options,
                             uint64_t seed) {
  Corpus corpus = ReadCorpus(path, options);
  const size_t assigned =
      AssignBagLabels(corpus.instances, DeriveSeed({seed, HashString("assign")}));
  if (assigned > 0) {
    spdlog::info("assigned bag labels to {} instances of {}", assigned, path.string());
  }
  std::vector<InstanceState> states;
  states.reserve(corpus.instances.size());
  for (size_t i = 0; i < corpus.instances.size(); ++i) {
    states.push_back(corpus.states[i] ? *corpus.states[i]
                                      : InstanceState::Kept(*corpus.instances[i].assigned_label));
  }
  return RefinedDataset(corpus.labels, std::move(corpus.instances), std::move(states));
}

LoadOptions WithLabels(const LabelSpace &labels) {
  LoadOptions options;
  options.label_space = labels;
  options.na_name = labels.na_name();
  return options;
}

Histogram HistogramFor(const Model &model, const RefinedDataset &data,
                       const CliConfig &config, int threads) {
  const ProbTable probs = PredictAll(model, data, threads);
  return ConfidenceHistogram(data, probs, static_cast<int>(config.GetInt("histogram.bins")),
                             config.GetBool("histogram.exclude_na"));
}

// synth ----------------------------------------------------------------------

int CmdSynth(const CliConfig &config) {
  const fs::path out = RequirePath(config, "paths.out", "--out");
  const uint64_t seed = config.GetUint("run.seed");
  SynthSpec spec;
  spec.num_classes = static_cast<int>(config.GetInt("synth.classes"));
  spec.per_class = static_cast<int>(config.GetInt("synth.per_class"));
  spec.triggers_per_class = static_cast<int>(config.GetInt("synth.triggers_per_class"));
  spec.filler_vocab = static_cast<int>(config.GetInt("synth.filler_vocab"));
  spec.entity_vocab = static_cast<int>(config.GetInt("synth.entity_vocab"));
  spec.min_filler = static_cast<int>(config.GetInt("synth.min_filler"));
  spec.max_filler = static_cast<int>(config.GetInt("synth.max_filler"));
  spec.seed = DeriveSeed({seed, HashString("synth")});
  if (spec.num_classes < 2) {
    throw Error(ErrorCategory::kUsage, "--classes must be >= 2 (one class is NA)");
  }
  if (config.GetOptional("synth.na_fraction")) {
    const int64_t total = config.GetInt("synth.total") > 0
                              ? config.GetInt("synth.total")
                              : config.GetInt("synth.per_class") * spec.num_classes;
    spec.class_counts = CountsWithNaFraction(
        spec.num_classes, static_cast<int>(total), config.GetDouble("synth.na_fraction"));
  } else if (config.GetInt("synth.total") > 0) {
    throw Error(ErrorCategory::kUsage, "--total requires --na-fraction");
  }
  const RefinedDataset corpus = SynthCorpus(spec);
  const DatasetSplit split =
      SplitDataset(corpus, {0.7, 0.15}, DeriveSeed({seed, HashString("split")}));
  SaveDataset(split.train, out / "train.jsonl");
  SaveDataset(split.dev, out / "dev.jsonl");
  SaveDataset(split.rest, out / "test.jsonl");
  SaveLabelSpace(corpus.label_space(), out / "labels.txt");
  spdlog::info("synth: {} train, {} dev, {} test instances in {}", split.train.size(),
               split.dev.size(), split.rest.size(), out.string());
  return 0;
}

// corrupt --------------------------------------------------------------------

int CmdCorrupt(const CliConfig &config, const Flags &flags) {
  if (flags.input.empty() || flags.output.empty()) {
    throw Error(ErrorCategory::kUsage, "corrupt needs INPUT and OUTPUT paths");
  }
  const double ratio = config.GetDouble("noise.ratio");
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCategory::kUsage, "--ratio must lie in [0, 1]");
  }
  const NoiseSpec spec = config.ToNoiseSpec();
  Corpus corpus = ReadCorpus(flags.input, OptionsFor(config));
  for (auto &instance : corpus.instances) {
    if (!instance.gold_label) {
      throw Error(ErrorCategory::kData, "gold label missing, instance id=" + instance.id);
    }
    if (!instance.assigned_label) instance.assigned_label = instance.gold_label;
  }
  const RefinedDataset clean(corpus.labels, std::move(corpus.instances));
  const CorruptionResult result = InjectNoise(clean, spec);
  SaveDataset(result.dataset, flags.output);
  WriteJson(fs::path(flags.output + ".manifest.json"), result.Manifest(spec));
  spdlog::info("corrupt: {} of {} instances relabeled", result.corrupted,
               result.dataset.size());
  return 0;
}

// train ----------------------------------------------------------------------

int CmdTrain(const CliConfig &config, std::ostream &out) {
  const RunConfig run = config.ToRunConfig();
  const fs::path dir = RequirePath(config, "paths.out", "--out");
  const fs::path train_path = RequirePath(config, "paths.train", "--train");
  const fs::path dev_path = RequirePath(config, "paths.dev", "--dev");
  fs::create_directories(dir);
  WriteText(dir / "config.resolved.conf", config.Dump());

  const RefinedDataset train = LoadTrainable(train_path, OptionsFor(config), run.base_seed);
  const LoadOptions same_labels = WithLabels(train.label_space());
  const RefinedDataset dev = LoadTrainable(dev_path, same_labels, run.base_seed);
  std::optional<RefinedDataset> test;
  if (auto test_path = config.GetOptional("paths.test")) {
    test = LoadTrainable(*test_path, same_labels, run.base_seed);
  }

  // PT on the unrefined data for as many epochs as one NT iteration.
  Model baseline = Model::Init(train.label_space(), run.featurizer, run.hidden,
                               IterationSeed(run.base_seed, 1));
  baseline = TrainEpochs(std::move(baseline), train, run, LossKind::kPositive, run.epochs,
                         HashString("pt_baseline"));
  SaveCheckpoint(baseline, dir / "pt_baseline.ckpt");
  WriteJson(dir / "hist_a_pt_baseline.json",
            HistogramFor(baseline, train, config, run.threads).ToJson());

  const SentResult sent = SentTrain(train, dev, run, dir);
  SaveCheckpoint(sent.best_model, dir / "best_model.ckpt");
  WriteJson(dir / "hist_b_nt_iteration1.json",
            HistogramFor(sent.first_iteration_model, train, config, run.threads).ToJson());
  WriteJson(dir / "hist_c_sent.json",
            HistogramFor(sent.best_model, sent.refined, config, run.threads).ToJson());

  Json summary;
  summary["best_iteration"] = sent.history.best_iteration;
  summary["iterations"] = sent.history.iterations.size();
  summary["final_refine"] = sent.final_report.ToJson();
  std::optional<Model> final_model;
  if (run.final_pt_epochs > 0) {
    std::vector<double> dev_f1;
    final_model = FinalPt(sent.refined, dev, run, &dev_f1);
    SaveCheckpoint(*final_model, dir / "final_model.ckpt");
    WriteJson(dir / "hist_d_final_pt.json",
              HistogramFor(*final_model, sent.refined, config, run.threads).ToJson());
    summary["final_pt_dev_f1"] = dev_f1;
  }
  if (test) {
    Json metrics;
    metrics["pt_baseline"] = EvaluateDev(baseline, *test, run.threads).ToJson();
    metrics["sent"] = EvaluateDev(sent.best_model, *test, run.threads).ToJson();
    if (final_model) metrics["final"] = EvaluateDev(*final_model, *test, run.threads).ToJson();
    summary["test"] = std::move(metrics);
  }
  WriteJson(dir / "summary.json", summary);
  out << "run directory: " << dir.string() << "\n";
  return 0;
}

// eval -----------------------------------------------------------------------

int CmdEval(const CliConfig &config, const Flags &flags, std::ostream &out) {
  if (flags.checkpoint.empty()) throw Error(ErrorCategory::kUsage, "missing --checkpoint");
  const Model model = LoadCheckpoint(flags.checkpoint);
  const int threads = static_cast<int>(config.GetInt("run.threads"));
  const std::string data_path =
      !flags.input.empty() ? flags.input : RequirePath(config, "paths.test", "--test");
  const RefinedDataset test =
      LoadTrainable(data_path, WithLabels(model.label_space()), config.GetUint("run.seed"));
  const std::string report = EvaluateDev(model, test, threads).ToJson().dump(2) + "\n";
  if (auto path = config.GetOptional("paths.out")) {
    WriteText(*path, report);
  } else {
    out << report;
  }
  if (!flags.refined.empty()) {
    const RefinedDataset refined =
        LoadDataset(flags.refined, WithLabels(model.label_space()));
    Json noise;
    noise["noise_detection"] = NoiseDetectionPrf1(refined).ToJson();
    noise["relabel"] = RelabelQuality(refined).ToJson();
    const std::string text = noise.dump(2) + "\n";
    if (!flags.noise_out.empty()) {
      WriteText(flags.noise_out, text);
    } else {
      out << text;
    }
  }
  return 0;
}

// refine ---------------------------------------------------------------------

int CmdRefine(const CliConfig &config, const Flags &flags) {
  if (flags.checkpoint.empty()) throw Error(ErrorCategory::kUsage, "missing --checkpoint");
  if (flags.input.empty() || flags.output.empty()) {
    throw Error(ErrorCategory::kUsage, "refine needs INPUT and OUTPUT paths");
  }
  const RunConfig run = config.ToRunConfig();
  const Model model = LoadCheckpoint(flags.checkpoint);
  const RefinedDataset data =
      LoadTrainable(flags.input, WithLabels(model.label_space()), run.base_seed);
  const RefineResult result = RefineDataset(data, model, run.refine, 1, run.threads);
  SaveDataset(result.dataset, flags.output);
  WriteJson(fs::path(flags.output + ".report.json"), result.report.ToJson());
  spdlog::info("refine: kept {} filtered {} relabeled {}", result.report.kept,
               result.report.filtered, result.report.relabeled);
  return 0;
}

// histogram ------------------------------------------------------------------

int CmdHistogram(const CliConfig &config, const Flags &flags, std::ostream &out) {
  if (flags.checkpoint.empty()) throw Error(ErrorCategory::kUsage, "missing --checkpoint");
  if (flags.input.empty()) throw Error(ErrorCategory::kUsage, "histogram needs INPUT");
  const Model model = LoadCheckpoint(flags.checkpoint);
  const RefinedDataset data = LoadTrainable(flags.input, WithLabels(model.label_space()),
                                            config.GetUint("run.seed"));
  const int threads = static_cast<int>(config.GetInt("run.threads"));
  const std::string text = HistogramFor(model, data, config, threads).ToJson().dump(2) + "\n";
  if (auto path = config.GetOptional("paths.out")) {
    WriteText(*path, text);
  } else {
    out << text;
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  InitLoggingFromEnv();
  CLI::App app{"SENT noisy-label training pipeline", "sent"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App *cmd) {
    cmd->add_option("--config", f.config, "key=value configuration file");
    cmd->add_option("--seed", f.seed, "seed all randomness derives from");
    cmd->add_option("--threads", f.threads, "worker threads for prediction");
    cmd->add_option("--out", f.out, "output directory or file");
    cmd->add_option("--labels", f.labels, "label file, one class per line");
  };
  auto training = [&f](CLI::App *cmd) {
    cmd->add_option("--th", f.th, "global filtering threshold Th");
    cmd->add_option("--th-relabel", f.th_relabel, "re-labeling threshold");
    cmd->add_option("--k", f.k, "complementary labels per instance");
    cmd->add_option("--epochs", f.epochs, "NT epochs per iteration");
    cmd->add_option("--max-iterations", f.max_iterations, "iteration cap");
    cmd->add_option("--patience", f.patience, "non-improving iterations tolerated");
    cmd->add_option("--final-pt-epochs", f.final_pt_epochs, "final PT epochs, 0 skips");
  };

  CLI::App *synth = app.add_subcommand("synth", "write a clean synthetic corpus and splits");
  common(synth);
  synth->add_option("--classes", f.classes, "number of classes including NA");
  synth->add_option("--per-class", f.per_class, "instances per class");
  synth->add_option("--total", f.total, "total instances, with --na-fraction");
  synth->add_option("--na-fraction", f.na_fraction, "share of NA instances");

  CLI::App *corrupt = app.add_subcommand("corrupt", "inject label noise");
  common(corrupt);
  corrupt->add_option("--ratio", f.ratio, "fraction of instances to corrupt");
  corrupt->add_option("input", f.input, "clean JSONL")->required();
  corrupt->add_option("output", f.output, "noisy JSONL")->required();

  CLI::App *train = app.add_subcommand("train", "run SENT and the final PT stage");
  common(train);
  training(train);
  train->add_option("--train", f.train, "training JSONL");
  train->add_option("--dev", f.dev, "gold-labeled dev JSONL");
  train->add_option("--test", f.test, "gold-labeled test JSONL");

  CLI::App *eval = app.add_subcommand("eval", "micro P/R/F1 of a checkpoint");
  common(eval);
  eval->add_option("--checkpoint", f.checkpoint, "model checkpoint")->required();
  eval->add_option("--test", f.test, "gold-labeled JSONL");
  eval->add_option("--refined", f.refined, "refined JSONL for a noise report");
  eval->add_option("--noise-out", f.noise_out, "file for the noise report");
  eval->add_option("input", f.input, "gold-labeled JSONL (instead of --test)");

  CLI::App *refine = app.add_subcommand("refine", "one filter/relabel pass");
  common(refine);
  training(refine);
  refine->add_option("--checkpoint", f.checkpoint, "model checkpoint")->required();
  refine->add_option("input", f.input, "dataset JSONL")->required();
  refine->add_option("output", f.output, "refined JSONL")->required();

  CLI::App *histogram = app.add_subcommand("histogram", "confidence histogram JSON");
  common(histogram);
  histogram->add_option("--checkpoint", f.checkpoint, "model checkpoint")->required();
  histogram->add_option("--bins", f.bins, "number of bins");
  histogram->add_flag("--exclude-na{true}", f.exclude_na, "skip NA-labeled instances");
  histogram->add_option("input", f.input, "dataset JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "error[" << CategoryName(ErrorCategory::kUsage) << "]: " << e.what() << "\n";
    return ExitCode(static_cast<int>(ErrorCategory::kUsage));
  }

  try {
    const CliConfig config = ResolveConfig(f);
    if (synth->parsed()) return CmdSynth(config);
    if (corrupt->parsed()) return CmdCorrupt(config, f);
    if (train->parsed()) return CmdTrain(config, out);
    if (eval->parsed()) return CmdEval(config, f, out);
    if (refine->parsed()) return CmdRefine(config, f);
    if (histogram->parsed()) return CmdHistogram(config, f, out);
  } catch (const Error &e) {
    err << "error[" << CategoryName(e.category()) << "]: " << e.what() << "\n";
    return ExitCode(static_cast<int>(e.category()));
  } catch (const nlohmann::json::exception &e) {
    err << "error[" << CategoryName(ErrorCategory::kParse) << "]: " << e.what() << "\n";
    return ExitCode(static_cast<int>(ErrorCategory::kParse));
  } catch (const fs::filesystem_error &e) {
    err << "error[" << CategoryName(ErrorCategory::kIo) << "]: " << e.what() << "\n";
    return ExitCode(static_cast<int>(ErrorCategory::kIo));
  }
  return 1;
}

}  // namespace sent::cli
