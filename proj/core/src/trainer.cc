#include "sent/trainer.h"

#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

#include "sent/error.h"
#include "sent/losses.h"
#include "sent/rng.h"

namespace sent {

void RunConfig::Validate() const {
  if (k < 1) throw Error(ErrorCategory::kConfig, "K must be >= 1");
  if (epochs < 1) throw Error(ErrorCategory::kConfig, "epochs (M) must be >= 1");
  if (max_iterations < 1) {
    throw Error(ErrorCategory::kConfig, "max_iterations must be >= 1");
  }
  if (patience < 0) throw Error(ErrorCategory::kConfig, "patience must be >= 0");
  if (batch_size < 1) throw Error(ErrorCategory::kConfig, "batch_size must be >= 1");
  if (final_pt_epochs < 0) {
    throw Error(ErrorCategory::kConfig, "final_pt_epochs must be >= 0");
  }
  if (threads < 1) throw Error(ErrorCategory::kConfig, "threads must be >= 1");
  optimizer.Validate();
  refine.Validate();
  featurizer.Validate();
  if (hidden && hidden->size < 1) {
    throw Error(ErrorCategory::kConfig, "hidden size must be >= 1");
  }
}

uint64_t IterationSeed(uint64_t base_seed, int iteration) {
  return base_seed + static_cast<uint64_t>(iteration);
}

namespace {

// Cached features and optimizer state for one training run.
class EpochRunner {
 public:
  EpochRunner(const RefinedDataset &dataset, const RunConfig &config,
              const Model &model, LossKind kind, uint64_t stream)
      : config_(config),
        kind_(kind),
        stream_(stream),
        view_(dataset.TrainingView()),
        optimizer_(config.optimizer, model.params().size()) {
    if (view_.empty()) {
      throw Error(ErrorCategory::kData, "all instances filtered");
    }
    features_.reserve(view_.size());
    for (const auto &item : view_) {
      features_.push_back(Featurize(*item.instance, model.featurizer()));
    }
  }

  // Returns the mean per-instance loss of the epoch.
  double Run(Model &model, int epoch) {
    const size_t n = view_.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    const uint64_t base = config_.base_seed;
    Rng shuffle(DeriveSeed({base, stream_, static_cast<uint64_t>(epoch)}));
    shuffle.Shuffle(std::span<size_t>(order));

    const int num_classes = model.num_classes();
    const size_t batch_size = static_cast<size_t>(config_.batch_size);
    std::vector<Example> batch;
    std::vector<ComplementarySample> samples;
    double total = 0.0;
    for (size_t start = 0; start < n; start += batch_size) {
      const size_t end = std::min(n, start + batch_size);
      batch.clear();
      samples.clear();
      samples.reserve(end - start);
      for (size_t j = start; j < end; ++j) {
        const LabeledInstance &item = view_[order[j]];
        Example ex;
        ex.features = &features_[order[j]];
        ex.label = item.label;
        ex.id = item.instance->id;
        if (kind_ == LossKind::kNegative) {
          Rng rng(DeriveSeed({base, stream_, static_cast<uint64_t>(epoch),
                              HashString(item.instance->id)}));
          samples.push_back(SampleComplementary(item.label, num_classes, config_.k, rng));
        }
        batch.push_back(ex);
      }
      if (kind_ == LossKind::kNegative) {
        for (size_t b = 0; b < batch.size(); ++b) batch[b].complementary = samples[b].labels;
      }
      const double loss = ComputeLossAndGradInto(model, batch, kind_, grad_);
      optimizer_.Apply(model, grad_);
      total += loss * static_cast<double>(batch.size());
    }
    return total / static_cast<double>(n);
  }

 private:
  const RunConfig &config_;
  LossKind kind_;
  uint64_t stream_;
  std::vector<LabeledInstance> view_;
  std::vector<SparseVector> features_;
  OptimizerState optimizer_;
  ParamVector grad_;
};

std::string IterationDir(int iteration) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "iter_%02d", iteration);
  return buf;
}

void WriteJson(const std::filesystem::path &path, const nlohmann::ordered_json &json) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path.string());
  out << json.dump(2) << '\n';
}

}  // namespace

Model TrainEpochs(Model model, const RefinedDataset &dataset,
                  const RunConfig &config, LossKind kind, int epochs,
                  uint64_t stream, std::vector<double> *epoch_losses) {
  EpochRunner runner(dataset, config, model, kind, stream);
  for (int e = 0; e < epochs; ++e) {
    const double loss = runner.Run(model, e);
    if (epoch_losses) epoch_losses->push_back(loss);
    spdlog::debug("{} epoch {} loss {:.6f}", LossKindName(kind), e + 1, loss);
  }
  return model;
}

Model TrainNtEpochs(Model model, const RefinedDataset &dataset,
                    const RunConfig &config, int iteration,
                    std::vector<double> *epoch_losses) {
  config.Validate();
  return TrainEpochs(std::move(model), dataset, config, LossKind::kNegative,
                     config.epochs, static_cast<uint64_t>(iteration), epoch_losses);
}

std::vector<LabelId> PredictLabels(const Model &model, const RefinedDataset &dataset,
                                   int threads) {
  const ProbTable probs = PredictAll(model, dataset, threads);
  std::vector<LabelId> labels(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) labels[i] = Argmax(probs[i]);
  return labels;
}

std::vector<LabelId> GoldLabels(const RefinedDataset &dataset) {
  std::vector<LabelId> golds;
  golds.reserve(dataset.size());
  for (const auto &instance : dataset.instances()) {
    if (!instance.gold_label) {
      throw Error(ErrorCategory::kData,
                  "gold label missing, instance id=" + instance.id);
    }
    golds.push_back(*instance.gold_label);
  }
  return golds;
}

Prf EvaluateDev(const Model &model, const RefinedDataset &dev, int threads) {
  const std::vector<LabelId> golds = GoldLabels(dev);
  return ComputePrf1(PredictLabels(model, dev, threads), golds,
                     dev.label_space().na_id());
}

nlohmann::ordered_json TrainHistory::ToJson() const {
  nlohmann::ordered_json out;
  out["best_iteration"] = best_iteration;
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto &r : iterations) {
    nlohmann::ordered_json record;
    record["iteration"] = r.iteration;
    record["dev"] = r.dev.ToJson();
    record["epoch_losses"] = r.epoch_losses;
    record["refine"] = r.refine.ToJson();
    record["checkpoint"] = r.checkpoint;
    records.push_back(std::move(record));
  }
  out["iterations"] = std::move(records);
  return out;
}

SentResult SentTrain(const RefinedDataset &train, const RefinedDataset &dev,
                     const RunConfig &config,
                     const std::optional<std::filesystem::path> &run_dir) {
  config.Validate();
  GoldLabels(dev);  // dev must be gold-labeled

  SentResult result;
  RefinedDataset data = train;
  std::optional<Model> best_model;
  std::optional<Model> previous;
  double best_f1 = -1.0;
  int stale = 0;

  for (int t = 1; t <= config.max_iterations; ++t) {
    Model model = (config.reinitialize || !previous)
                      ? Model::Init(train.label_space(), config.featurizer,
                                    config.hidden, IterationSeed(config.base_seed, t))
                      : *previous;
    IterationRecord record;
    record.iteration = t;
    model = TrainEpochs(std::move(model), data, config, config.iteration_loss,
                        config.epochs, static_cast<uint64_t>(t), &record.epoch_losses);
    record.dev = EvaluateDev(model, dev, config.threads);
    RefineResult refined = RefineDataset(data, model, config.refine, t, config.threads);
    record.refine = refined.report;
    spdlog::info("iteration {}: dev P={:.4f} R={:.4f} F1={:.4f}; kept {} filtered {} "
                 "relabeled {}",
                 t, record.dev.precision, record.dev.recall, record.dev.f1,
                 refined.report.kept, refined.report.filtered,
                 refined.report.relabeled);

    if (run_dir) {
      const auto dir = *run_dir / IterationDir(t);
      std::filesystem::create_directories(dir);
      SaveCheckpoint(model, dir / "model.ckpt");
      WriteJson(dir / "refine_report.json", refined.report.ToJson());
      record.checkpoint = (std::filesystem::path(IterationDir(t)) / "model.ckpt").string();
    }
    if (t == 1) result.first_iteration_model = model;

    if (record.dev.f1 > best_f1) {
      best_f1 = record.dev.f1;
      best_model = model;
      result.history.best_iteration = t;
      stale = 0;
    } else {
      ++stale;
    }
    result.history.iterations.push_back(std::move(record));
    if (run_dir) WriteJson(*run_dir / "history.json", result.history.ToJson());

    data = std::move(refined.dataset);
    previous = std::move(model);
    if (stale > config.patience) break;
  }

  // One more refine pass with the best model over the latest refined data.
  RefineResult final_pass = RefineDataset(data, *best_model, config.refine,
                                          result.history.best_iteration,
                                          config.threads);
  result.best_model = std::move(*best_model);
  result.refined = std::move(final_pass.dataset);
  result.final_report = std::move(final_pass.report);
  if (run_dir) {
    WriteJson(*run_dir / "final_refine_report.json", result.final_report.ToJson());
    SaveDataset(result.refined, *run_dir / "refined_train.jsonl");
  }
  return result;
}

Model FinalPt(const RefinedDataset &refined, const RefinedDataset &dev,
              const RunConfig &config, std::vector<double> *dev_f1) {
  config.Validate();
  if (config.final_pt_epochs < 1) {
    throw Error(ErrorCategory::kConfig, "final PT needs final_pt_epochs >= 1");
  }
  GoldLabels(dev);
  Model model = Model::Init(refined.label_space(), config.featurizer, config.hidden,
                            IterationSeed(config.base_seed, 0));
  EpochRunner runner(refined, config, model, LossKind::kPositive, 0);
  Model best = model;
  double best_f1 = -1.0;
  for (int e = 0; e < config.final_pt_epochs; ++e) {
    const double loss = runner.Run(model, e);
    const Prf prf = EvaluateDev(model, dev, config.threads);
    spdlog::debug("final PT epoch {} loss {:.6f} dev F1 {:.4f}", e + 1, loss, prf.f1);
    if (dev_f1) dev_f1->push_back(prf.f1);
    if (prf.f1 > best_f1) {
      best_f1 = prf.f1;
      best = model;
    }
  }
  return best;
}

}  // namespace sent
