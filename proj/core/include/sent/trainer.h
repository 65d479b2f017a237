#ifndef SENT_TRAINER_H_
#define SENT_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sent/dataset.h"
#include "sent/metrics.h"
#include "sent/model.h"
#include "sent/optimizer.h"
#include "sent/refine.h"

namespace sent {

struct RunConfig {
  int k = 10;                 // complementary labels per instance
  int epochs = 10;            // NT epochs per iteration (M)
  int max_iterations = 5;
  int patience = 1;
  int batch_size = 32;
  int final_pt_epochs = 10;   // 0 skips the final PT stage
  uint64_t base_seed = 1;
  int threads = 1;
  OptimizerSpec optimizer;
  RefineConfig refine;
  FeaturizerConfig featurizer;
  std::optional<HiddenSpec> hidden;

  // Ablation switches.
  bool reinitialize = true;
  LossKind iteration_loss = LossKind::kNegative;

  void Validate() const;
};

struct IterationRecord {
  int iteration = 0;
  Prf dev;
  std::vector<double> epoch_losses;
  RefineReport refine;
  std::string checkpoint;
};

struct TrainHistory {
  std::vector<IterationRecord> iterations;
  int best_iteration = 0;  // 1-based, 0 when empty

  nlohmann::ordered_json ToJson() const;
};

// Seed used to initialise the classifier of iteration t (t >= 1). The final
// PT model uses iteration 0, i.e. the base seed itself.
uint64_t IterationSeed(uint64_t base_seed, int iteration);

// Runs `epochs` epochs of `kind` training on the training view. Epoch e
// shuffles with DeriveSeed({base, stream, e}); complementary labels for an
// instance come from DeriveSeed({base, stream, e, HashString(id)}).
// Appends the mean training loss of each epoch to `epoch_losses`.
// Throws kData when the training view is empty.
Model TrainEpochs(Model model, const RefinedDataset &dataset,
                  const RunConfig &config, LossKind kind, int epochs,
                  uint64_t stream, std::vector<double> *epoch_losses = nullptr);

// M epochs of negative training for iteration `iteration`.
Model TrainNtEpochs(Model model, const RefinedDataset &dataset,
                    const RunConfig &config, int iteration,
                    std::vector<double> *epoch_losses = nullptr);

// Sentence-level micro P/R/F1 against gold labels. Throws kData when an
// instance lacks a gold label.
Prf EvaluateDev(const Model &model, const RefinedDataset &dev, int threads = 1);

std::vector<LabelId> PredictLabels(const Model &model,
                                   const RefinedDataset &dataset,
                                   int threads = 1);
std::vector<LabelId> GoldLabels(const RefinedDataset &dataset);

struct SentResult {
  Model best_model;
  RefinedDataset refined;
  TrainHistory history;
  RefineReport final_report;
  Model first_iteration_model;  // the iteration-1 NT model
};

// Iterative loop: re-initialise, NT-train, evaluate on dev, refine. Stops
// after `patience` non-improving iterations or max_iterations. The returned
// dataset is one more refine pass of the best model over the latest refined
// data. With `run_dir`, writes iter_NN/model.ckpt,
// iter_NN/refine_report.json, history.json (after every iteration) and
// refined_train.jsonl.
SentResult SentTrain(const RefinedDataset &train, const RefinedDataset &dev,
                     const RunConfig &config,
                     const std::optional<std::filesystem::path> &run_dir =
                         std::nullopt);

// Fresh model, final_pt_epochs of PT on the training view, returning the
// best-dev-F1 epoch's model (earliest on ties).
Model FinalPt(const RefinedDataset &refined, const RefinedDataset &dev,
              const RunConfig &config, std::vector<double> *dev_f1 = nullptr);

}  // namespace sent

#endif  // SENT_TRAINER_H_
