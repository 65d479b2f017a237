#ifndef SENT_REFINE_H_
#define SENT_REFINE_H_

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sent/dataset.h"
#include "sent/model.h"

namespace sent {

struct RefineConfig {
  double th = 0.25;          // global filtering threshold
  double th_relabel = 0.7;   // re-labeling confidence threshold
  bool relabel = true;       // false disables re-labeling (ablation)

  void Validate() const;
  bool operator==(const RefineConfig &) const = default;
};

struct ClassThresholds {
  std::vector<double> p_h;   // per-class maximum probability
  std::vector<double> th_c;  // th * p_h
};

// One probability row per dataset instance. An empty row marks a missing
// prediction.
using ProbTable = std::vector<std::vector<double>>;

// Predicts every instance (FILTERED ones included). `threads` > 1 splits the
// work into contiguous chunks; the result does not depend on it.
ProbTable PredictAll(const Model &model, const RefinedDataset &dataset,
                     int threads = 1);

// p_h[c] = max of p_c over KEPT instances labeled c; 0 when there are none.
std::vector<double> ClassMaxProbs(const RefinedDataset &dataset,
                                  const ProbTable &probs);
std::vector<double> ClassMaxProbs(const Model &model,
                                  const RefinedDataset &dataset);

ClassThresholds ComputeThresholds(std::span<const double> p_h, double th);

// Non-FILTERED instance i with label c becomes FILTERED iff p_c < th_c.
RefinedDataset FilterNoise(const RefinedDataset &dataset,
                           const ProbTable &probs,
                           const ClassThresholds &thresholds);

// FILTERED instance becomes RELABELED with argmax p iff max p > th_relabel.
RefinedDataset Relabel(const RefinedDataset &dataset, const ProbTable &probs,
                       double th_relabel);

struct RefineReport {
  int iteration = 0;
  int64_t kept = 0;
  int64_t filtered = 0;
  int64_t relabeled = 0;
  int64_t newly_filtered = 0;
  int64_t newly_relabeled = 0;
  int64_t relabeled_to_original = 0;
  std::vector<double> thresholds;
  std::vector<double> p_h;
  std::optional<double> noise_precision;
  std::optional<double> noise_recall;
  std::optional<double> relabel_precision;
  std::optional<double> relabel_recall;

  nlohmann::ordered_json ToJson() const;
  static RefineReport FromJson(const nlohmann::json &json);
};

struct RefineResult {
  RefinedDataset dataset;
  RefineReport report;
};

// class max probs -> thresholds -> filter -> relabel, in one pass.
RefineResult RefineDataset(const RefinedDataset &dataset, const ProbTable &probs,
                           const RefineConfig &config, int iteration = 0);
RefineResult RefineDataset(const RefinedDataset &dataset, const Model &model,
                           const RefineConfig &config, int iteration = 0,
                           int threads = 1);

}  // namespace sent

#endif  // SENT_REFINE_H_
