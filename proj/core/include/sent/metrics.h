#ifndef SENT_METRICS_H_
#define SENT_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sent/dataset.h"

namespace sent {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t pred_pos = 0;
  int64_t gold_pos = 0;
  int64_t tp = 0;

  // Fills precision/recall/f1 from the support counts with the 0 convention
  // for undefined ratios.
  static Prf FromCounts(int64_t pred_pos, int64_t gold_pos, int64_t tp);

  nlohmann::ordered_json ToJson() const;
};

// Micro P/R/F1 over the non-NA classes: predicting NA is neither a true nor
// a false positive.
Prf ComputePrf1(std::span<const LabelId> predictions,
                std::span<const LabelId> golds, LabelId na_id);

// "Flagged as noise" is the positive class.
Prf NoiseDetectionPrf1(const std::vector<bool> &flagged,
                       const std::vector<bool> &truth);

struct RelabelOutcome {
  LabelId new_label = 0;
  LabelId gold_label = 0;
};

// Precision: share of relabels matching gold. Recall: recovered relabels over
// the number of truly noisy instances.
Prf RelabelQuality(std::span<const RelabelOutcome> relabeled,
                   int64_t truly_noisy);

// Dataset-level helpers. Both need gold labels (noise truth is derived from
// assigned != gold when is_noise is absent) and throw kData otherwise.
// An instance counts as flagged when its effective label differs from its
// original label (FILTERED, or RELABELED to another class).
Prf NoiseDetectionPrf1(const RefinedDataset &dataset);
// Only label-changing relabels are scored.
Prf RelabelQuality(const RefinedDataset &dataset);

// Per-instance noise truth; nullopt when neither is_noise nor gold exists.
std::optional<bool> NoiseTruth(const Instance &instance);

enum class Cohort { kClean, kNoisy, kUnknown };

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges over [0, 1]
  std::vector<int64_t> clean;
  std::vector<int64_t> noisy;
  std::vector<int64_t> unknown;
  bool exclude_na = false;

  int bins() const { return static_cast<int>(clean.size()); }
  int64_t Total() const;
  nlohmann::ordered_json ToJson() const;
  static Histogram Empty(int bins, bool exclude_na);
  void Add(double value, Cohort cohort);
};

inline constexpr int kDefaultHistogramBins = 50;

// Records p[effective label] of each non-FILTERED instance. The cohort is
// noisy when the effective label differs from gold (falling back to
// is_noise), clean when it matches, unknown without ground truth.
// `probs` holds one row per dataset instance.
Histogram ConfidenceHistogram(const RefinedDataset &dataset,
                              std::span<const std::vector<double>> probs,
                              int bins, bool exclude_na);

Cohort CohortOf(const Instance &instance, LabelId effective_label);

}  // namespace sent

#endif  // SENT_METRICS_H_
