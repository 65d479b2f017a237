#include "sent/metrics.h"

#include <algorithm>
#include <cmath>

#include "sent/error.h"

namespace sent {

Prf Prf::FromCounts(int64_t pred_pos, int64_t gold_pos, int64_t tp) {
  Prf prf;
  prf.pred_pos = pred_pos;
  prf.gold_pos = gold_pos;
  prf.tp = tp;
  prf.precision = pred_pos > 0 ? static_cast<double>(tp) / pred_pos : 0.0;
  prf.recall = gold_pos > 0 ? static_cast<double>(tp) / gold_pos : 0.0;
  const double sum = prf.precision + prf.recall;
  prf.f1 = sum > 0.0 ? 2.0 * prf.precision * prf.recall / sum : 0.0;
  return prf;
}

nlohmann::ordered_json Prf::ToJson() const {
  nlohmann::ordered_json out;
  out["precision"] = precision;
  out["recall"] = recall;
  out["f1"] = f1;
  out["support"] = {{"pred_pos", pred_pos}, {"gold_pos", gold_pos}, {"tp", tp}};
  return out;
}

Prf ComputePrf1(std::span<const LabelId> predictions,
                std::span<const LabelId> golds, LabelId na_id) {
  if (predictions.size() != golds.size()) {
    throw Error(ErrorCategory::kContract,
                "prediction/gold length mismatch (" +
                    std::to_string(predictions.size()) + " vs " +
                    std::to_string(golds.size()) + ")");
  }
  int64_t pred_pos = 0, gold_pos = 0, tp = 0;
  for (size_t i = 0; i < golds.size(); ++i) {
    const bool pred_positive = predictions[i] != na_id;
    pred_pos += pred_positive;
    gold_pos += golds[i] != na_id;
    tp += pred_positive && predictions[i] == golds[i];
  }
  return Prf::FromCounts(pred_pos, gold_pos, tp);
}

Prf NoiseDetectionPrf1(const std::vector<bool> &flagged,
                       const std::vector<bool> &truth) {
  if (flagged.size() != truth.size()) {
    throw Error(ErrorCategory::kContract, "flag/truth length mismatch");
  }
  int64_t pred_pos = 0, gold_pos = 0, tp = 0;
  for (size_t i = 0; i < flagged.size(); ++i) {
    pred_pos += flagged[i];
    gold_pos += truth[i];
    tp += flagged[i] && truth[i];
  }
  return Prf::FromCounts(pred_pos, gold_pos, tp);
}

Prf RelabelQuality(std::span<const RelabelOutcome> relabeled, int64_t truly_noisy) {
  int64_t correct = 0;
  for (const auto &r : relabeled) correct += r.new_label == r.gold_label;
  return Prf::FromCounts(static_cast<int64_t>(relabeled.size()), truly_noisy,
                         correct);
}

std::optional<bool> NoiseTruth(const Instance &instance) {
  if (instance.is_noise) return instance.is_noise;
  if (instance.gold_label && instance.assigned_label) {
    return *instance.gold_label != *instance.assigned_label;
  }
  return std::nullopt;
}

namespace {

bool IsFlagged(const InstanceState &state) {
  return state.effective_label != state.original_label;
}

}  // namespace

Prf NoiseDetectionPrf1(const RefinedDataset &dataset) {
  int64_t pred_pos = 0, gold_pos = 0, tp = 0;
  for (size_t i = 0; i < dataset.size(); ++i) {
    auto noisy = NoiseTruth(dataset.instance(i));
    if (!noisy) {
      throw Error(ErrorCategory::kData, "noise truth missing, instance id=" +
                                            dataset.instance(i).id);
    }
    const bool flagged = IsFlagged(dataset.state(i));
    pred_pos += flagged;
    gold_pos += *noisy;
    tp += flagged && *noisy;
  }
  return Prf::FromCounts(pred_pos, gold_pos, tp);
}

Prf RelabelQuality(const RefinedDataset &dataset) {
  std::vector<RelabelOutcome> outcomes;
  int64_t truly_noisy = 0;
  for (size_t i = 0; i < dataset.size(); ++i) {
    const Instance &instance = dataset.instance(i);
    if (!instance.gold_label) {
      throw Error(ErrorCategory::kData,
                  "gold label missing, instance id=" + instance.id);
    }
    truly_noisy += NoiseTruth(instance).value_or(false);
    const InstanceState &state = dataset.state(i);
    if (state.status == Status::kRelabeled &&
        state.effective_label != state.original_label) {
      outcomes.push_back({*state.effective_label, *instance.gold_label});
    }
  }
  return RelabelQuality(outcomes, truly_noisy);
}

// Histograms ------------------------------------------------------------------

Histogram Histogram::Empty(int bins, bool exclude_na) {
  if (bins < 2) {
    throw Error(ErrorCategory::kContract, "histogram needs at least 2 bins");
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = static_cast<double>(i) / bins;
  h.clean.assign(bins, 0);
  h.noisy.assign(bins, 0);
  h.unknown.assign(bins, 0);
  h.exclude_na = exclude_na;
  return h;
}

void Histogram::Add(double value, Cohort cohort) {
  const int n = bins();
  int bin = static_cast<int>(std::floor(value * n));
  bin = std::clamp(bin, 0, n - 1);
  switch (cohort) {
    case Cohort::kClean: ++clean[bin]; break;
    case Cohort::kNoisy: ++noisy[bin]; break;
    case Cohort::kUnknown: ++unknown[bin]; break;
  }
}

int64_t Histogram::Total() const {
  int64_t total = 0;
  for (int i = 0; i < bins(); ++i) total += clean[i] + noisy[i] + unknown[i];
  return total;
}

nlohmann::ordered_json Histogram::ToJson() const {
  nlohmann::ordered_json out;
  out["edges"] = edges;
  out["clean"] = clean;
  out["noisy"] = noisy;
  out["unknown"] = unknown;
  out["exclude_na"] = exclude_na;
  return out;
}

Cohort CohortOf(const Instance &instance, LabelId effective_label) {
  if (instance.gold_label) {
    return *instance.gold_label == effective_label ? Cohort::kClean : Cohort::kNoisy;
  }
  if (instance.is_noise) return *instance.is_noise ? Cohort::kNoisy : Cohort::kClean;
  return Cohort::kUnknown;
}

Histogram ConfidenceHistogram(const RefinedDataset &dataset,
                              std::span<const std::vector<double>> probs,
                              int bins, bool exclude_na) {
  Histogram h = Histogram::Empty(bins, exclude_na);
  if (probs.size() != dataset.size()) {
    throw Error(ErrorCategory::kContract, "probability table size mismatch");
  }
  const LabelId na = dataset.label_space().na_id();
  for (const auto &item : dataset.TrainingView()) {
    if (exclude_na && item.label == na) continue;
    const auto &row = probs[item.index];
    if (row.empty()) {
      throw Error(ErrorCategory::kContract,
                  "missing probability row, instance id=" + item.instance->id);
    }
    h.Add(row[item.label], CohortOf(*item.instance, item.label));
  }
  return h;
}

}  // namespace sent
