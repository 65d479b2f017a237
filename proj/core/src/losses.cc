#include "sent/losses.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sent/error.h"

namespace sent {
namespace {

// 1 - p[k] summed from the other entries, which keeps precision when p[k]
// is close to one.
double Complement(std::span<const double> probs, LabelId k) {
  double rest = 0.0;
  for (size_t j = 0; j < probs.size(); ++j) {
    if (static_cast<LabelId>(j) != k) rest += probs[j];
  }
  return rest;
}

}  // namespace

ComplementarySample SampleComplementary(LabelId label, int num_classes, int k,
                                        Rng &rng) {
  if (num_classes < 2) {
    throw Error(ErrorCategory::kContract,
                "no complementary label exists with fewer than 2 classes");
  }
  if (k < 1) {
    throw Error(ErrorCategory::kContract, "K must be at least 1");
  }
  std::vector<LabelId> pool;
  pool.reserve(num_classes - 1);
  for (LabelId c = 0; c < num_classes; ++c) {
    if (c != label) pool.push_back(c);
  }
  const size_t take = std::min<size_t>(static_cast<size_t>(k), pool.size());
  // Partial Fisher-Yates: the first `take` slots form the sample.
  for (size_t i = 0; i < take; ++i) {
    const size_t j = i + rng.Below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end());
  ComplementarySample sample;
  sample.labels = std::move(pool);
  sample.k = k;
  return sample;
}

double PtLoss(std::span<const double> probs, LabelId label) {
  return -std::log(probs[label]);
}

double NtLoss(std::span<const double> probs,
              std::span<const LabelId> complementary, LabelId label) {
  if (complementary.empty()) {
    throw Error(ErrorCategory::kContract, "empty complementary label set");
  }
  double sum = 0.0;
  for (LabelId k : complementary) {
    if (k == label) {
      throw Error(ErrorCategory::kContract,
                  "complementary labels contain the effective label");
    }
    sum -= std::log(Complement(probs, k));
  }
  return sum / static_cast<double>(complementary.size());
}

double NtLoss(std::span<const double> probs, const ComplementarySample &sample,
              LabelId label) {
  return NtLoss(probs, sample.labels, label);
}

void AddPtLogitGrad(std::span<const double> probs, LabelId label, double scale,
                    std::span<double> out) {
  for (size_t j = 0; j < probs.size(); ++j) out[j] += scale * probs[j];
  out[label] -= scale;
}

void AddNtLogitGrad(std::span<const double> probs,
                    std::span<const LabelId> complementary, double scale,
                    std::span<double> out) {
  const double per_label = scale / static_cast<double>(complementary.size());
  for (LabelId k : complementary) {
    // d/dz_j [-log(1 - p_k)] = p_k / (1 - p_k) * (1[j = k] - p_j)
    const double w = per_label * probs[k] / Complement(probs, k);
    for (size_t j = 0; j < probs.size(); ++j) out[j] -= w * probs[j];
    out[k] += w;
  }
}

}  // namespace sent
