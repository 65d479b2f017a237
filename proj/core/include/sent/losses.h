#ifndef SENT_LOSSES_H_
#define SENT_LOSSES_H_

#include <span>
#include <string>
#include <vector>

#include "sent/dataset.h"
#include "sent/rng.h"

namespace sent {

// K distinct labels drawn from the label space minus the instance's label.
struct ComplementarySample {
  std::string instance_id;
  std::vector<LabelId> labels;  // ascending
  int k = 0;
};

// Uniform sampling without replacement from {0..C-1} \ {label}. Returns all
// C-1 complementary labels when k > C-1. Throws kContract when C < 2.
ComplementarySample SampleComplementary(LabelId label, int num_classes, int k,
                                        Rng &rng);

// Positive-training loss: -log p[label].
double PtLoss(std::span<const double> probs, LabelId label);

// Negative-training loss: mean over the complementary labels of
// -log(1 - p[k]). Throws kContract if `label` is among them.
double NtLoss(std::span<const double> probs,
              std::span<const LabelId> complementary, LabelId label);
double NtLoss(std::span<const double> probs, const ComplementarySample &sample,
              LabelId label);

// d(loss)/d(logits), scaled by `scale` and added into `out`.
// PT: p - onehot(label).
void AddPtLogitGrad(std::span<const double> probs, LabelId label, double scale,
                    std::span<double> out);
// NT: mean over k of p_k / (1 - p_k) * (onehot(k) - p).
void AddNtLogitGrad(std::span<const double> probs,
                    std::span<const LabelId> complementary, double scale,
                    std::span<double> out);

}  // namespace sent

#endif  // SENT_LOSSES_H_
