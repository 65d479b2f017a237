#include "sent/prob_vector.h"

#include <cmath>

#include "sent/error.h"

namespace sent {

ProbVector Softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw Error(ErrorCategory::kContract, "softmax of an empty vector");
  }
  double max = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) {
      throw Error(ErrorCategory::kNumerical, "non-finite logit");
    }
    if (z > max) max = z;
  }
  ProbVector p;
  p.values.resize(logits.size());
  double sum = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    p.values[k] = std::exp(logits[k] - max);
    sum += p.values[k];
  }
  for (double &v : p.values) v /= sum;
  return p;
}

LabelId Argmax(std::span<const double> values) {
  LabelId best = 0;
  for (size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = static_cast<LabelId>(k);
  }
  return best;
}

bool IsValidProbVector(std::span<const double> probs) {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (!(p > 0.0) || !(p < 1.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= 1e-6;
}

}  // namespace sent
