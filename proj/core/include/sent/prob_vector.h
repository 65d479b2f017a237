#ifndef SENT_PROB_VECTOR_H_
#define SENT_PROB_VECTOR_H_

#include <span>
#include <vector>

#include "sent/dataset.h"

namespace sent {

// Class-probability vector p = f(s). Entries are strictly positive and sum
// to one when produced by Softmax on finite logits.
struct ProbVector {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](LabelId k) const { return values[k]; }
  std::span<const double> view() const { return values; }
};

// Softmax with max subtraction. Throws kNumerical on non-finite logits.
ProbVector Softmax(std::span<const double> logits);

// Index of the largest entry; ties go to the lowest index.
LabelId Argmax(std::span<const double> values);

// Checks the ProbVector invariants (sum within 1e-6, entries in (0, 1)).
bool IsValidProbVector(std::span<const double> probs);

}  // namespace sent

#endif  // SENT_PROB_VECTOR_H_
