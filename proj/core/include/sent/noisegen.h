#ifndef SENT_NOISEGEN_H_
#define SENT_NOISEGEN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sent/dataset.h"
#include "sent/rng.h"

namespace sent {

enum class NoiseWeighting { kClassFrequency, kUniform };

const char *WeightingName(NoiseWeighting weighting);
std::optional<NoiseWeighting> ParseWeighting(std::string_view name);

struct NoiseSpec {
  double ratio = 0.3;
  uint64_t seed = 0;
  NoiseWeighting weighting = NoiseWeighting::kClassFrequency;

  void Validate() const;
};

// Picks y* uniformly from the bag labels. Throws kValidation on an empty bag.
Instance AssignBagLabel(Instance instance, Rng &rng);

// Assigns every instance lacking a label, each from its own stream
// DeriveSeed({seed, HashString(id)}). Returns the number of assignments.
size_t AssignBagLabels(std::vector<Instance> &instances, uint64_t seed);

struct CorruptionResult {
  RefinedDataset dataset;
  int64_t corrupted = 0;
  std::vector<int64_t> replacement_counts;  // per new label

  nlohmann::ordered_json Manifest(const NoiseSpec &spec) const;
};

// Corrupts exactly round(ratio * N) instances (half to even), chosen
// uniformly without replacement. Each corrupted label is redrawn from the
// classes other than gold, weighted by the clean gold class frequency or
// uniformly. Requires gold labels, and assigned == gold where assigned.
CorruptionResult InjectNoise(const RefinedDataset &clean, const NoiseSpec &spec);

// Template-sentence corpus where class-specific trigger tokens placed next
// to an entity determine the label. NA sentences (class 0) carry no trigger.
struct SynthSpec {
  int num_classes = 10;
  int per_class = 200;
  // Overrides per_class when non-empty; entry c is the count of class c.
  std::vector<int> class_counts;
  int triggers_per_class = 2;
  int filler_vocab = 200;
  int entity_vocab = 20000;
  int min_filler = 2;
  int max_filler = 6;
  uint64_t seed = 1;
  std::string id_prefix = "s";

  void Validate() const;
  std::vector<int> Counts() const;
};

// Label names: "NA", "rel_1", ..., "rel_<C-1>".
LabelSpace SynthLabelSpace(int num_classes);

// Instances are emitted class by class with gold == assigned and
// is_noise = false.
RefinedDataset SynthCorpus(const SynthSpec &spec);

// Class counts with `na_fraction` of `total` in NA and the remainder split
// evenly over the positive classes (earlier classes take the leftovers).
std::vector<int> CountsWithNaFraction(int num_classes, int total,
                                      double na_fraction);

}  // namespace sent

#endif  // SENT_NOISEGEN_H_
