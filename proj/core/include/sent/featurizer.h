#ifndef SENT_FEATURIZER_H_
#define SENT_FEATURIZER_H_

#include <cstdint>
#include <vector>

#include "sent/dataset.h"

namespace sent {

// Number of dense head-tail distance buckets appended after the hashed block.
inline constexpr int kDistanceBuckets = 8;

struct FeaturizerConfig {
  int hash_dim = 1 << 14;
  int window = 2;
  bool use_entity_types = true;
  bool use_position_buckets = true;
  // Divide counts by the sentence length. Raw counts suit plain SGD better.
  bool length_normalize = true;

  void Validate() const;
  int dense_dim() const { return use_position_buckets ? kDistanceBuckets : 0; }
  int input_dim() const { return hash_dim + dense_dim(); }

  bool operator==(const FeaturizerConfig &) const = default;
};

struct SparseFeature {
  uint32_t index = 0;
  double value = 0.0;

  bool operator==(const SparseFeature &) const = default;
};

// Sorted by index, no duplicate indices.
using SparseVector = std::vector<SparseFeature>;

// Hashed unigrams, entity-window tokens tagged by entity and side, entity
// type indicators and a bucketed head-tail distance. Values are counts,
// divided by the sentence length when length_normalize is set.
SparseVector Featurize(const Instance &instance,
                       const FeaturizerConfig &config);

// Bucket of the gap (tokens strictly between) separating the two spans.
int DistanceBucket(const TokenSpan &head, const TokenSpan &tail);

}  // namespace sent

#endif  // SENT_FEATURIZER_H_
