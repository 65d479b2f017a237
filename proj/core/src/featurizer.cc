#include "sent/featurizer.h"

#include <algorithm>
#include <string>

#include "sent/error.h"
#include "sent/rng.h"

namespace sent {
namespace {

uint32_t Bucket(std::string_view prefix, std::string_view value, int dim) {
  std::string key;
  key.reserve(prefix.size() + 1 + value.size());
  key.append(prefix);
  key.push_back('\x1f');
  key.append(value);
  return static_cast<uint32_t>(HashString(key) % static_cast<uint64_t>(dim));
}

void AddWindow(const Instance &instance, const TokenSpan &span, int window,
               char side, const FeaturizerConfig &config,
               std::vector<uint32_t> &out) {
  const int n = static_cast<int>(instance.tokens.size());
  const std::string left = {side, '<'};
  const std::string right = {side, '>'};
  for (int i = std::max(0, span.start - window); i < span.start; ++i) {
    out.push_back(Bucket(left, instance.tokens[i], config.hash_dim));
  }
  for (int i = span.end; i < std::min(n, span.end + window); ++i) {
    out.push_back(Bucket(right, instance.tokens[i], config.hash_dim));
  }
}

}  // namespace

void FeaturizerConfig::Validate() const {
  if (hash_dim < 2) {
    throw Error(ErrorCategory::kConfig, "featurizer hash_dim must be >= 2");
  }
  if (window < 0) {
    throw Error(ErrorCategory::kConfig, "featurizer window must be >= 0");
  }
}

int DistanceBucket(const TokenSpan &head, const TokenSpan &tail) {
  const int gap = head.end <= tail.start ? tail.start - head.end
                                         : std::max(0, head.start - tail.end);
  if (gap <= 2) return gap;
  if (gap <= 4) return 3;
  if (gap <= 7) return 4;
  if (gap <= 15) return 5;
  if (gap <= 31) return 6;
  return 7;
}

SparseVector Featurize(const Instance &instance, const FeaturizerConfig &config) {
  std::vector<uint32_t> indices;
  indices.reserve(instance.tokens.size() * 2 + 8);
  for (const auto &token : instance.tokens) {
    indices.push_back(Bucket("u", token, config.hash_dim));
  }
  if (config.window > 0) {
    AddWindow(instance, instance.head, config.window, 'h', config, indices);
    AddWindow(instance, instance.tail, config.window, 't', config, indices);
  }
  if (config.use_entity_types) {
    indices.push_back(Bucket("ht", instance.head_type, config.hash_dim));
    indices.push_back(Bucket("tt", instance.tail_type, config.hash_dim));
  }
  if (config.use_position_buckets) {
    indices.push_back(static_cast<uint32_t>(
        config.hash_dim + DistanceBucket(instance.head, instance.tail)));
  }
  std::sort(indices.begin(), indices.end());

  const double scale =
      config.length_normalize
          ? 1.0 / static_cast<double>(std::max<size_t>(1, instance.tokens.size()))
          : 1.0;
  SparseVector x;
  for (size_t i = 0; i < indices.size();) {
    size_t j = i;
    while (j < indices.size() && indices[j] == indices[i]) ++j;
    x.push_back({indices[i], static_cast<double>(j - i) * scale});
    i = j;
  }
  return x;
}

}  // namespace sent
