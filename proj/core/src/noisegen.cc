#include "sent/noisegen.h"

#include <cmath>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "sent/error.h"

namespace sent {

const char *WeightingName(NoiseWeighting weighting) {
  return weighting == NoiseWeighting::kClassFrequency ? "class_frequency"
                                                      : "uniform";
}

std::optional<NoiseWeighting> ParseWeighting(std::string_view name) {
  if (name == "class_frequency") return NoiseWeighting::kClassFrequency;
  if (name == "uniform") return NoiseWeighting::kUniform;
  return std::nullopt;
}

void NoiseSpec::Validate() const {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCategory::kConfig, "noise ratio must lie in [0, 1]");
  }
}

Instance AssignBagLabel(Instance instance, Rng &rng) {
  if (instance.bag_labels.empty()) {
    throw Error(ErrorCategory::kValidation,
                "empty bag_labels, instance id=" + instance.id);
  }
  instance.assigned_label = instance.bag_labels[rng.Below(instance.bag_labels.size())];
  return instance;
}

size_t AssignBagLabels(std::vector<Instance> &instances, uint64_t seed) {
  size_t assigned = 0;
  for (auto &instance : instances) {
    if (instance.assigned_label) continue;
    Rng rng(DeriveSeed({seed, HashString(instance.id)}));
    instance = AssignBagLabel(std::move(instance), rng);
    ++assigned;
  }
  return assigned;
}

nlohmann::ordered_json CorruptionResult::Manifest(const NoiseSpec &spec) const {
  nlohmann::ordered_json out;
  out["seed"] = spec.seed;
  out["ratio"] = spec.ratio;
  out["weighting"] = WeightingName(spec.weighting);
  out["instances"] = dataset.size();
  out["corrupted"] = corrupted;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (size_t c = 0; c < replacement_counts.size(); ++c) {
    counts[dataset.label_space().name(static_cast<LabelId>(c))] =
        replacement_counts[c];
  }
  out["replacement_counts"] = std::move(counts);
  return out;
}

CorruptionResult InjectNoise(const RefinedDataset &clean, const NoiseSpec &spec) {
  spec.Validate();
  const LabelSpace &labels = clean.label_space();
  const int num_classes = labels.size();
  if (num_classes < 2) {
    throw Error(ErrorCategory::kContract, "noise injection needs >= 2 classes");
  }
  const size_t n = clean.size();
  std::vector<int64_t> frequency(num_classes, 0);
  for (const auto &instance : clean.instances()) {
    if (!instance.gold_label) {
      throw Error(ErrorCategory::kData,
                  "gold label missing, instance id=" + instance.id);
    }
    if (instance.assigned_label && instance.assigned_label != instance.gold_label) {
      throw Error(ErrorCategory::kContract,
                  "assigned label differs from gold before corruption, instance id=" +
                      instance.id);
    }
    ++frequency[*instance.gold_label];
  }

  // nearbyint honours the default round-half-to-even mode.
  const auto target = static_cast<size_t>(std::nearbyint(spec.ratio * static_cast<double>(n)));
  if (spec.ratio > 0.0 && target == 0) {
    spdlog::warn("noise ratio {} rounds to zero corrupted instances out of {}",
                 spec.ratio, n);
  }

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng select(DeriveSeed({spec.seed, HashString("select")}));
  for (size_t i = 0; i < target; ++i) {
    std::swap(order[i], order[i + select.Below(n - i)]);
  }
  std::vector<char> corrupt(n, 0);
  for (size_t i = 0; i < target; ++i) corrupt[order[i]] = 1;

  CorruptionResult result;
  result.replacement_counts.assign(num_classes, 0);
  Rng draw(DeriveSeed({spec.seed, HashString("replace")}));
  std::vector<Instance> instances(clean.instances().begin(), clean.instances().end());
  std::vector<double> weights(num_classes);
  for (size_t i = 0; i < n; ++i) {
    Instance &instance = instances[i];
    const LabelId gold = *instance.gold_label;
    instance.assigned_label = gold;
    instance.is_noise = false;
    if (!corrupt[i]) continue;

    double total = 0.0;
    for (LabelId c = 0; c < num_classes; ++c) {
      weights[c] = c == gold ? 0.0
                   : spec.weighting == NoiseWeighting::kUniform
                       ? 1.0
                       : static_cast<double>(frequency[c]);
      total += weights[c];
    }
    if (total <= 0.0) {
      // Only the gold class occurs; fall back to uniform.
      for (LabelId c = 0; c < num_classes; ++c) weights[c] = c == gold ? 0.0 : 1.0;
      total = num_classes - 1;
    }
    double u = draw.Uniform() * total;
    LabelId replacement = gold;
    for (LabelId c = 0; c < num_classes; ++c) {
      if (weights[c] <= 0.0) continue;
      replacement = c;
      if (u < weights[c]) break;
      u -= weights[c];
    }
    instance.assigned_label = replacement;
    instance.bag_labels = {replacement};
    instance.is_noise = true;
    ++result.replacement_counts[replacement];
    ++result.corrupted;
  }
  result.dataset = RefinedDataset(labels, std::move(instances));
  return result;
}

// Synthetic corpus ------------------------------------------------------------

void SynthSpec::Validate() const {
  if (num_classes < 2) {
    throw Error(ErrorCategory::kUsage, "synthetic corpus needs >= 2 classes");
  }
  if (!class_counts.empty() &&
      static_cast<int>(class_counts.size()) != num_classes) {
    throw Error(ErrorCategory::kUsage, "class_counts must have one entry per class");
  }
  for (int c : Counts()) {
    if (c < 0) throw Error(ErrorCategory::kUsage, "negative class count");
  }
  if (triggers_per_class < 1 || filler_vocab < 1 || entity_vocab < 1 ||
      min_filler < 2 || max_filler < min_filler) {
    throw Error(ErrorCategory::kUsage, "invalid synthetic vocabulary spec");
  }
}

std::vector<int> SynthSpec::Counts() const {
  if (!class_counts.empty()) return class_counts;
  return std::vector<int>(num_classes, per_class);
}

LabelSpace SynthLabelSpace(int num_classes) {
  std::vector<std::string> names = {std::string(kDefaultNaName)};
  for (int c = 1; c < num_classes; ++c) names.push_back("rel_" + std::to_string(c));
  return LabelSpace(std::move(names));
}

std::vector<int> CountsWithNaFraction(int num_classes, int total, double na_fraction) {
  if (num_classes < 2 || total < 0 || !(na_fraction >= 0.0 && na_fraction <= 1.0)) {
    throw Error(ErrorCategory::kUsage, "invalid NA-fraction corpus shape");
  }
  std::vector<int> counts(num_classes, 0);
  counts[0] = static_cast<int>(std::nearbyint(total * na_fraction));
  const int rest = total - counts[0];
  const int positives = num_classes - 1;
  for (int c = 1; c < num_classes; ++c) {
    counts[c] = rest / positives + (c - 1 < rest % positives ? 1 : 0);
  }
  return counts;
}

namespace {

constexpr const char *kEntityTypes[] = {"PER", "ORG", "LOC", "MISC"};

std::string Word(char prefix, uint64_t i) { return prefix + std::to_string(i); }

}  // namespace

RefinedDataset SynthCorpus(const SynthSpec &spec) {
  spec.Validate();
  const LabelSpace labels = SynthLabelSpace(spec.num_classes);
  const std::vector<int> counts = spec.Counts();
  Rng rng(DeriveSeed({spec.seed, HashString("synth")}));

  std::vector<Instance> instances;
  size_t serial = 0;
  for (LabelId c = 0; c < spec.num_classes; ++c) {
    for (int n = 0; n < counts[c]; ++n) {
      Instance instance;
      char id[32];
      std::snprintf(id, sizeof(id), "%06zu", serial++);
      instance.id = spec.id_prefix + id;

      const int fill = spec.min_filler +
                       static_cast<int>(rng.Below(spec.max_filler - spec.min_filler + 1));
      std::vector<std::string> filler(fill);
      for (auto &w : filler) w = Word('w', rng.Below(spec.filler_vocab));
      std::vector<std::string> first(1 + rng.Below(2)), second(1 + rng.Below(2));
      for (auto &w : first) w = Word('E', rng.Below(spec.entity_vocab));
      for (auto &w : second) w = Word('E', rng.Below(spec.entity_vocab));

      // filler[0, a) first filler[a, a + b) second filler[a + b, fill)
      const int a = static_cast<int>(rng.Below(fill / 3 + 1));
      const int b = 1 + static_cast<int>(rng.Below(std::max(1, (fill - a) / 2)));
      const bool trigger_after_first = rng.Below(2) == 0;
      std::string trigger;
      if (c != labels.na_id()) {
        trigger = "t" + std::to_string(c) + "_" +
                  std::to_string(rng.Below(spec.triggers_per_class));
      }

      auto &tokens = instance.tokens;
      tokens.insert(tokens.end(), filler.begin(), filler.begin() + a);
      TokenSpan first_span{static_cast<int>(tokens.size()), 0};
      tokens.insert(tokens.end(), first.begin(), first.end());
      first_span.end = static_cast<int>(tokens.size());
      if (!trigger.empty() && trigger_after_first) tokens.push_back(trigger);
      tokens.insert(tokens.end(), filler.begin() + a, filler.begin() + a + b);
      if (!trigger.empty() && !trigger_after_first) tokens.push_back(trigger);
      TokenSpan second_span{static_cast<int>(tokens.size()), 0};
      tokens.insert(tokens.end(), second.begin(), second.end());
      second_span.end = static_cast<int>(tokens.size());
      tokens.insert(tokens.end(), filler.begin() + a + b, filler.end());

      const bool head_first = rng.Below(2) == 0;
      instance.head = head_first ? first_span : second_span;
      instance.tail = head_first ? second_span : first_span;
      instance.head_type = kEntityTypes[rng.Below(4)];
      instance.tail_type = kEntityTypes[rng.Below(4)];
      instance.bag_labels = {c};
      instance.assigned_label = c;
      instance.gold_label = c;
      instance.is_noise = false;
      instances.push_back(std::move(instance));
    }
  }
  return RefinedDataset(labels, std::move(instances));
}

}  // namespace sent
