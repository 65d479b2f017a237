#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "sent/error.h"
#include "sent/noisegen.h"
#include "sent/trainer.h"
#include "test_util.h"

namespace sent {
namespace {

using testing::MakeDataset;

TEST(AssignBagLabel, Singleton) {
  Instance instance = testing::MakeInstance("x", 2);
  instance.assigned_label.reset();
  Rng rng(1);
  EXPECT_EQ(AssignBagLabel(instance, rng).assigned_label, 2);
}

TEST(AssignBagLabel, UniformOverBag) {
  Instance instance = testing::MakeInstance("x", 1);
  instance.bag_labels = {1, 2};
  instance.assigned_label.reset();
  Rng rng(77);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += AssignBagLabel(instance, rng).assigned_label == 1;
  EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}

TEST(AssignBagLabel, DeterministicAndValidated) {
  std::vector<Instance> a;
  for (int i = 0; i < 50; ++i) {
    Instance instance = testing::MakeInstance("x" + std::to_string(i), 1);
    instance.bag_labels = {1, 2, 3};
    instance.assigned_label.reset();
    a.push_back(instance);
  }
  std::vector<Instance> b = a;
  EXPECT_EQ(AssignBagLabels(a, 5), 50u);
  EXPECT_EQ(AssignBagLabels(b, 5), 50u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(AssignBagLabels(a, 5), 0u);  // already assigned

  Instance empty = testing::MakeInstance("e", 1);
  empty.bag_labels.clear();
  Rng rng(1);
  EXPECT_THROW(AssignBagLabel(empty, rng), Error);
}

RefinedDataset CleanDataset(const std::vector<LabelId> &golds, int num_classes) {
  return MakeDataset(num_classes, golds, golds);
}

TEST(InjectNoise, ExactCount) {
  const RefinedDataset clean = CleanDataset({0, 0, 0, 1, 1, 1, 2, 2, 2, 0}, 3);
  NoiseSpec spec;
  spec.ratio = 0.3;
  spec.seed = 4;
  const CorruptionResult r = InjectNoise(clean, spec);
  int noisy = 0;
  for (const auto &instance : r.dataset.instances()) {
    noisy += *instance.is_noise;
    if (*instance.is_noise) EXPECT_NE(instance.assigned_label, instance.gold_label);
  }
  EXPECT_EQ(noisy, 3);
  EXPECT_EQ(r.corrupted, 3);
}

TEST(InjectNoise, CountIsRoundedRatioForEverySize) {
  for (int n = 1; n <= 60; ++n) {
    std::vector<LabelId> golds;
    for (int i = 0; i < n; ++i) golds.push_back(i % 4);
    for (double ratio : {0.0, 0.1, 0.25, 0.3, 0.5, 1.0}) {
      NoiseSpec spec;
      spec.ratio = ratio;
      spec.seed = static_cast<uint64_t>(n);
      const CorruptionResult r = InjectNoise(CleanDataset(golds, 4), spec);
      EXPECT_EQ(r.corrupted, static_cast<int64_t>(std::nearbyint(ratio * n)));
      for (const auto &instance : r.dataset.instances()) {
        if (*instance.is_noise) {
          EXPECT_NE(instance.assigned_label, instance.gold_label);
        } else {
          EXPECT_EQ(instance.assigned_label, instance.gold_label);
        }
      }
    }
  }
}

TEST(InjectNoise, ZeroRatioKeepsLabels) {
  const RefinedDataset clean = CleanDataset({0, 1, 2, 1}, 3);
  NoiseSpec spec;
  spec.ratio = 0.0;
  const CorruptionResult r = InjectNoise(clean, spec);
  for (size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(r.dataset.instance(i).assigned_label, clean.instance(i).assigned_label);
    EXPECT_EQ(r.dataset.instance(i).is_noise, false);
  }
}

TEST(InjectNoise, RejectsBadInput) {
  NoiseSpec spec;
  spec.ratio = 1.5;
  EXPECT_THROW(InjectNoise(CleanDataset({0, 1}, 2), spec), Error);
  spec.ratio = 0.5;
  EXPECT_THROW(InjectNoise(MakeDataset(2, {0, 1}), spec), Error);  // no gold labels
}

TEST(InjectNoise, ClassFrequencyWeighting) {
  // Gold frequencies NA:8, A:1, B:1. The A instance is replaced by NA with
  // probability 8 / 9.
  const RefinedDataset clean = CleanDataset({0, 0, 0, 0, 0, 0, 0, 0, 1, 2}, 3);
  NoiseSpec spec;
  spec.ratio = 1.0;
  int to_na = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    spec.seed = static_cast<uint64_t>(t);
    to_na += InjectNoise(clean, spec).dataset.instance(8).assigned_label == 0;
  }
  EXPECT_NEAR(to_na / static_cast<double>(trials), 8.0 / 9.0, 0.03);
}

TEST(InjectNoise, UniformWeighting) {
  const RefinedDataset clean = CleanDataset({0, 0, 0, 0, 0, 0, 0, 0, 1, 2}, 3);
  NoiseSpec spec;
  spec.ratio = 1.0;
  spec.weighting = NoiseWeighting::kUniform;
  int to_na = 0;
  for (int t = 0; t < 10000; ++t) {
    spec.seed = static_cast<uint64_t>(t);
    to_na += InjectNoise(clean, spec).dataset.instance(8).assigned_label == 0;
  }
  EXPECT_NEAR(to_na / 10000.0, 0.5, 0.02);
}

TEST(InjectNoise, ReplacementDistributionPassesChiSquare) {
  const std::vector<int> counts{60, 20, 10, 6, 4};
  std::vector<LabelId> golds;
  for (LabelId c = 0; c < 5; ++c) golds.insert(golds.end(), counts[c], c);
  const RefinedDataset clean = CleanDataset(golds, 5);
  NoiseSpec spec;
  spec.ratio = 1.0;
  // Replacements for gold class 1 should follow {60, 10, 6, 4} / 80.
  std::vector<int64_t> observed(5, 0);
  int64_t draws = 0;
  for (uint64_t seed = 0; draws < 20000; ++seed) {
    spec.seed = seed;
    const RefinedDataset noisy = InjectNoise(clean, spec).dataset;
    for (const auto &instance : noisy.instances()) {
      if (instance.gold_label != 1) continue;
      ++observed[*instance.assigned_label];
      ++draws;
    }
  }
  EXPECT_EQ(observed[1], 0);
  double chi2 = 0.0;
  for (LabelId c : {0, 2, 3, 4}) {
    const double expected = draws * counts[c] / 80.0;
    chi2 += (observed[c] - expected) * (observed[c] - expected) / expected;
  }
  EXPECT_LT(chi2, 11.345);  // chi-square critical value, 3 dof, alpha 0.01
}

TEST(InjectNoise, FalsePositiveShareMatchesExpectation) {
  SynthSpec synth;
  synth.num_classes = 10;
  synth.class_counts = CountsWithNaFraction(10, 5000, 0.8);
  const RefinedDataset clean = SynthCorpus(synth);
  NoiseSpec spec;
  spec.ratio = 0.3;
  spec.seed = 12;
  const RefinedDataset noisy = InjectNoise(clean, spec).dataset;
  const std::vector<int> counts = synth.Counts();
  double expected = 0.0;
  int corrupted_positive = 0, became_na = 0;
  for (const auto &instance : noisy.instances()) {
    if (!*instance.is_noise || *instance.gold_label == 0) continue;
    ++corrupted_positive;
    became_na += *instance.assigned_label == 0;
    expected += counts[0] / static_cast<double>(5000 - counts[*instance.gold_label]);
  }
  ASSERT_GT(corrupted_positive, 0);
  expected /= corrupted_positive;
  EXPECT_NEAR(became_na / static_cast<double>(corrupted_positive), expected, 0.05);
}

TEST(InjectNoise, ManifestCounts) {
  const RefinedDataset clean = CleanDataset({0, 0, 1, 1, 2, 2, 0, 1, 2, 0}, 3);
  NoiseSpec spec;
  spec.seed = 21;
  spec.ratio = 0.5;
  const CorruptionResult r = InjectNoise(clean, spec);
  const auto manifest = r.Manifest(spec);
  int64_t total = 0;
  for (const auto &[name, count] : manifest["replacement_counts"].items()) total += count.get<int64_t>();
  EXPECT_EQ(total, 5);
  EXPECT_EQ(manifest["seed"], 21);
  EXPECT_EQ(manifest["ratio"], 0.5);
}

TEST(SynthCorpus, ExactCounts) {
  SynthSpec spec;
  spec.num_classes = 4;
  spec.per_class = 250;
  const RefinedDataset data = SynthCorpus(spec);
  ASSERT_EQ(data.size(), 1000u);
  std::map<LabelId, int> counts;
  for (const auto &instance : data.instances()) {
    ++counts[*instance.gold_label];
    EXPECT_EQ(instance.assigned_label, instance.gold_label);
    EXPECT_EQ(instance.is_noise, false);
    EXPECT_NO_THROW(ValidateInstance(instance, data.label_space()));
  }
  for (LabelId c = 0; c < 4; ++c) EXPECT_EQ(counts[c], 250);
  EXPECT_EQ(data.label_space().na_id(), 0);
}

TEST(SynthCorpus, SameSeedSameFile) {
  testing::TempDir dir("synth");
  SynthSpec spec;
  spec.num_classes = 5;
  spec.per_class = 40;
  SaveDataset(SynthCorpus(spec), dir / "a.jsonl");
  SaveDataset(SynthCorpus(spec), dir / "b.jsonl");
  EXPECT_EQ(testing::ReadFile(dir / "a.jsonl"), testing::ReadFile(dir / "b.jsonl"));
  spec.seed = 2;
  SaveDataset(SynthCorpus(spec), dir / "c.jsonl");
  EXPECT_NE(testing::ReadFile(dir / "a.jsonl"), testing::ReadFile(dir / "c.jsonl"));
}

TEST(SynthCorpus, SingleClassIsUsageError) {
  SynthSpec spec;
  spec.num_classes = 1;
  try {
    SynthCorpus(spec);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::kUsage);
  }
}

TEST(SynthCorpus, SeparableUnderPositiveTraining) {
  SynthSpec spec;
  spec.num_classes = 6;
  spec.per_class = 150;
  spec.seed = 8;
  const DatasetSplit split = SplitDataset(SynthCorpus(spec), {0.8, 0.2}, 3);
  RunConfig config;
  config.optimizer.kind = OptimizerKind::kSgd;
  config.optimizer.learning_rate = 6.0;
  config.featurizer.length_normalize = false;
  Model m = Model::Init(split.train.label_space(), config.featurizer, std::nullopt, 1);
  m = TrainEpochs(std::move(m), split.train, config, LossKind::kPositive, 10, 0);
  EXPECT_GE(EvaluateDev(m, split.dev).f1, 0.95);
}

TEST(CountsWithNaFraction, SumsAndShares) {
  const std::vector<int> counts = CountsWithNaFraction(10, 5000, 0.7);
  int total = 0;
  for (int c : counts) total += c;
  EXPECT_EQ(total, 5000);
  EXPECT_EQ(counts[0], 3500);
  for (size_t c = 1; c < counts.size(); ++c) EXPECT_NEAR(counts[c], 1500 / 9.0, 1.0);
}

}  // namespace
}  // namespace sent
