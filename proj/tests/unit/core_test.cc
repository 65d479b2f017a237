#include <gtest/gtest.h>

#include "sent/dataset.h"
#include "sent/error.h"
#include "sent/noisegen.h"
#include "test_util.h"

namespace sent {
namespace {

using testing::MakeDataset;
using testing::TempDir;

const char *kLine =
    R"({"id":"%s","tokens":["a","b","c","d","e","f"],"head_span":[%s],"tail_span":[4,5],)"
    R"("head_type":"PER","tail_type":"ORG","bag_labels":["%s"],"assigned_label":"%s"})";

std::string Line(const std::string &id, const std::string &head = "0,1",
                 const std::string &bag = "r1", const std::string &assigned = "r1") {
  char buf[512];
  std::snprintf(buf, sizeof(buf), kLine, id.c_str(), head.c_str(), bag.c_str(),
                assigned.c_str());
  return buf;
}

ErrorCategory CategoryOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.category();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCategory::kContract;
}

TEST(LabelSpace, BijectionAndNa) {
  LabelSpace labels({"r1", "NA", "r2"});
  EXPECT_EQ(labels.size(), 3);
  EXPECT_EQ(labels.na_id(), 1);
  for (LabelId id = 0; id < labels.size(); ++id) EXPECT_EQ(labels.Id(labels.name(id)), id);
  EXPECT_FALSE(labels.Find("r3"));
  EXPECT_EQ(CategoryOf([] { LabelSpace({"NA"}); }), ErrorCategory::kValidation);
  EXPECT_EQ(CategoryOf([] { LabelSpace({"NA", "r1", "r1"}); }), ErrorCategory::kValidation);
  EXPECT_EQ(CategoryOf([] { LabelSpace({"r1", "r2"}); }), ErrorCategory::kValidation);
}

TEST(LabelSpace, FileRoundTrip) {
  TempDir dir("labels");
  LabelSpace labels({"NA", "born_in", "works_for"});
  SaveLabelSpace(labels, dir / "labels.txt");
  EXPECT_EQ(LoadLabelSpace(dir / "labels.txt"), labels);
}

TEST(LoadDataset, ThreeValidLines) {
  TempDir dir("load");
  testing::WriteFile(dir / "d.jsonl", Line("a") + "\n" + Line("b") + "\n" + Line("c") + "\n");
  const RefinedDataset data = LoadDataset(dir / "d.jsonl");
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data.Count(Status::kKept), 3u);
  for (size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(data.state(i).effective_label, data.instance(i).assigned_label);
  }
  // Labels by first appearance, NA appended when absent.
  EXPECT_EQ(data.label_space().names(), (std::vector<std::string>{"r1", "NA"}));
}

TEST(LoadDataset, EmptySpanNamesInstance) {
  TempDir dir("load");
  testing::WriteFile(dir / "d.jsonl", Line("bad7", "5,4") + "\n");
  try {
    LoadDataset(dir / "d.jsonl");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::kValidation);
    EXPECT_NE(std::string(e.what()).find("empty span, instance id=bad7"), std::string::npos);
  }
}

TEST(LoadDataset, AssignedOutsideBagRejected) {
  TempDir dir("load");
  testing::WriteFile(dir / "d.jsonl", Line("x", "0,1", "r1", "r2") + "\n");
  EXPECT_EQ(CategoryOf([&] { LoadDataset(dir / "d.jsonl"); }), ErrorCategory::kValidation);
}

TEST(LoadDataset, MalformedLineReportsLineNumber) {
  TempDir dir("load");
  testing::WriteFile(dir / "d.jsonl", Line("a") + "\n{not json\n");
  try {
    LoadDataset(dir / "d.jsonl");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadDataset, UnknownLabelAgainstGivenSpace) {
  TempDir dir("load");
  testing::WriteFile(dir / "d.jsonl", Line("a", "0,1", "r9", "r9") + "\n");
  LoadOptions options;
  options.label_space = LabelSpace({"NA", "r1"});
  EXPECT_EQ(CategoryOf([&] { LoadDataset(dir / "d.jsonl", options); }),
            ErrorCategory::kValidation);
}

TEST(LoadDataset, NoiseFlagMustAgreeWithLabels) {
  LabelSpace labels({"NA", "r1"});
  Instance instance = testing::MakeInstance("n", 1, 1);
  instance.is_noise = true;
  EXPECT_EQ(CategoryOf([&] { ValidateInstance(instance, labels); }),
            ErrorCategory::kValidation);
  instance.is_noise = false;
  EXPECT_NO_THROW(ValidateInstance(instance, labels));
}

TEST(TrainingView, AllKept) {
  const RefinedDataset data = MakeDataset(3, {0, 1, 2, 1});
  const auto view = data.TrainingView();
  ASSERT_EQ(view.size(), 4u);
  for (size_t i = 0; i < view.size(); ++i) EXPECT_EQ(view[i].label, *data.instance(i).assigned_label);
}

TEST(TrainingView, ThreeOfTenFiltered) {
  const RefinedDataset data = MakeDataset(3, {0, 1, 2, 1, 0, 0, 2, 1, 1, 0});
  std::vector<InstanceState> states(data.states().begin(), data.states().end());
  for (size_t i : {1u, 4u, 8u}) states[i] = InstanceState::Filtered(states[i].original_label);
  const RefinedDataset edited = data.WithStates(states);
  EXPECT_EQ(edited.TrainingView().size(), 7u);
  EXPECT_EQ(edited.TrainingView().size() + edited.Count(Status::kFiltered), edited.size());
}

TEST(TrainingView, RelabeledUsesNewLabel) {
  const RefinedDataset data = MakeDataset(6, {2, 3});
  std::vector<InstanceState> states(data.states().begin(), data.states().end());
  states[0] = InstanceState::Relabeled(2, 5);
  const auto view = data.WithStates(states).TrainingView();
  ASSERT_EQ(view.size(), 2u);
  EXPECT_EQ(view[0].label, 5);
}

TEST(InstanceState, InvariantsEnforced) {
  EXPECT_NO_THROW(ValidateState(InstanceState::Kept(2)));
  EXPECT_EQ(CategoryOf([] { ValidateState({Status::kKept, 3, 2}); }), ErrorCategory::kContract);
  EXPECT_EQ(CategoryOf([] { ValidateState({Status::kFiltered, 1, 1}); }), ErrorCategory::kContract);
  EXPECT_EQ(CategoryOf([] { ValidateState({Status::kRelabeled, std::nullopt, 1}); }),
            ErrorCategory::kContract);
}

RefinedDataset HundredInstances() {
  std::vector<LabelId> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 4);
  return MakeDataset(4, labels);
}

TEST(SplitDataset, StratifiedSizes) {
  const DatasetSplit split = SplitDataset(HundredInstances(), {0.8, 0.2}, 7);
  EXPECT_EQ(split.train.size(), 80u);
  EXPECT_EQ(split.dev.size(), 20u);
  EXPECT_EQ(split.rest.size(), 0u);
  for (LabelId c = 0; c < 4; ++c) {
    size_t n = 0;
    for (const auto &s : split.dev.states()) n += s.original_label == c;
    EXPECT_EQ(n, 5u);
  }
}

TEST(SplitDataset, DisjointAndDeterministic) {
  const RefinedDataset data = HundredInstances();
  const DatasetSplit a = SplitDataset(data, {0.7, 0.15}, 7);
  const DatasetSplit b = SplitDataset(data, {0.7, 0.15}, 7);
  std::set<std::string> ids;
  for (const auto *part : {&a.train, &a.dev, &a.rest}) {
    for (const auto &instance : part->instances()) EXPECT_TRUE(ids.insert(instance.id).second);
  }
  EXPECT_EQ(ids.size(), data.size());
  for (size_t i = 0; i < a.dev.size(); ++i) EXPECT_EQ(a.dev.instance(i), b.dev.instance(i));
  const DatasetSplit c = SplitDataset(data, {0.7, 0.15}, 8);
  bool differs = false;
  for (size_t i = 0; i < a.dev.size(); ++i) differs |= a.dev.instance(i).id != c.dev.instance(i).id;
  EXPECT_TRUE(differs);
}

TEST(SplitDataset, BadFractions) {
  EXPECT_EQ(CategoryOf([] { SplitDataset(HundredInstances(), {0.9, 0.2}, 7); }),
            ErrorCategory::kContract);
}

TEST(SplitDataset, SingletonClassGoesToTrain) {
  const DatasetSplit split = SplitDataset(MakeDataset(3, {0, 0, 0, 0, 2}), {0.5, 0.5}, 1);
  ASSERT_EQ(split.dev.size(), 2u);
  bool found = false;
  for (const auto &s : split.train.states()) found |= s.original_label == 2;
  EXPECT_TRUE(found);
}

TEST(SaveDataset, RoundTripIsExact) {
  TempDir dir("roundtrip");
  SynthSpec spec;
  spec.num_classes = 4;
  spec.per_class = 30;
  NoiseSpec noise;
  noise.seed = 3;
  const RefinedDataset noisy = InjectNoise(SynthCorpus(spec), noise).dataset;
  std::vector<InstanceState> states(noisy.states().begin(), noisy.states().end());
  states[0] = InstanceState::Filtered(states[0].original_label);
  states[1] = InstanceState::Relabeled(states[1].original_label,
                                       (states[1].original_label + 1) % 4);
  const RefinedDataset data = noisy.WithStates(states);

  SaveDataset(data, dir / "a.jsonl");
  LoadOptions options;
  options.label_space = data.label_space();
  const RefinedDataset back = LoadDataset(dir / "a.jsonl", options);
  ASSERT_EQ(back.size(), data.size());
  EXPECT_EQ(back.label_space(), data.label_space());
  for (size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back.instance(i), data.instance(i));
    EXPECT_EQ(back.state(i), data.state(i));
  }
  SaveDataset(back, dir / "b.jsonl");
  EXPECT_EQ(testing::ReadFile(dir / "a.jsonl"), testing::ReadFile(dir / "b.jsonl"));
  // Without a label file the ids follow first appearance, the names still match.
  const RefinedDataset inferred = LoadDataset(dir / "a.jsonl");
  for (size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(inferred.label_space().name(*inferred.instance(i).assigned_label),
              data.label_space().name(*data.instance(i).assigned_label));
  }
  SaveDataset(inferred, dir / "b.jsonl");
  EXPECT_EQ(testing::ReadFile(dir / "a.jsonl"), testing::ReadFile(dir / "b.jsonl"));
}

TEST(Dataset, NoiseFlagMatchesLabelsEverywhere) {
  SynthSpec spec;
  spec.num_classes = 5;
  spec.per_class = 40;
  NoiseSpec noise;
  noise.seed = 9;
  const RefinedDataset data = InjectNoise(SynthCorpus(spec), noise).dataset;
  for (const auto &instance : data.instances()) {
    ASSERT_TRUE(instance.gold_label && instance.is_noise);
    EXPECT_EQ(*instance.is_noise, *instance.assigned_label != *instance.gold_label);
  }
}

}  // namespace
}  // namespace sent
