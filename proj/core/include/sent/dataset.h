#ifndef SENT_DATASET_H_
#define SENT_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sent {

using LabelId = int32_t;

inline constexpr std::string_view kDefaultNaName = "NA";

// Ordered relation classes with stable integer ids. One class is the
// designated no-relation (NA) class.
class LabelSpace {
 public:
  LabelSpace() = default;

  // The NA class is the entry named `na_name`; it must be present.
  explicit LabelSpace(std::vector<std::string> names,
                      std::string_view na_name = kDefaultNaName);

  int size() const { return static_cast<int>(names_.size()); }
  LabelId na_id() const { return na_id_; }
  const std::string &name(LabelId id) const { return names_.at(id); }
  const std::vector<std::string> &names() const { return names_; }
  const std::string &na_name() const { return names_.at(na_id_); }

  std::optional<LabelId> Find(std::string_view name) const;

  // Like Find but throws kValidation for unknown names.
  LabelId Id(std::string_view name) const;

  bool Contains(LabelId id) const { return id >= 0 && id < size(); }

  bool operator==(const LabelSpace &other) const {
    return names_ == other.names_ && na_id_ == other.na_id_;
  }

 private:
  std::vector<std::string> names_;
  LabelId na_id_ = 0;
  std::unordered_map<std::string, LabelId> index_;
};

// Reads one class name per line (blank lines and '#' comments skipped).
LabelSpace LoadLabelSpace(const std::filesystem::path &path,
                          std::string_view na_name = kDefaultNaName);
void SaveLabelSpace(const LabelSpace &labels,
                    const std::filesystem::path &path);

// Half-open token interval [start, end).
struct TokenSpan {
  int start = 0;
  int end = 0;

  int size() const { return end - start; }
  bool Overlaps(const TokenSpan &other) const {
    return start < other.end && other.start < end;
  }
  bool operator==(const TokenSpan &) const = default;
};

// One sentence with an entity pair and its (possibly noisy) label.
struct Instance {
  std::string id;
  std::vector<std::string> tokens;
  TokenSpan head;
  TokenSpan tail;
  std::string head_type;
  std::string tail_type;
  std::vector<LabelId> bag_labels;
  std::optional<LabelId> assigned_label;  // y*; absent until assigned
  std::optional<LabelId> gold_label;
  std::optional<bool> is_noise;

  bool operator==(const Instance &) const = default;
};

// Throws kValidation naming the instance id when an invariant fails.
void ValidateInstance(const Instance &instance, const LabelSpace &labels);

enum class Status { kKept, kFiltered, kRelabeled };

const char *StatusName(Status status);
std::optional<Status> ParseStatus(std::string_view name);

struct InstanceState {
  Status status = Status::kKept;
  std::optional<LabelId> effective_label;  // absent iff kFiltered
  LabelId original_label = 0;

  static InstanceState Kept(LabelId label) {
    return {Status::kKept, label, label};
  }
  static InstanceState Filtered(LabelId original) {
    return {Status::kFiltered, std::nullopt, original};
  }
  static InstanceState Relabeled(LabelId original, LabelId label) {
    return {Status::kRelabeled, label, original};
  }

  bool operator==(const InstanceState &) const = default;
};

// Throws kContract if the state violates its status invariants.
void ValidateState(const InstanceState &state);

// An instance together with the label it is currently trained on.
struct LabeledInstance {
  const Instance *instance = nullptr;
  LabelId label = 0;
  size_t index = 0;  // position in the owning dataset
};

// Instances plus per-instance refinement state. The instance list is shared
// between copies; refinement produces a new dataset with a new state list.
class RefinedDataset {
 public:
  RefinedDataset() : instances_(std::make_shared<std::vector<Instance>>()) {}

  // Every instance must carry an assigned label; all states start KEPT.
  RefinedDataset(LabelSpace labels, std::vector<Instance> instances);

  RefinedDataset(LabelSpace labels, std::vector<Instance> instances,
                 std::vector<InstanceState> states);

  RefinedDataset WithStates(std::vector<InstanceState> states) const;

  const LabelSpace &label_space() const { return labels_; }
  std::span<const Instance> instances() const { return *instances_; }
  std::span<const InstanceState> states() const { return states_; }
  const Instance &instance(size_t i) const { return (*instances_)[i]; }
  const InstanceState &state(size_t i) const { return states_[i]; }
  size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }

  // The non-FILTERED instances with their effective labels.
  std::vector<LabeledInstance> TrainingView() const;

  size_t Count(Status status) const;

  // Subset by index, preserving the given order and states.
  RefinedDataset Select(std::span<const size_t> indices) const;

 private:
  LabelSpace labels_;
  std::shared_ptr<const std::vector<Instance>> instances_;
  std::vector<InstanceState> states_;
};

struct LoadOptions {
  std::optional<LabelSpace> label_space;  // inferred when absent
  std::string na_name = std::string(kDefaultNaName);
};

// Raw JSONL contents. Instances may lack an assigned label; states are only
// present for lines that carry refinement fields.
struct Corpus {
  LabelSpace labels;
  std::vector<Instance> instances;
  std::vector<std::optional<InstanceState>> states;
};

// Parses and validates a JSONL dataset. When no label space is supplied,
// classes are ordered by first appearance and the NA class is appended if it
// never occurs. Throws kParse with the line number for malformed lines.
Corpus ReadCorpus(const std::filesystem::path &path,
                  const LoadOptions &options = {});

// ReadCorpus plus the requirement that every instance has an assigned label.
// Lines carrying "refine_status" restore that state; others start KEPT.
RefinedDataset LoadDataset(const std::filesystem::path &path,
                           const LoadOptions &options = {});

// Writes the JSONL schema. Non-KEPT states are written as the extra fields
// "refine_status" and "effective_label".
void SaveDataset(const RefinedDataset &dataset,
                 const std::filesystem::path &path);
void SaveInstances(std::span<const Instance> instances,
                   const LabelSpace &labels,
                   const std::filesystem::path &path);

struct SplitFractions {
  double train = 0.8;
  double dev = 0.2;
};

// Disjoint class-stratified partition. Per class, floor(n * dev) instances
// go to dev, floor(n * (1 - train - dev)) to rest and the remainder to
// train. Classes with fewer than two instances go entirely to train.
struct DatasetSplit {
  RefinedDataset train;
  RefinedDataset dev;
  RefinedDataset rest;
};

DatasetSplit SplitDataset(const RefinedDataset &dataset,
                          SplitFractions fractions, uint64_t seed);

}  // namespace sent

#endif  // SENT_DATASET_H_
