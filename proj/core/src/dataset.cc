#include "sent/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sent/error.h"
#include "sent/rng.h"

namespace sent {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void Invalid(const std::string &id, const std::string &what) {
  throw Error(ErrorCategory::kValidation, what + ", instance id=" + id);
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> names, std::string_view na_name)
    : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw Error(ErrorCategory::kValidation,
                "label space needs at least 2 classes, got " +
                    std::to_string(names_.size()));
  }
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw Error(ErrorCategory::kValidation, "empty label name");
    }
    if (!index_.emplace(names_[i], static_cast<LabelId>(i)).second) {
      throw Error(ErrorCategory::kValidation,
                  "duplicate label name \"" + names_[i] + "\"");
    }
  }
  auto na = Find(na_name);
  if (!na) {
    throw Error(ErrorCategory::kValidation,
                "label space lacks the NA class \"" + std::string(na_name) +
                    "\"");
  }
  na_id_ = *na;
}

std::optional<LabelId> LabelSpace::Find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelSpace::Id(std::string_view name) const {
  auto id = Find(name);
  if (!id) {
    throw Error(ErrorCategory::kValidation,
                "unknown label \"" + std::string(name) + "\"");
  }
  return *id;
}

LabelSpace LoadLabelSpace(const std::filesystem::path &path,
                          std::string_view na_name) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCategory::kIo, "cannot open label file " + path.string());
  }
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    names.push_back(line);
  }
  return LabelSpace(std::move(names), na_name);
}

void SaveLabelSpace(const LabelSpace &labels,
                    const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCategory::kIo, "cannot write label file " + path.string());
  }
  for (const auto &name : labels.names()) out << name << '\n';
}

void ValidateInstance(const Instance &instance, const LabelSpace &labels) {
  const std::string &id = instance.id;
  if (id.empty()) Invalid(id, "empty id");
  const int n = static_cast<int>(instance.tokens.size());
  if (n == 0) Invalid(id, "no tokens");
  for (const TokenSpan *span : {&instance.head, &instance.tail}) {
    if (span->start >= span->end) Invalid(id, "empty span");
    if (span->start < 0 || span->end > n) Invalid(id, "span out of range");
  }
  if (instance.head.Overlaps(instance.tail)) {
    Invalid(id, "head and tail spans overlap");
  }
  if (instance.bag_labels.empty()) Invalid(id, "empty bag_labels");
  std::unordered_set<LabelId> seen;
  for (LabelId label : instance.bag_labels) {
    if (!labels.Contains(label)) Invalid(id, "bag label out of range");
    if (!seen.insert(label).second) Invalid(id, "duplicate bag label");
  }
  if (instance.assigned_label) {
    if (!labels.Contains(*instance.assigned_label)) {
      Invalid(id, "assigned label out of range");
    }
    if (!seen.count(*instance.assigned_label)) {
      Invalid(id, "assigned_label not in bag_labels");
    }
  }
  if (instance.gold_label && !labels.Contains(*instance.gold_label)) {
    Invalid(id, "gold label out of range");
  }
  if (instance.gold_label && instance.is_noise && instance.assigned_label) {
    const bool differs = *instance.assigned_label != *instance.gold_label;
    if (differs != *instance.is_noise) {
      Invalid(id, "is_noise disagrees with assigned_label vs gold_label");
    }
  }
}

const char *StatusName(Status status) {
  switch (status) {
    case Status::kKept: return "KEPT";
    case Status::kFiltered: return "FILTERED";
    case Status::kRelabeled: return "RELABELED";
  }
  return "KEPT";
}

std::optional<Status> ParseStatus(std::string_view name) {
  if (name == "KEPT") return Status::kKept;
  if (name == "FILTERED") return Status::kFiltered;
  if (name == "RELABELED") return Status::kRelabeled;
  return std::nullopt;
}

void ValidateState(const InstanceState &state) {
  switch (state.status) {
    case Status::kKept:
      if (state.effective_label != state.original_label) {
        throw Error(ErrorCategory::kContract,
                    "KEPT state must keep its original label");
      }
      break;
    case Status::kFiltered:
      if (state.effective_label) {
        throw Error(ErrorCategory::kContract,
                    "FILTERED state cannot carry an effective label");
      }
      break;
    case Status::kRelabeled:
      if (!state.effective_label) {
        throw Error(ErrorCategory::kContract,
                    "RELABELED state needs an effective label");
      }
      break;
  }
}

RefinedDataset::RefinedDataset(LabelSpace labels, std::vector<Instance> instances)
    : labels_(std::move(labels)) {
  states_.reserve(instances.size());
  for (const auto &instance : instances) {
    if (!instance.assigned_label) {
      Invalid(instance.id, "unassigned instance (assign a bag label first)");
    }
    states_.push_back(InstanceState::Kept(*instance.assigned_label));
  }
  instances_ = std::make_shared<const std::vector<Instance>>(std::move(instances));
}

RefinedDataset::RefinedDataset(LabelSpace labels, std::vector<Instance> instances,
                               std::vector<InstanceState> states)
    : labels_(std::move(labels)),
      instances_(std::make_shared<const std::vector<Instance>>(
          std::move(instances))),
      states_(std::move(states)) {
  if (instances_->size() != states_.size()) {
    throw Error(ErrorCategory::kContract, "instances/states size mismatch");
  }
  for (const auto &state : states_) ValidateState(state);
}

RefinedDataset RefinedDataset::WithStates(std::vector<InstanceState> states) const {
  if (states.size() != states_.size()) {
    throw Error(ErrorCategory::kContract, "state list size mismatch");
  }
  for (const auto &state : states) ValidateState(state);
  RefinedDataset out = *this;
  out.states_ = std::move(states);
  return out;
}

std::vector<LabeledInstance> RefinedDataset::TrainingView() const {
  std::vector<LabeledInstance> view;
  view.reserve(states_.size());
  for (size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].status == Status::kFiltered) continue;
    view.push_back({&(*instances_)[i], *states_[i].effective_label, i});
  }
  return view;
}

size_t RefinedDataset::Count(Status status) const {
  return static_cast<size_t>(
      std::count_if(states_.begin(), states_.end(),
                    [status](const auto &s) { return s.status == status; }));
}

RefinedDataset RefinedDataset::Select(std::span<const size_t> indices) const {
  std::vector<Instance> instances;
  std::vector<InstanceState> states;
  instances.reserve(indices.size());
  states.reserve(indices.size());
  for (size_t i : indices) {
    instances.push_back((*instances_)[i]);
    states.push_back(states_[i]);
  }
  return RefinedDataset(labels_, std::move(instances), std::move(states));
}

// JSONL ---------------------------------------------------------------------

namespace {

struct RawLine {
  json object;
  int line_number = 0;
};

std::vector<RawLine> ReadJsonLines(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::kIo, "cannot open dataset " + path.string());
  }
  std::vector<RawLine> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json object;
    try {
      object = json::parse(line);
    } catch (const json::parse_error &e) {
      throw Error(ErrorCategory::kParse, path.string() + ": line " +
                                             std::to_string(number) + ": " +
                                             e.what());
    }
    if (!object.is_object()) {
      throw Error(ErrorCategory::kParse, path.string() + ": line " +
                                             std::to_string(number) +
                                             ": expected a JSON object");
    }
    lines.push_back({std::move(object), number});
  }
  return lines;
}

[[noreturn]] void FieldError(const RawLine &raw, const std::string &what) {
  std::string id = raw.object.contains("id") && raw.object["id"].is_string()
                       ? raw.object["id"].get<std::string>()
                       : "?";
  throw Error(ErrorCategory::kParse, "line " + std::to_string(raw.line_number) +
                                         ": " + what + ", instance id=" + id);
}

const json &Require(const RawLine &raw, const char *key) {
  auto it = raw.object.find(key);
  if (it == raw.object.end()) FieldError(raw, std::string("missing field ") + key);
  return *it;
}

std::string RequireString(const RawLine &raw, const char *key) {
  const json &value = Require(raw, key);
  if (!value.is_string()) FieldError(raw, std::string(key) + " must be a string");
  return value.get<std::string>();
}

std::optional<std::string> OptionalString(const RawLine &raw, const char *key) {
  auto it = raw.object.find(key);
  if (it == raw.object.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) FieldError(raw, std::string(key) + " must be a string");
  return it->get<std::string>();
}

TokenSpan RequireSpan(const RawLine &raw, const char *key) {
  const json &value = Require(raw, key);
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
      !value[1].is_number_integer()) {
    FieldError(raw, std::string(key) + " must be [int, int]");
  }
  return {value[0].get<int>(), value[1].get<int>()};
}

std::vector<std::string> LabelNamesInOrder(const RawLine &raw) {
  std::vector<std::string> names;
  const json &bag = Require(raw, "bag_labels");
  if (!bag.is_array()) FieldError(raw, "bag_labels must be an array");
  for (const auto &label : bag) {
    if (!label.is_string()) FieldError(raw, "bag_labels must hold strings");
    names.push_back(label.get<std::string>());
  }
  for (const char *key : {"assigned_label", "gold_label", "effective_label"}) {
    if (auto name = OptionalString(raw, key)) names.push_back(*name);
  }
  return names;
}

Instance ParseInstance(const RawLine &raw, const LabelSpace &labels) {
  Instance instance;
  instance.id = RequireString(raw, "id");
  const json &tokens = Require(raw, "tokens");
  if (!tokens.is_array()) FieldError(raw, "tokens must be an array");
  instance.tokens.reserve(tokens.size());
  for (const auto &token : tokens) {
    if (!token.is_string()) FieldError(raw, "tokens must hold strings");
    instance.tokens.push_back(token.get<std::string>());
  }
  instance.head = RequireSpan(raw, "head_span");
  instance.tail = RequireSpan(raw, "tail_span");
  instance.head_type = RequireString(raw, "head_type");
  instance.tail_type = RequireString(raw, "tail_type");
  auto lookup = [&](const std::string &name) {
    auto id = labels.Find(name);
    if (!id) {
      Invalid(instance.id, "unknown label \"" + name + "\"");
    }
    return *id;
  };
  for (const auto &label : Require(raw, "bag_labels")) {
    instance.bag_labels.push_back(lookup(label.get<std::string>()));
  }
  if (auto name = OptionalString(raw, "assigned_label")) {
    instance.assigned_label = lookup(*name);
  }
  if (auto name = OptionalString(raw, "gold_label")) {
    instance.gold_label = lookup(*name);
  }
  auto noise = raw.object.find("is_noise");
  if (noise != raw.object.end() && !noise->is_null()) {
    if (!noise->is_boolean()) FieldError(raw, "is_noise must be a boolean");
    instance.is_noise = noise->get<bool>();
  }
  ValidateInstance(instance, labels);
  return instance;
}

std::optional<InstanceState> ParseState(const RawLine &raw,
                                        const Instance &instance,
                                        const LabelSpace &labels) {
  auto status_name = OptionalString(raw, "refine_status");
  if (!status_name) return std::nullopt;
  auto status = ParseStatus(*status_name);
  if (!status) FieldError(raw, "unknown refine_status \"" + *status_name + "\"");
  if (!instance.assigned_label) {
    Invalid(instance.id, "refine_status on an unassigned instance");
  }
  InstanceState state;
  state.status = *status;
  state.original_label = *instance.assigned_label;
  if (*status == Status::kKept) {
    state.effective_label = state.original_label;
  } else if (auto name = OptionalString(raw, "effective_label")) {
    state.effective_label = labels.Id(*name);
  }
  try {
    ValidateState(state);
  } catch (const Error &e) {
    Invalid(instance.id, e.what());
  }
  return state;
}

ordered_json InstanceToJson(const Instance &instance, const LabelSpace &labels,
                            const InstanceState *state) {
  ordered_json out;
  out["id"] = instance.id;
  out["tokens"] = instance.tokens;
  out["head_span"] = {instance.head.start, instance.head.end};
  out["tail_span"] = {instance.tail.start, instance.tail.end};
  out["head_type"] = instance.head_type;
  out["tail_type"] = instance.tail_type;
  ordered_json bag = ordered_json::array();
  for (LabelId label : instance.bag_labels) bag.push_back(labels.name(label));
  out["bag_labels"] = std::move(bag);
  if (instance.assigned_label) {
    out["assigned_label"] = labels.name(*instance.assigned_label);
  }
  if (instance.gold_label) out["gold_label"] = labels.name(*instance.gold_label);
  if (instance.is_noise) out["is_noise"] = *instance.is_noise;
  if (state && state->status != Status::kKept) {
    out["refine_status"] = StatusName(state->status);
    if (state->effective_label) {
      out["effective_label"] = labels.name(*state->effective_label);
    }
  }
  return out;
}

std::ofstream OpenForWrite(const std::filesystem::path &path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCategory::kIo, "cannot write " + path.string());
  }
  return out;
}

}  // namespace

Corpus ReadCorpus(const std::filesystem::path &path, const LoadOptions &options) {
  std::vector<RawLine> lines = ReadJsonLines(path);
  Corpus corpus;
  if (options.label_space) {
    corpus.labels = *options.label_space;
  } else {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    for (const auto &raw : lines) {
      for (auto &name : LabelNamesInOrder(raw)) {
        if (seen.insert(name).second) order.push_back(name);
      }
    }
    if (!seen.count(options.na_name)) order.push_back(options.na_name);
    if (order.size() < 2) {
      throw Error(ErrorCategory::kValidation,
                  path.string() + ": fewer than 2 distinct labels");
    }
    corpus.labels = LabelSpace(std::move(order), options.na_name);
  }
  std::unordered_set<std::string> ids;
  corpus.instances.reserve(lines.size());
  corpus.states.reserve(lines.size());
  for (const auto &raw : lines) {
    Instance instance = ParseInstance(raw, corpus.labels);
    if (!ids.insert(instance.id).second) Invalid(instance.id, "duplicate id");
    corpus.states.push_back(ParseState(raw, instance, corpus.labels));
    corpus.instances.push_back(std::move(instance));
  }
  return corpus;
}

RefinedDataset LoadDataset(const std::filesystem::path &path,
                           const LoadOptions &options) {
  Corpus corpus = ReadCorpus(path, options);
  std::vector<InstanceState> states;
  states.reserve(corpus.instances.size());
  for (size_t i = 0; i < corpus.instances.size(); ++i) {
    const Instance &instance = corpus.instances[i];
    if (!instance.assigned_label) {
      Invalid(instance.id, "unassigned instance (assign a bag label first)");
    }
    states.push_back(corpus.states[i].value_or(
        InstanceState::Kept(*instance.assigned_label)));
  }
  return RefinedDataset(std::move(corpus.labels), std::move(corpus.instances),
                        std::move(states));
}

void SaveDataset(const RefinedDataset &dataset,
                 const std::filesystem::path &path) {
  std::ofstream out = OpenForWrite(path);
  for (size_t i = 0; i < dataset.size(); ++i) {
    out << InstanceToJson(dataset.instance(i), dataset.label_space(),
                          &dataset.state(i))
               .dump()
        << '\n';
  }
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path.string());
}

void SaveInstances(std::span<const Instance> instances, const LabelSpace &labels,
                   const std::filesystem::path &path) {
  std::ofstream out = OpenForWrite(path);
  for (const auto &instance : instances) {
    out << InstanceToJson(instance, labels, nullptr).dump() << '\n';
  }
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path.string());
}

// Splitting -------------------------------------------------------------------

DatasetSplit SplitDataset(const RefinedDataset &dataset, SplitFractions fractions,
                          uint64_t seed) {
  if (!(fractions.train > 0.0) || !(fractions.dev > 0.0) ||
      fractions.train + fractions.dev > 1.0 + 1e-12) {
    throw Error(ErrorCategory::kContract,
                "split fractions must be positive and sum to at most 1");
  }
  const double rest_fraction =
      std::max(0.0, 1.0 - fractions.train - fractions.dev);
  std::map<LabelId, std::vector<size_t>> by_class;
  for (size_t i = 0; i < dataset.size(); ++i) {
    by_class[dataset.state(i).original_label].push_back(i);
  }
  std::vector<size_t> train, dev, rest;
  for (auto &[label, members] : by_class) {
    if (members.size() < 2) {
      spdlog::warn("class \"{}\" has {} instance(s); placing all in train",
                   dataset.label_space().name(label), members.size());
      train.insert(train.end(), members.begin(), members.end());
      continue;
    }
    Rng rng(DeriveSeed({seed, static_cast<uint64_t>(label)}));
    rng.Shuffle(std::span<size_t>(members));
    const double n = static_cast<double>(members.size());
    // The epsilon absorbs representation error such as 200 * 0.15.
    const auto n_dev = static_cast<size_t>(std::floor(n * fractions.dev + 1e-9));
    const auto n_rest = static_cast<size_t>(std::floor(n * rest_fraction + 1e-9));
    dev.insert(dev.end(), members.begin(), members.begin() + n_dev);
    rest.insert(rest.end(), members.begin() + n_dev,
                members.begin() + n_dev + n_rest);
    train.insert(train.end(), members.begin() + n_dev + n_rest, members.end());
  }
  for (auto *part : {&train, &dev, &rest}) std::sort(part->begin(), part->end());
  return {dataset.Select(train), dataset.Select(dev), dataset.Select(rest)};
}

}  // namespace sent
