#include "sent/refine.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sent/error.h"
#include "sent/metrics.h"

namespace sent {

void RefineConfig::Validate() const {
  if (!(th > 0.0 && th < 1.0)) {
    throw Error(ErrorCategory::kConfig, "th must lie in (0, 1)");
  }
  if (!(th_relabel > 0.0 && th_relabel < 1.0)) {
    throw Error(ErrorCategory::kConfig, "th_relabel must lie in (0, 1)");
  }
}

ProbTable PredictAll(const Model &model, const RefinedDataset &dataset,
                     int threads) {
  ProbTable table(dataset.size());
  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      table[i] = Forward(model, dataset.instance(i)).probs.values;
    }
  };
  const size_t n = dataset.size();
  const size_t workers =
      std::clamp<size_t>(threads > 0 ? static_cast<size_t>(threads) : 1, 1,
                         std::max<size_t>(1, n / 64));
  if (workers <= 1) {
    work(0, n);
    return table;
  }
  // Rows are independent, so chunking cannot change the result.
  std::vector<std::thread> pool;
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t begin = w * chunk;
    const size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto &t : pool) t.join();
  return table;
}

namespace {

const std::vector<double> &Row(const ProbTable &probs, size_t i,
                               const RefinedDataset &dataset) {
  if (i >= probs.size() || probs[i].empty()) {
    throw Error(ErrorCategory::kContract,
                "missing probability row, instance id=" + dataset.instance(i).id);
  }
  if (static_cast<int>(probs[i].size()) != dataset.label_space().size()) {
    throw Error(ErrorCategory::kContract,
                "probability row has the wrong width, instance id=" +
                    dataset.instance(i).id);
  }
  return probs[i];
}

}  // namespace

std::vector<double> ClassMaxProbs(const RefinedDataset &dataset,
                                  const ProbTable &probs) {
  std::vector<double> p_h(dataset.label_space().size(), 0.0);
  for (size_t i = 0; i < dataset.size(); ++i) {
    const InstanceState &state = dataset.state(i);
    if (state.status != Status::kKept) continue;
    const LabelId c = *state.effective_label;
    p_h[c] = std::max(p_h[c], Row(probs, i, dataset)[c]);
  }
  return p_h;
}

std::vector<double> ClassMaxProbs(const Model &model,
                                  const RefinedDataset &dataset) {
  return ClassMaxProbs(dataset, PredictAll(model, dataset));
}

ClassThresholds ComputeThresholds(std::span<const double> p_h, double th) {
  ClassThresholds out;
  out.p_h.assign(p_h.begin(), p_h.end());
  out.th_c.resize(p_h.size());
  for (size_t c = 0; c < p_h.size(); ++c) out.th_c[c] = th * p_h[c];
  return out;
}

RefinedDataset FilterNoise(const RefinedDataset &dataset, const ProbTable &probs,
                           const ClassThresholds &thresholds) {
  std::vector<InstanceState> states(dataset.states().begin(),
                                    dataset.states().end());
  for (size_t i = 0; i < states.size(); ++i) {
    InstanceState &state = states[i];
    if (state.status == Status::kFiltered) continue;
    const LabelId c = *state.effective_label;
    if (Row(probs, i, dataset)[c] < thresholds.th_c[c]) {
      state = InstanceState::Filtered(state.original_label);
    }
  }
  return dataset.WithStates(std::move(states));
}

RefinedDataset Relabel(const RefinedDataset &dataset, const ProbTable &probs,
                       double th_relabel) {
  std::vector<InstanceState> states(dataset.states().begin(),
                                    dataset.states().end());
  for (size_t i = 0; i < states.size(); ++i) {
    InstanceState &state = states[i];
    if (state.status != Status::kFiltered) continue;
    const auto &row = Row(probs, i, dataset);
    const LabelId best = Argmax(row);
    if (row[best] > th_relabel) {
      state = InstanceState::Relabeled(state.original_label, best);
    }
  }
  return dataset.WithStates(std::move(states));
}

nlohmann::ordered_json RefineReport::ToJson() const {
  auto optional = [](const std::optional<double> &v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json out;
  out["iteration"] = iteration;
  out["kept"] = kept;
  out["filtered"] = filtered;
  out["relabeled"] = relabeled;
  out["thresholds"] = thresholds;
  out["p_h"] = p_h;
  out["noise_precision"] = optional(noise_precision);
  out["noise_recall"] = optional(noise_recall);
  out["relabel_precision"] = optional(relabel_precision);
  out["relabel_recall"] = optional(relabel_recall);
  out["newly_filtered"] = newly_filtered;
  out["newly_relabeled"] = newly_relabeled;
  out["relabeled_to_original"] = relabeled_to_original;
  return out;
}

RefineReport RefineReport::FromJson(const nlohmann::json &json) {
  auto optional = [&](const char *key) -> std::optional<double> {
    if (!json.contains(key) || json[key].is_null()) return std::nullopt;
    return json[key].get<double>();
  };
  RefineReport r;
  r.iteration = json.at("iteration").get<int>();
  r.kept = json.at("kept").get<int64_t>();
  r.filtered = json.at("filtered").get<int64_t>();
  r.relabeled = json.at("relabeled").get<int64_t>();
  r.thresholds = json.at("thresholds").get<std::vector<double>>();
  r.p_h = json.at("p_h").get<std::vector<double>>();
  r.noise_precision = optional("noise_precision");
  r.noise_recall = optional("noise_recall");
  r.relabel_precision = optional("relabel_precision");
  r.relabel_recall = optional("relabel_recall");
  r.newly_filtered = json.value("newly_filtered", int64_t{0});
  r.newly_relabeled = json.value("newly_relabeled", int64_t{0});
  r.relabeled_to_original = json.value("relabeled_to_original", int64_t{0});
  return r;
}

RefineResult RefineDataset(const RefinedDataset &dataset, const ProbTable &probs,
                           const RefineConfig &config, int iteration) {
  config.Validate();
  const ClassThresholds thresholds =
      ComputeThresholds(ClassMaxProbs(dataset, probs), config.th);
  RefinedDataset out = FilterNoise(dataset, probs, thresholds);
  if (config.relabel) out = Relabel(out, probs, config.th_relabel);

  RefineReport report;
  report.iteration = iteration;
  report.thresholds = thresholds.th_c;
  report.p_h = thresholds.p_h;
  bool has_noise_truth = true;
  bool has_gold = true;
  for (size_t i = 0; i < out.size(); ++i) {
    const InstanceState &before = dataset.state(i);
    const InstanceState &after = out.state(i);
    switch (after.status) {
      case Status::kKept: ++report.kept; break;
      case Status::kFiltered: ++report.filtered; break;
      case Status::kRelabeled:
        ++report.relabeled;
        report.relabeled_to_original += after.effective_label == after.original_label;
        break;
    }
    if (after.status == Status::kFiltered && before.status != Status::kFiltered) {
      ++report.newly_filtered;
    }
    if (after.status == Status::kRelabeled &&
        !(before.status == Status::kRelabeled &&
          before.effective_label == after.effective_label)) {
      ++report.newly_relabeled;
    }
    has_noise_truth = has_noise_truth && NoiseTruth(out.instance(i)).has_value();
    has_gold = has_gold && out.instance(i).gold_label.has_value();
  }
  if (!out.empty() && has_noise_truth) {
    const Prf noise = NoiseDetectionPrf1(out);
    report.noise_precision = noise.precision;
    report.noise_recall = noise.recall;
  }
  if (!out.empty() && has_gold) {
    const Prf relabel = RelabelQuality(out);
    report.relabel_precision = relabel.precision;
    report.relabel_recall = relabel.recall;
  }
  return {std::move(out), std::move(report)};
}

RefineResult RefineDataset(const RefinedDataset &dataset, const Model &model,
                           const RefineConfig &config, int iteration, int threads) {
  return RefineDataset(dataset, PredictAll(model, dataset, threads), config,
                       iteration);
}

}  // namespace sent
