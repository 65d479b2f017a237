#include "sent/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sent/error.h"
#include "sent/losses.h"
#include "sent/rng.h"

namespace sent {
namespace {

using ordered_json = nlohmann::ordered_json;

double Activate(double a, Activation activation) {
  return activation == Activation::kTanh ? std::tanh(a) : std::max(0.0, a);
}

double ActivateDerivative(double a, Activation activation) {
  if (activation == Activation::kTanh) {
    const double t = std::tanh(a);
    return 1.0 - t * t;
  }
  return a > 0.0 ? 1.0 : 0.0;
}

}  // namespace

const char *ActivationName(Activation activation) {
  return activation == Activation::kTanh ? "tanh" : "relu";
}

std::optional<Activation> ParseActivation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  return std::nullopt;
}

const char *LossKindName(LossKind kind) {
  return kind == LossKind::kPositive ? "PT" : "NT";
}

ParamLayout ParamLayout::Make(int input_dim, int hidden_dim, int num_classes) {
  ParamLayout layout;
  layout.input_dim = input_dim;
  layout.hidden_dim = hidden_dim;
  layout.num_classes = num_classes;
  const size_t d = static_cast<size_t>(input_dim);
  const size_t c = static_cast<size_t>(num_classes);
  if (hidden_dim > 0) {
    const size_t h = static_cast<size_t>(hidden_dim);
    layout.w1 = 0;
    layout.b1 = d * h;
    layout.w2 = layout.b1 + h;
    layout.b2 = layout.w2 + h * c;
    layout.total = layout.b2 + c;
  } else {
    layout.w1 = 0;
    layout.b1 = d * c;
    layout.w2 = layout.b2 = layout.b1;
    layout.total = layout.b1 + c;
  }
  return layout;
}

Model::Model(LabelSpace labels, FeaturizerConfig featurizer,
             std::optional<HiddenSpec> hidden)
    : labels_(std::move(labels)),
      featurizer_(featurizer),
      hidden_(hidden) {
  featurizer_.Validate();
  if (hidden_ && hidden_->size <= 0) {
    throw Error(ErrorCategory::kConfig, "hidden size must be positive");
  }
  layout_ = ParamLayout::Make(featurizer_.input_dim(), hidden_ ? hidden_->size : 0,
                              labels_.size());
  params_.assign(layout_.total, 0.0);
}

Model Model::Zeros(const LabelSpace &labels, const FeaturizerConfig &featurizer,
                   std::optional<HiddenSpec> hidden) {
  return Model(labels, featurizer, hidden);
}

Model Model::Init(const LabelSpace &labels, const FeaturizerConfig &featurizer,
                  std::optional<HiddenSpec> hidden, uint64_t seed) {
  Model model(labels, featurizer, hidden);
  const ParamLayout &l = model.layout_;
  Rng rng(seed);
  auto fill = [&](size_t begin, size_t count, int fan_in, int fan_out) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (size_t i = 0; i < count; ++i) model.params_[begin + i] = rng.Symmetric(a);
  };
  const int first_out = l.first_layer_out();
  fill(l.w1, static_cast<size_t>(l.input_dim) * first_out, l.input_dim, first_out);
  if (l.has_hidden()) {
    fill(l.w2, static_cast<size_t>(l.hidden_dim) * l.num_classes, l.hidden_dim,
         l.num_classes);
  }
  return model;
}

Model Model::FromParams(const LabelSpace &labels,
                        const FeaturizerConfig &featurizer,
                        std::optional<HiddenSpec> hidden, ParamVector params) {
  Model model(labels, featurizer, hidden);
  if (params.size() != model.params_.size()) {
    throw Error(ErrorCategory::kValidation,
                "parameter count " + std::to_string(params.size()) +
                    " does not match the model shape (" +
                    std::to_string(model.params_.size()) + ")");
  }
  for (double v : params) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCategory::kValidation, "non-finite model parameter");
    }
  }
  model.params_ = std::move(params);
  return model;
}

bool Model::operator==(const Model &other) const {
  return labels_ == other.labels_ && featurizer_ == other.featurizer_ &&
         hidden_ == other.hidden_ && params_ == other.params_;
}

std::vector<double> Model::Logits(const SparseVector &x) const {
  return Logits(x, nullptr);
}

std::vector<double> Model::Logits(const SparseVector &x,
                                  std::vector<double> *hidden_pre) const {
  const ParamLayout &l = layout_;
  const int out = l.first_layer_out();
  std::vector<double> first(params_.begin() + l.b1, params_.begin() + l.b1 + out);
  for (const auto &[index, value] : x) {
    const double *row = params_.data() + l.w1 + static_cast<size_t>(index) * out;
    for (int j = 0; j < out; ++j) first[j] += value * row[j];
  }
  if (!l.has_hidden()) return first;

  const Activation act = hidden_->activation;
  std::vector<double> logits(params_.begin() + l.b2,
                             params_.begin() + l.b2 + l.num_classes);
  for (int h = 0; h < l.hidden_dim; ++h) {
    const double a = Activate(first[h], act);
    const double *row = params_.data() + l.w2 + static_cast<size_t>(h) * l.num_classes;
    for (int c = 0; c < l.num_classes; ++c) logits[c] += a * row[c];
  }
  if (hidden_pre) *hidden_pre = std::move(first);
  return logits;
}

ForwardResult Forward(const Model &model, const SparseVector &x,
                      std::string_view instance_id) {
  ForwardResult result;
  result.logits = model.Logits(x);
  try {
    result.probs = Softmax(result.logits);
  } catch (const Error &e) {
    throw Error(e.category(),
                std::string(e.what()) + ", instance id=" + std::string(instance_id));
  }
  return result;
}

ForwardResult Forward(const Model &model, const Instance &instance) {
  return Forward(model, Featurize(instance, model.featurizer()), instance.id);
}

Prediction Predict(const Model &model, const Instance &instance) {
  ForwardResult result = Forward(model, instance);
  Prediction prediction;
  prediction.label = Argmax(result.probs.view());
  prediction.probs = std::move(result.probs);
  return prediction;
}

double ComputeLossAndGradInto(const Model &model, std::span<const Example> batch,
                              LossKind kind, ParamVector &grad) {
  const ParamLayout &l = model.layout();
  grad.assign(l.total, 0.0);
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const auto params = model.params();
  const int c_count = l.num_classes;
  const int out = l.first_layer_out();

  double total = 0.0;
  std::vector<double> hidden_pre;
  std::vector<double> dz(c_count);
  std::vector<double> dfirst(out);
  for (const Example &ex : batch) {
    if (kind == LossKind::kNegative) {
      if (ex.complementary.empty()) {
        throw Error(ErrorCategory::kContract,
                    "NT example without complementary labels, instance id=" +
                        std::string(ex.id));
      }
      if (std::find(ex.complementary.begin(), ex.complementary.end(), ex.label) !=
          ex.complementary.end()) {
        throw Error(ErrorCategory::kContract,
                    "complementary set contains the assigned label, instance id=" +
                        std::string(ex.id));
      }
    }
    std::vector<double> logits = model.Logits(*ex.features, &hidden_pre);
    ProbVector p;
    try {
      p = Softmax(logits);
    } catch (const Error &e) {
      throw Error(e.category(),
                  std::string(e.what()) + ", instance id=" + std::string(ex.id));
    }
    std::fill(dz.begin(), dz.end(), 0.0);
    if (kind == LossKind::kPositive) {
      total += PtLoss(p.view(), ex.label);
      AddPtLogitGrad(p.view(), ex.label, scale, dz);
    } else {
      total += NtLoss(p.view(), ex.complementary, ex.label);
      AddNtLogitGrad(p.view(), ex.complementary, scale, dz);
    }

    if (!l.has_hidden()) {
      for (int c = 0; c < c_count; ++c) grad[l.b1 + c] += dz[c];
      for (const auto &[index, value] : *ex.features) {
        double *row = grad.data() + l.w1 + static_cast<size_t>(index) * c_count;
        for (int c = 0; c < c_count; ++c) row[c] += value * dz[c];
      }
      continue;
    }

    const Activation act = model.hidden()->activation;
    for (int c = 0; c < c_count; ++c) grad[l.b2 + c] += dz[c];
    for (int h = 0; h < l.hidden_dim; ++h) {
      const double a = Activate(hidden_pre[h], act);
      const double *w2 = params.data() + l.w2 + static_cast<size_t>(h) * c_count;
      double *g2 = grad.data() + l.w2 + static_cast<size_t>(h) * c_count;
      double back = 0.0;
      for (int c = 0; c < c_count; ++c) {
        g2[c] += a * dz[c];
        back += w2[c] * dz[c];
      }
      dfirst[h] = back * ActivateDerivative(hidden_pre[h], act);
      grad[l.b1 + h] += dfirst[h];
    }
    for (const auto &[index, value] : *ex.features) {
      double *row = grad.data() + l.w1 + static_cast<size_t>(index) * out;
      for (int h = 0; h < out; ++h) row[h] += value * dfirst[h];
    }
  }
  return total * scale;
}

LossAndGrad ComputeLossAndGrad(const Model &model, std::span<const Example> batch,
                               LossKind kind) {
  LossAndGrad result;
  result.loss = ComputeLossAndGradInto(model, batch, kind, result.grad);
  return result;
}

// Checkpoints -----------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'E', 'N', 'T', 'C', 'K', 'P', 'T'};

void PutU64(std::string &out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU32(std::string &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t GetLe(const std::string &buf, size_t &pos, int bytes,
               const std::filesystem::path &path) {
  if (pos + bytes > buf.size()) {
    throw Error(ErrorCategory::kParse, "truncated checkpoint " + path.string());
  }
  uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  pos += bytes;
  return v;
}

struct ArrayShape {
  std::string name;
  std::vector<size_t> shape;
  size_t offset;
  size_t count() const {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
  }
};

std::vector<ArrayShape> Arrays(const ParamLayout &l) {
  const size_t d = l.input_dim, c = l.num_classes;
  if (!l.has_hidden()) {
    return {{"weights", {d, c}, l.w1}, {"bias", {c}, l.b1}};
  }
  const size_t h = l.hidden_dim;
  return {{"hidden_weights", {d, h}, l.w1},
          {"hidden_bias", {h}, l.b1},
          {"weights", {h, c}, l.w2},
          {"bias", {c}, l.b2}};
}

}  // namespace

void SaveCheckpoint(const Model &model, const std::filesystem::path &path) {
  ordered_json header;
  header["format"] = "sent-checkpoint";
  header["version"] = kCheckpointVersion;
  header["labels"] = model.label_space().names();
  header["na_label"] = model.label_space().na_name();
  const FeaturizerConfig &f = model.featurizer();
  header["featurizer"] = {{"hash_dim", f.hash_dim},
                          {"window", f.window},
                          {"use_entity_types", f.use_entity_types},
                          {"use_position_buckets", f.use_position_buckets},
                          {"length_normalize", f.length_normalize}};
  if (model.hidden()) {
    header["hidden"] = {{"size", model.hidden()->size},
                        {"activation", ActivationName(model.hidden()->activation)}};
  } else {
    header["hidden"] = nullptr;
  }
  ordered_json arrays = ordered_json::array();
  for (const auto &array : Arrays(model.layout())) {
    arrays.push_back({{"name", array.name}, {"shape", array.shape},
                      {"dtype", "float64-le"}});
  }
  header["arrays"] = std::move(arrays);

  const std::string text = header.dump();
  std::string buf(kMagic, sizeof(kMagic));
  PutU32(buf, kCheckpointVersion);
  PutU64(buf, text.size());
  buf += text;
  const auto params = model.params();
  buf.reserve(buf.size() + params.size() * 8);
  for (const auto &array : Arrays(model.layout())) {
    for (size_t i = 0; i < array.count(); ++i) {
      PutU64(buf, std::bit_cast<uint64_t>(params[array.offset + i]));
    }
  }

  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw Error(ErrorCategory::kIo, "cannot write checkpoint " + path.string());
  }
}

Model LoadCheckpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::kIo, "cannot open checkpoint " + path.string());
  }
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCategory::kParse, "not a checkpoint: " + path.string());
  }
  size_t pos = sizeof(kMagic);
  const auto version = static_cast<uint32_t>(GetLe(buf, pos, 4, path));
  if (version != kCheckpointVersion) {
    throw Error(ErrorCategory::kParse,
                "unsupported checkpoint version " + std::to_string(version));
  }
  const uint64_t header_len = GetLe(buf, pos, 8, path);
  if (pos + header_len > buf.size()) {
    throw Error(ErrorCategory::kParse, "truncated checkpoint " + path.string());
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(buf.substr(pos, header_len));
    pos += header_len;
    LabelSpace labels(header.at("labels").get<std::vector<std::string>>(),
                      header.at("na_label").get<std::string>());
    const auto &f = header.at("featurizer");
    FeaturizerConfig featurizer;
    featurizer.hash_dim = f.at("hash_dim").get<int>();
    featurizer.window = f.at("window").get<int>();
    featurizer.use_entity_types = f.at("use_entity_types").get<bool>();
    featurizer.use_position_buckets = f.at("use_position_buckets").get<bool>();
    featurizer.length_normalize = f.at("length_normalize").get<bool>();
    std::optional<HiddenSpec> hidden;
    if (!header.at("hidden").is_null()) {
      HiddenSpec spec;
      spec.size = header["hidden"].at("size").get<int>();
      auto act = ParseActivation(header["hidden"].at("activation").get<std::string>());
      if (!act) throw Error(ErrorCategory::kParse, "unknown activation");
      spec.activation = *act;
      hidden = spec;
    }
    Model shape = Model::Zeros(labels, featurizer, hidden);
    ParamVector params(shape.layout().total);
    for (const auto &array : Arrays(shape.layout())) {
      for (size_t i = 0; i < array.count(); ++i) {
        params[array.offset + i] = std::bit_cast<double>(GetLe(buf, pos, 8, path));
      }
    }
    if (pos != buf.size()) {
      throw Error(ErrorCategory::kParse, "trailing bytes in checkpoint");
    }
    return Model::FromParams(labels, featurizer, hidden, std::move(params));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCategory::kParse,
                "bad checkpoint header in " + path.string() + ": " + e.what());
  }
}

}  // namespace sent
