#ifndef SENT_MODEL_H_
#define SENT_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sent/dataset.h"
#include "sent/featurizer.h"
#include "sent/prob_vector.h"

namespace sent {

enum class Activation { kTanh, kRelu };

const char *ActivationName(Activation activation);
std::optional<Activation> ParseActivation(std::string_view name);

struct HiddenSpec {
  int size = 0;
  Activation activation = Activation::kTanh;

  bool operator==(const HiddenSpec &) const = default;
};

// Offsets into the flat parameter vector. Input weights are stored
// feature-major (one contiguous row of `out` weights per input feature) so a
// sparse input touches contiguous memory.
struct ParamLayout {
  int input_dim = 0;
  int hidden_dim = 0;  // 0 for the linear model
  int num_classes = 0;
  size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;

  static ParamLayout Make(int input_dim, int hidden_dim, int num_classes);
  bool has_hidden() const { return hidden_dim > 0; }
  int first_layer_out() const { return has_hidden() ? hidden_dim : num_classes; }
};

using ParamVector = std::vector<double>;

// Featurized softmax classifier: logits = W x + b, or with one hidden layer
// logits = W2 act(W1 x + b1) + b2.
class Model {
 public:
  Model() = default;

  // Xavier-uniform weights, zero biases. Same seed gives identical params.
  static Model Init(const LabelSpace &labels, const FeaturizerConfig &featurizer,
                    std::optional<HiddenSpec> hidden, uint64_t seed);

  // All parameters zero.
  static Model Zeros(const LabelSpace &labels,
                     const FeaturizerConfig &featurizer,
                     std::optional<HiddenSpec> hidden = std::nullopt);

  // Builds a model from explicit parameters; throws kValidation on a size
  // mismatch or non-finite values.
  static Model FromParams(const LabelSpace &labels,
                          const FeaturizerConfig &featurizer,
                          std::optional<HiddenSpec> hidden, ParamVector params);

  const LabelSpace &label_space() const { return labels_; }
  const FeaturizerConfig &featurizer() const { return featurizer_; }
  const std::optional<HiddenSpec> &hidden() const { return hidden_; }
  const ParamLayout &layout() const { return layout_; }
  int num_classes() const { return labels_.size(); }

  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }

  std::vector<double> Logits(const SparseVector &x) const;

  // Writes hidden pre-activations (if any) for backprop.
  std::vector<double> Logits(const SparseVector &x,
                             std::vector<double> *hidden_pre) const;

  bool operator==(const Model &other) const;

 private:
  Model(LabelSpace labels, FeaturizerConfig featurizer,
        std::optional<HiddenSpec> hidden);

  LabelSpace labels_;
  FeaturizerConfig featurizer_;
  std::optional<HiddenSpec> hidden_;
  ParamLayout layout_;
  ParamVector params_;
};

struct ForwardResult {
  std::vector<double> logits;
  ProbVector probs;
};

// Throws kNumerical naming the instance id on non-finite logits.
ForwardResult Forward(const Model &model, const Instance &instance);
ForwardResult Forward(const Model &model, const SparseVector &x,
                      std::string_view instance_id = {});

struct Prediction {
  LabelId label = 0;
  ProbVector probs;
};

// Argmax label, ties to the lowest id.
Prediction Predict(const Model &model, const Instance &instance);

enum class LossKind { kPositive, kNegative };

const char *LossKindName(LossKind kind);

// One training example. PT uses `label`; NT uses `complementary`, which must
// not contain `label`.
struct Example {
  const SparseVector *features = nullptr;
  LabelId label = 0;
  std::span<const LabelId> complementary;
  std::string_view id;
};

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Batch-mean loss and its analytic gradient with respect to every parameter.
LossAndGrad ComputeLossAndGrad(const Model &model,
                               std::span<const Example> batch, LossKind kind);

// As above, but accumulates into a caller-owned gradient buffer (resized and
// zeroed here) and returns the loss.
double ComputeLossAndGradInto(const Model &model,
                              std::span<const Example> batch, LossKind kind,
                              ParamVector &grad);

// Checkpoint: magic "SENTCKPT", u32 format version, u64 header length, JSON
// header (labels, featurizer, hidden spec, array shapes), then the parameter
// arrays as raw little-endian IEEE-754 doubles.
inline constexpr uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const Model &model, const std::filesystem::path &path);
Model LoadCheckpoint(const std::filesystem::path &path);

}  // namespace sent

#endif  // SENT_MODEL_H_
