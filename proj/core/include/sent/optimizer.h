#ifndef SENT_OPTIMIZER_H_
#define SENT_OPTIMIZER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sent/model.h"

namespace sent {

enum class OptimizerKind { kSgd, kAdam };

const char *OptimizerName(OptimizerKind kind);
std::optional<OptimizerKind> ParseOptimizer(std::string_view name);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
  bool operator==(const OptimizerSpec &) const = default;
};

// Single-owner optimizer state. Adam moments are shaped like the model
// parameters.
class OptimizerState {
 public:
  OptimizerState(const OptimizerSpec &spec, size_t num_params);

  const OptimizerSpec &spec() const { return spec_; }
  uint64_t step_count() const { return step_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

  // SGD: theta -= lr * g. Adam: bias-corrected update. Throws kNumerical on
  // a non-finite gradient entry before touching any parameter.
  void Apply(Model &model, std::span<const double> grad);

 private:
  OptimizerSpec spec_;
  uint64_t step_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace sent

#endif  // SENT_OPTIMIZER_H_
