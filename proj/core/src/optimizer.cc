#include "sent/optimizer.h"

#include <cmath>

#include "sent/error.h"

namespace sent {

const char *OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

std::optional<OptimizerKind> ParseOptimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  return std::nullopt;
}

void OptimizerSpec::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCategory::kConfig, "learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(epsilon > 0.0)) {
    throw Error(ErrorCategory::kConfig, "invalid Adam hyperparameters");
  }
}

OptimizerState::OptimizerState(const OptimizerSpec &spec, size_t num_params)
    : spec_(spec) {
  spec_.Validate();
  if (spec_.kind == OptimizerKind::kAdam) {
    m_.assign(num_params, 0.0);
    v_.assign(num_params, 0.0);
  }
}

void OptimizerState::Apply(Model &model, std::span<const double> grad) {
  std::span<double> theta = model.mutable_params();
  if (grad.size() != theta.size() ||
      (spec_.kind == OptimizerKind::kAdam && m_.size() != theta.size())) {
    throw Error(ErrorCategory::kContract, "gradient shape does not match model");
  }
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error(ErrorCategory::kNumerical,
                  "non-finite gradient at parameter " + std::to_string(i) +
                      " (step " + std::to_string(step_ + 1) + ")");
    }
  }
  ++step_;
  const double lr = spec_.learning_rate;
  if (spec_.kind == OptimizerKind::kSgd) {
    for (size_t i = 0; i < grad.size(); ++i) theta[i] -= lr * grad[i];
    return;
  }
  const double b1 = spec_.beta1, b2 = spec_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + spec_.epsilon);
  }
}

}  // namespace sent
