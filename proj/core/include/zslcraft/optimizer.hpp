#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "zslcraft/extractor.hpp"
#include "zslcraft/matrix.hpp"

namespace zslcraft::backbone {

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view text);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// param -= lr * grad
void sgd_step(linalg::Matrix& param, const linalg::Matrix& grad, double lr);

struct AdamMoments {
  linalg::Matrix first;
  linalg::Matrix second;
};

/// Bias-corrected Adam update; `step` is the 1-based step count after increment.
void adam_step(linalg::Matrix& param, const linalg::Matrix& grad, AdamMoments& moments, std::uint64_t step,
               double lr, const AdamConfig& config);

/// Applies one optimizer step to every weight and bias of an extractor.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, AdamConfig adam = {});

  void step(std::vector<Layer>& params, const Gradients& grads);
  std::uint64_t steps_taken() const noexcept { return step_; }

 private:
  OptimizerKind kind_;
  double lr_;
  AdamConfig adam_;
  std::uint64_t step_ = 0;
  std::vector<AdamMoments> moments_;
};

}  // namespace zslcraft::backbone
