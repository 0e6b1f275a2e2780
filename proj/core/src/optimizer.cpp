#include "zslcraft/optimizer.hpp"

#include <cmath>
#include <string>

#include "zslcraft/errors.hpp"

namespace zslcraft::backbone {

std::string_view to_string(OptimizerKind kind) noexcept { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::kSgd;
  if (text == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(text) + "'");
}

void sgd_step(linalg::Matrix& param, const linalg::Matrix& grad, double lr) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) throw ShapeError("sgd_step parameter/gradient");
  auto p = param.data();
  const auto g = grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
}

void adam_step(linalg::Matrix& param, const linalg::Matrix& grad, AdamMoments& moments, std::uint64_t step,
               double lr, const AdamConfig& config) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) throw ShapeError("adam_step parameter/gradient");
  if (moments.first.size() != param.size()) {
    moments.first = linalg::Matrix(param.rows(), param.cols());
    moments.second = linalg::Matrix(param.rows(), param.cols());
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  auto p = param.data();
  auto m = moments.first.data();
  auto v = moments.second.data();
  const auto g = grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, AdamConfig adam)
    : kind_(kind), lr_(learning_rate), adam_(adam) {}

void Optimizer::step(std::vector<Layer>& params, const Gradients& grads) {
  if (params.size() != grads.size()) throw ShapeError("optimizer: gradient layer count");
  ++step_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      sgd_step(params[i].weights, grads[i].weights, lr_);
      sgd_step(params[i].bias, grads[i].bias, lr_);
    }
    return;
  }
  moments_.resize(2 * params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_step(params[i].weights, grads[i].weights, moments_[2 * i], step_, lr_, adam_);
    adam_step(params[i].bias, grads[i].bias, moments_[2 * i + 1], step_, lr_, adam_);
  }
}

}  // namespace zslcraft::backbone
