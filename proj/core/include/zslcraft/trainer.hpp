#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zslcraft/dataset.hpp"
#include "zslcraft/extractor.hpp"
#include "zslcraft/optimizer.hpp"
#include "zslcraft/rule_set.hpp"

namespace zslcraft::backbone {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamConfig adam;
  double tau = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct LossAndGrad {
  double loss = 0.0;
  Gradients grads;
};

/// Mean cross-entropy of softmax(f(x) . r_j / tau) against the labels, with
/// gradients for the extractor parameters only; the rules are constants.
///
/// The batch is cut into fixed blocks of samples whose partial sums are reduced
/// in block order, so the result is bit-identical for any thread count.
LossAndGrad crafted_loss_and_grad(const FeatureExtractor& extractor, const crafting::RuleSet& rules,
                                  const linalg::Matrix& batch, std::span<const data::ClassId> labels,
                                  double tau, std::size_t threads = 1);

/// Loss only (no backward pass), same definition as crafted_loss_and_grad.
double crafted_loss(const FeatureExtractor& extractor, const crafting::RuleSet& rules, const linalg::Matrix& batch,
                    std::span<const data::ClassId> labels, double tau);

struct TrainResult {
  FeatureExtractor extractor;
  std::vector<double> epoch_losses;
};

/// Fine-tunes the extractor against frozen seen rules on seen training rows.
/// Throws TrainingDivergedError when a loss goes non-finite.
TrainResult train_crafted(const FeatureExtractor& extractor, const crafting::RuleSet& rules,
                          const data::LabeledRows& train, const TrainConfig& config);

/// Same, drawing the training rows of `dataset`; every rule class must be seen.
TrainResult train_crafted(const FeatureExtractor& extractor, const crafting::RuleSet& rules,
                          const data::ZslDataset& dataset, const TrainConfig& config);

}  // namespace zslcraft::backbone
