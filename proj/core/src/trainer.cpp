#include "zslcraft/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zslcraft/errors.hpp"
#include "zslcraft/parallel.hpp"
#include "zslcraft/rng.hpp"

namespace zslcraft::backbone {
namespace {

// Reduction granularity. Fixed so that the summation order does not depend on threads.
constexpr std::size_t kBlockRows = 32;

struct BlockResult {
  double loss_sum = 0.0;
  Gradients grad_sum;
};

Gradients zeros_like(const FeatureExtractor& extractor) {
  Gradients g;
  for (const Layer& l : extractor.layers()) {
    g.push_back(Layer{linalg::Matrix(l.weights.rows(), l.weights.cols()), linalg::Matrix(1, l.bias.cols())});
  }
  return g;
}

void accumulate(Gradients& into, const Gradients& from) {
  for (std::size_t i = 0; i < into.size(); ++i) {
    auto w = into[i].weights.data();
    const auto fw = from[i].weights.data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += fw[k];
    auto b = into[i].bias.data();
    const auto fb = from[i].bias.data();
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += fb[k];
  }
}

std::vector<std::size_t> label_positions(const crafting::RuleSet& rules, std::span<const data::ClassId> labels) {
  std::vector<std::size_t> pos(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) pos[i] = rules.index_of(labels[i]);
  return pos;
}

/// Forward (and optionally backward) pass over rows [begin, end); sums, not means.
BlockResult block_pass(const FeatureExtractor& extractor, const linalg::Matrix& rules, const linalg::Matrix& batch,
                       std::span<const std::size_t> targets, std::size_t begin, std::size_t end, double tau,
                       bool want_grad) {
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;

  const auto& layers = extractor.layers();
  std::vector<linalg::Matrix> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(linalg::gather_rows(batch, rows));
  for (const Layer& l : layers) {
    linalg::Matrix z = linalg::matmul(acts.back(), l.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::tanh(row[j] + l.bias(0, j));
    }
    acts.push_back(std::move(z));
  }

  const linalg::Matrix& features = acts.back();
  linalg::Matrix dlogits = linalg::matmul_transposed(features, rules);  // becomes d(loss_sum)/d(logit)
  BlockResult result;
  for (std::size_t r = 0; r < dlogits.rows(); ++r) {
    auto row = dlogits.row(r);
    for (double& v : row) v /= tau;
    const double mx = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (double v : row) denom += std::exp(v - mx);
    const double lse = mx + std::log(denom);
    const std::size_t y = targets[begin + r];
    result.loss_sum += lse - row[y];
    for (double& v : row) v = std::exp(v - lse);
    row[y] -= 1.0;
    for (double& v : row) v /= tau;
  }
  if (!want_grad) return result;

  result.grad_sum = zeros_like(extractor);
  linalg::Matrix upstream = linalg::matmul(dlogits, rules);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const linalg::Matrix& out = acts[li + 1];
    for (std::size_t k = 0; k < upstream.size(); ++k) {
      const double a = out.data()[k];
      upstream.data()[k] *= 1.0 - a * a;
    }
    result.grad_sum[li].weights = linalg::transposed_matmul(acts[li], upstream);
    auto bias = result.grad_sum[li].bias.row(0);
    for (std::size_t r = 0; r < upstream.rows(); ++r) {
      const auto row = upstream.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) bias[j] += row[j];
    }
    if (li > 0) upstream = linalg::matmul_transposed(upstream, layers[li].weights);
  }
  return result;
}

void check_inputs(const FeatureExtractor& extractor, const crafting::RuleSet& rules, const linalg::Matrix& batch,
                  std::span<const data::ClassId> labels, double tau) {
  if (!(tau > 0.0)) throw ValidationError("temperature must be > 0");
  if (rules.dim() != extractor.output_dim()) {
    throw ShapeError("rule dimension " + std::to_string(rules.dim()) + " != feature dimension " +
                     std::to_string(extractor.output_dim()));
  }
  if (batch.rows() != labels.size()) throw ShapeError("batch rows and labels differ in length");
  if (batch.rows() == 0) throw ValidationError("empty batch");
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train.learning_rate must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("train.tau must be > 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

LossAndGrad crafted_loss_and_grad(const FeatureExtractor& extractor, const crafting::RuleSet& rules,
                                  const linalg::Matrix& batch, std::span<const data::ClassId> labels, double tau,
                                  std::size_t threads) {
  check_inputs(extractor, rules, batch, labels, tau);
  const auto targets = label_positions(rules, labels);
  const std::size_t n = batch.rows();
  const std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<BlockResult> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    partial[b] = block_pass(extractor, rules.rules(), batch, targets, b * kBlockRows,
                            std::min(n, (b + 1) * kBlockRows), tau, true);
  });

  LossAndGrad out;
  out.grads = zeros_like(extractor);
  for (const BlockResult& p : partial) {
    out.loss += p.loss_sum;
    accumulate(out.grads, p.grad_sum);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  for (Layer& l : out.grads) {
    for (double& v : l.weights.data()) v *= inv_n;
    for (double& v : l.bias.data()) v *= inv_n;
  }
  return out;
}

double crafted_loss(const FeatureExtractor& extractor, const crafting::RuleSet& rules, const linalg::Matrix& batch,
                    std::span<const data::ClassId> labels, double tau) {
  check_inputs(extractor, rules, batch, labels, tau);
  const auto targets = label_positions(rules, labels);
  const std::size_t n = batch.rows();
  double total = 0.0;
  for (std::size_t begin = 0; begin < n; begin += kBlockRows) {
    total += block_pass(extractor, rules.rules(), batch, targets, begin, std::min(n, begin + kBlockRows), tau, false)
                 .loss_sum;
  }
  return total / static_cast<double>(n);
}

TrainResult train_crafted(const FeatureExtractor& extractor, const crafting::RuleSet& rules,
                          const data::LabeledRows& train, const TrainConfig& config) {
  config.validate();
  if (train.features.rows() == 0) throw ValidationError("no training rows");
  // Surface label/shape problems before the loop so they are not reported as divergence.
  check_inputs(extractor, rules, train.features, train.labels, config.tau);
  label_positions(rules, train.labels);

  TrainResult result{extractor, {}};
  Optimizer optimizer(config.optimizer, config.learning_rate, config.adam);
  linalg::SeededRng shuffler(linalg::derive_seed(config.seed, "shuffle"));
  const std::size_t n = train.features.rows();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = linalg::permutation(shuffler, n);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const linalg::Matrix batch = linalg::gather_rows(train.features, idx);
      std::vector<data::ClassId> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train.labels[idx[i]];
      try {
        const LossAndGrad lg =
            crafted_loss_and_grad(result.extractor, rules, batch, labels, config.tau, config.threads);
        if (!std::isfinite(lg.loss)) throw TrainingDivergedError(epoch, "crafted training");
        optimizer.step(result.extractor.mutable_layers(), lg.grads);
        epoch_loss += lg.loss * static_cast<double>(idx.size());
      } catch (const TrainingDivergedError&) {
        throw;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kNumeric) throw;
        throw TrainingDivergedError(epoch, "crafted training");
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) throw TrainingDivergedError(epoch, "crafted training");
    result.epoch_losses.push_back(epoch_loss);
  }
  return result;
}

TrainResult train_crafted(const FeatureExtractor& extractor, const crafting::RuleSet& rules,
                          const data::ZslDataset& dataset, const TrainConfig& config) {
  for (data::ClassId c : rules.class_ids()) {
    if (!dataset.is_seen(c)) {
      throw ValidationError("training rules must cover seen classes only; class " + std::to_string(c) +
                            " is not seen");
    }
  }
  data::DataServer server(dataset);
  return train_crafted(extractor, rules, server.train_rows(), config);
}

}  // namespace zslcraft::backbone
