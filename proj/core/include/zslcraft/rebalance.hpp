#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "zslcraft/matrix.hpp"

namespace zslcraft::rebalance {

/// Logistic regressor over the seen-logit subvector; p_D = sigmoid(w . x + b).
struct Discriminator {
  std::vector<double> weight;
  double bias = 0.0;

  std::size_t dim() const noexcept { return weight.size(); }
  friend bool operator==(const Discriminator&, const Discriminator&) = default;
};

struct MixupConfig {
  double alpha = 0.4;
  std::size_t n_negatives = 1;
  std::uint64_t seed = 0;
  /// Overrides the Beta draw with a constant mixing weight (endpoints, tests).
  std::optional<double> fixed_lambda;

  void validate() const;
};

struct NegativeLogits {
  linalg::Matrix logits;
  std::vector<double> lambdas;  // weight on the seen row, one per output row
};

/// Each row is lambda * (random seen row) + (1 - lambda) * (random irrelevant row)
/// with a fresh lambda ~ Beta(alpha, alpha).
NegativeLogits synth_negative_logits(const linalg::Matrix& seen_logits, const linalg::Matrix& irrelevant_logits,
                                     const MixupConfig& config);

struct DiscriminatorConfig {
  std::size_t epochs = 2000;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

/// Full-batch gradient descent on the mean binary cross-entropy, starting from zeros.
/// Positives are labeled 1 (seen), negatives 0.
Discriminator train_discriminator(const linalg::Matrix& positives, const linalg::Matrix& negatives,
                                  const DiscriminatorConfig& config);

/// Mean binary cross-entropy of a discriminator on labeled data.
double discriminator_loss(const Discriminator& disc, const linalg::Matrix& positives, const linalg::Matrix& negatives);

double p_seen(const Discriminator& disc, std::span<const double> seen_logits);

/// p_D * p_j on seen classes and (1 - p_D) * p_j on unseen ones. Not renormalized.
std::vector<double> rebalance_scores(std::span<const double> scores, const std::vector<bool>& seen_mask, double p_d);

/// Seen entries minus gamma; unseen entries untouched.
std::vector<double> calibrate_stack(std::span<const double> values, const std::vector<bool>& seen_mask, double gamma);

/// Ground-truth selector: 1 for seen instances, 0 otherwise. Evaluation only.
double oracle_p(bool is_seen_truth) noexcept;

/// `ZSLC-DISC v1 <dim>`, then the weight row, then the bias, all hex floats.
void write_discriminator(std::ostream& out, const Discriminator& disc);
Discriminator read_discriminator(std::istream& in);
void save_discriminator(const std::filesystem::path& path, const Discriminator& disc);
Discriminator load_discriminator(const std::filesystem::path& path);

}  // namespace zslcraft::rebalance
