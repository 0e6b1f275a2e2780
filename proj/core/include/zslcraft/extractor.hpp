#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zslcraft/matrix.hpp"
#include "zslcraft/rng.hpp"

namespace zslcraft::backbone {

/// One fully connected tanh layer: out = tanh(in * weights + bias).
struct Layer {
  linalg::Matrix weights;  // fan_in x fan_out
  linalg::Matrix bias;     // 1 x fan_out

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Multi-layer perceptron producing the feature representation matched against the rules.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  explicit FeatureExtractor(std::vector<Layer> layers);

  /// Gaussian weights with stddev 1/sqrt(fan_in), zero biases.
  static FeatureExtractor initialize(std::span<const std::size_t> layer_dims, linalg::SeededRng& rng);

  std::vector<std::size_t> layer_dims() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_parameters() const;

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& mutable_layers() noexcept { return layers_; }

  /// Row i of the result is f(batch row i).
  linalg::Matrix forward(const linalg::Matrix& batch) const;

  std::uint64_t fingerprint() const;

  friend bool operator==(const FeatureExtractor&, const FeatureExtractor&) = default;

 private:
  std::vector<Layer> layers_;
};

/// Gradients with the same layout as FeatureExtractor::layers().
using Gradients = std::vector<Layer>;

}  // namespace zslcraft::backbone
