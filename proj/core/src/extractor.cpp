#include "zslcraft/extractor.hpp"

#include <cmath>
#include <string>

#include "zslcraft/errors.hpp"

namespace zslcraft::backbone {

FeatureExtractor::FeatureExtractor(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ValidationError("feature extractor needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weights.cols()) {
      throw ShapeError("layer " + std::to_string(i) + " bias does not match its fan_out");
    }
    if (i > 0 && layers_[i - 1].weights.cols() != l.weights.rows()) {
      throw ShapeError("layer " + std::to_string(i) + " fan_in does not chain with the previous layer");
    }
  }
}

FeatureExtractor FeatureExtractor::initialize(std::span<const std::size_t> layer_dims, linalg::SeededRng& rng) {
  if (layer_dims.size() < 2) throw ConfigError("an extractor needs at least input and output dimensions");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const std::size_t fan_in = layer_dims[i];
    const std::size_t fan_out = layer_dims[i + 1];
    if (fan_in == 0 || fan_out == 0) throw ConfigError("layer dimensions must be >= 1");
    layers.push_back(Layer{linalg::rand_normal(rng, fan_in, fan_out, 0.0, 1.0 / std::sqrt(static_cast<double>(fan_in))),
                           linalg::Matrix(1, fan_out)});
  }
  return FeatureExtractor(std::move(layers));
}

std::vector<std::size_t> FeatureExtractor::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers_.empty()) return dims;
  dims.push_back(layers_.front().weights.rows());
  for (const Layer& l : layers_) dims.push_back(l.weights.cols());
  return dims;
}

std::size_t FeatureExtractor::input_dim() const { return layers_.empty() ? 0 : layers_.front().weights.rows(); }
std::size_t FeatureExtractor::output_dim() const { return layers_.empty() ? 0 : layers_.back().weights.cols(); }

std::size_t FeatureExtractor::num_parameters() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

linalg::Matrix FeatureExtractor::forward(const linalg::Matrix& batch) const {
  if (batch.cols() != input_dim()) {
    throw ShapeError("extractor expects " + std::to_string(input_dim()) + " input columns, got " +
                     std::to_string(batch.cols()));
  }
  linalg::Matrix act = batch;
  for (const Layer& l : layers_) {
    linalg::Matrix z = linalg::matmul(act, l.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::tanh(row[j] + l.bias(0, j));
    }
    act = std::move(z);
  }
  return act;
}

std::uint64_t FeatureExtractor::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Layer& l : layers_) {
    h = linalg::fingerprint(l.weights, h);
    h = linalg::fingerprint(l.bias, h);
  }
  return h;
}

}  // namespace zslcraft::backbone
