#pragma once

#include <cstddef>
#include <cstdint>

#include "zslcraft/dataset.hpp"
#include "zslcraft/matrix.hpp"

namespace zslcraft::data {

struct SynthConfig {
  std::size_t n_seen = 15;
  std::size_t n_unseen = 5;
  std::size_t q = 16;  // attribute dimension
  std::size_t d = 32;  // feature dimension
  std::size_t samples_per_class = 100;
  double noise_stddev = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct SynthResult {
  ZslDataset dataset;
  ClassEmbeddingTable embeddings;
};

/// Attribute-grounded benchmark.
///
/// Each class gets a distinct binary attribute vector a (Bernoulli(0.5) bits).
/// Samples are x = G2 * tanh(G1 * a) + noise, with G1 (2q x q) and G2 (d x 2q)
/// Gaussian with stddev 1/sqrt(fan_in) and shared by all classes. The first
/// n_seen classes are seen; 80% of each seen class goes to train, everything
/// else to test. The class embeddings are the attribute vectors themselves.
SynthResult synth_zsl(const SynthConfig& config);

struct IrrelevantSet {
  linalg::Matrix features;
  linalg::Matrix attributes;
};

/// Unlabeled samples through the same generator, from attribute vectors that
/// match no class of the paired synth_zsl(config) dataset.
IrrelevantSet synth_irrelevant(const SynthConfig& config, std::size_t n_samples);

}  // namespace zslcraft::data
