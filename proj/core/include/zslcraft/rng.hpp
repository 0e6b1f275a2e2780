#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "zslcraft/matrix.hpp"

namespace zslcraft::linalg {

/// Counter-based generator: output i is splitmix64(seed + (i+1) * 0x9E3779B97F4A7C15).
///
/// The stream is a pure function of (seed, counter), so it is identical on every
/// platform and child streams can be derived without touching the parent.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (no cached spare).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  /// Beta(a, b) as a ratio of gammas.
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

  /// Independent stream keyed by a name; does not advance this generator.
  SeededRng split(std::string_view name) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stage seed derivation: mixes a 64-bit FNV-1a hash of the name into the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) noexcept;

Matrix rand_normal(SeededRng& rng, std::size_t rows, std::size_t cols, double mean, double stddev);

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> permutation(SeededRng& rng, std::size_t n);

}  // namespace zslcraft::linalg
