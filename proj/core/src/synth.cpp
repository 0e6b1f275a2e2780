#include "zslcraft/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "zslcraft/errors.hpp"
#include "zslcraft/rng.hpp"

namespace zslcraft::data {
namespace {

constexpr int kMaxRejections = 1000;

using Bits = std::vector<double>;

struct Generator {
  linalg::Matrix g1;  // h x q
  linalg::Matrix g2;  // d x h
};

Generator make_generator(const SynthConfig& config, linalg::SeededRng rng) {
  const std::size_t h = 2 * config.q;
  Generator g;
  g.g1 = linalg::rand_normal(rng, h, config.q, 0.0, 1.0 / std::sqrt(static_cast<double>(config.q)));
  g.g2 = linalg::rand_normal(rng, config.d, h, 0.0, 1.0 / std::sqrt(static_cast<double>(h)));
  return g;
}

Bits draw_bits(linalg::SeededRng& rng, std::size_t q) {
  Bits a(q);
  for (double& v : a) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return a;
}

/// Draws a bit vector outside `taken` (and not all-zero), rejecting at most kMaxRejections times.
Bits draw_distinct(linalg::SeededRng& rng, std::size_t q, const std::set<Bits>& taken) {
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    Bits a = draw_bits(rng, q);
    if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) continue;
    if (!taken.contains(a)) return a;
  }
  throw ConfigError("could not draw a distinct attribute vector after " + std::to_string(kMaxRejections) +
                    " attempts; increase q");
}

std::vector<Bits> class_attributes(const SynthConfig& config, linalg::SeededRng rng) {
  std::set<Bits> taken;
  std::vector<Bits> out;
  for (std::size_t c = 0; c < config.n_seen + config.n_unseen; ++c) {
    out.push_back(draw_distinct(rng, config.q, taken));
    taken.insert(out.back());
  }
  return out;
}

/// Noise-free generator output G2 * tanh(G1 * a).
std::vector<double> clean_feature(const Generator& g, const Bits& a) {
  std::vector<double> hidden(g.g1.rows());
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::tanh(linalg::dot(g.g1.row(i), a));
  std::vector<double> x(g.g2.rows());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = linalg::dot(g.g2.row(i), hidden);
  return x;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_seen < 1 || n_unseen < 1 || q < 1 || d < 1 || samples_per_class < 1) {
    throw ConfigError("synth: all counts must be >= 1");
  }
  if (!(noise_stddev >= 0.0) || !std::isfinite(noise_stddev)) throw ConfigError("synth: noise_stddev must be >= 0");
}

SynthResult synth_zsl(const SynthConfig& config) {
  config.validate();
  const linalg::SeededRng root(config.seed);
  const auto attrs = class_attributes(config, root.split("attributes"));
  const Generator gen = make_generator(config, root.split("generator"));
  linalg::SeededRng noise = root.split("noise");
  linalg::SeededRng splitter = root.split("split");

  const std::size_t n_classes = config.n_seen + config.n_unseen;
  const std::size_t per = config.samples_per_class;
  const std::size_t n = n_classes * per;

  linalg::Matrix features(n, config.d);
  std::vector<ClassId> labels(n);
  SplitSets split;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto id = static_cast<ClassId>(c);
    (c < config.n_seen ? split.seen : split.unseen).push_back(id);
    const auto center = clean_feature(gen, attrs[c]);
    for (std::size_t s = 0; s < per; ++s) {
      const std::size_t row = c * per + s;
      labels[row] = id;
      auto out = features.row(row);
      for (std::size_t j = 0; j < config.d; ++j) out[j] = center[j] + config.noise_stddev * noise.normal();
    }
    if (c < config.n_seen) {
      const auto order = linalg::permutation(splitter, per);
      const std::size_t n_train = std::max<std::size_t>(1, per * 4 / 5);
      for (std::size_t k = 0; k < per; ++k) (k < n_train ? split.train : split.test).push_back(c * per + order[k]);
    } else {
      for (std::size_t s = 0; s < per; ++s) split.test.push_back(c * per + s);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());

  SynthResult result;
  result.dataset = make_dataset(std::move(features), std::move(labels), split);

  std::vector<double> emb;
  emb.reserve(n_classes * config.q);
  for (const auto& a : attrs) emb.insert(emb.end(), a.begin(), a.end());
  result.embeddings.embeddings = linalg::Matrix(n_classes, config.q, std::move(emb));
  result.embeddings.class_ids = result.dataset.class_ids();
  result.embeddings.validate();
  return result;
}

IrrelevantSet synth_irrelevant(const SynthConfig& config, std::size_t n_samples) {
  config.validate();
  const linalg::SeededRng root(config.seed);
  const auto attrs = class_attributes(config, root.split("attributes"));
  const Generator gen = make_generator(config, root.split("generator"));
  linalg::SeededRng picker = root.split("irrelevant");
  linalg::SeededRng noise = root.split("irrelevant-noise");

  const std::set<Bits> taken(attrs.begin(), attrs.end());
  IrrelevantSet out{linalg::Matrix(n_samples, config.d), linalg::Matrix(n_samples, config.q)};
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Bits a = draw_distinct(picker, config.q, taken);
    std::copy(a.begin(), a.end(), out.attributes.row(i).begin());
    const auto center = clean_feature(gen, a);
    auto row = out.features.row(i);
    for (std::size_t j = 0; j < config.d; ++j) row[j] = center[j] + config.noise_stddev * noise.normal();
  }
  return out;
}

}  // namespace zslcraft::data
