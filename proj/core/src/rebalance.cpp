#include "zslcraft/rebalance.hpp"

#include <cmath>
#include <string>

#include "zslcraft/errors.hpp"
#include "zslcraft/formats.hpp"
#include "zslcraft/rng.hpp"

namespace zslcraft::rebalance {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_mask(std::size_t n, const std::vector<bool>& seen_mask) {
  if (seen_mask.size() != n) throw ShapeError("seen mask length does not match the score vector");
}

}  // namespace

void MixupConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("mixup.alpha must be > 0");
  if (n_negatives < 1) throw ConfigError("mixup.n_negatives must be >= 1");
  if (fixed_lambda && !(*fixed_lambda >= 0.0 && *fixed_lambda <= 1.0)) {
    throw ConfigError("fixed mixup lambda must lie in [0, 1]");
  }
}

NegativeLogits synth_negative_logits(const linalg::Matrix& seen_logits, const linalg::Matrix& irrelevant_logits,
                                     const MixupConfig& config) {
  config.validate();
  if (seen_logits.rows() == 0 || irrelevant_logits.rows() == 0) throw ValidationError("mixup: empty input pool");
  if (seen_logits.cols() != irrelevant_logits.cols()) {
    throw ShapeError("mixup: seen logits have " + std::to_string(seen_logits.cols()) +
                     " columns, irrelevant logits " + std::to_string(irrelevant_logits.cols()));
  }
  linalg::SeededRng rng(config.seed);
  NegativeLogits out{linalg::Matrix(config.n_negatives, seen_logits.cols()), {}};
  out.lambdas.reserve(config.n_negatives);
  for (std::size_t r = 0; r < config.n_negatives; ++r) {
    const auto i = static_cast<std::size_t>(rng.below(seen_logits.rows()));
    const auto j = static_cast<std::size_t>(rng.below(irrelevant_logits.rows()));
    const double lambda = config.fixed_lambda ? *config.fixed_lambda : rng.beta(config.alpha, config.alpha);
    const auto a = seen_logits.row(i);
    const auto b = irrelevant_logits.row(j);
    auto row = out.logits.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = lambda * a[k] + (1.0 - lambda) * b[k];
    out.lambdas.push_back(lambda);
  }
  return out;
}

double p_seen(const Discriminator& disc, std::span<const double> seen_logits) {
  if (seen_logits.size() != disc.dim()) {
    throw ShapeError("discriminator expects " + std::to_string(disc.dim()) + " inputs, got " +
                     std::to_string(seen_logits.size()));
  }
  return sigmoid(linalg::dot(disc.weight, seen_logits) + disc.bias);
}

double discriminator_loss(const Discriminator& disc, const linalg::Matrix& positives, const linalg::Matrix& negatives) {
  double total = 0.0;
  for (std::size_t r = 0; r < positives.rows(); ++r) total += softplus(-(linalg::dot(disc.weight, positives.row(r)) + disc.bias));
  for (std::size_t r = 0; r < negatives.rows(); ++r) total += softplus(linalg::dot(disc.weight, negatives.row(r)) + disc.bias);
  return total / static_cast<double>(positives.rows() + negatives.rows());
}

Discriminator train_discriminator(const linalg::Matrix& positives, const linalg::Matrix& negatives,
                                  const DiscriminatorConfig& config) {
  if (positives.rows() == 0 || negatives.rows() == 0) throw ValidationError("discriminator needs both classes");
  if (positives.cols() != negatives.cols()) throw ShapeError("discriminator positives/negatives dimension");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("discriminator learning rate must be >= 0");
  }
  const std::size_t dim = positives.cols();
  const double inv_n = 1.0 / static_cast<double>(positives.rows() + negatives.rows());
  Discriminator disc{std::vector<double>(dim, 0.0), 0.0};
  std::vector<double> grad_w(dim);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    auto accumulate = [&](const linalg::Matrix& x, double target) {
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        const double err = sigmoid(linalg::dot(disc.weight, row) + disc.bias) - target;
        for (std::size_t k = 0; k < dim; ++k) grad_w[k] += err * row[k];
        grad_b += err;
      }
    };
    accumulate(positives, 1.0);
    accumulate(negatives, 0.0);
    for (std::size_t k = 0; k < dim; ++k) disc.weight[k] -= config.learning_rate * grad_w[k] * inv_n;
    disc.bias -= config.learning_rate * grad_b * inv_n;

    bool finite = std::isfinite(disc.bias);
    for (double w : disc.weight) finite = finite && std::isfinite(w);
    if (!finite) throw TrainingDivergedError(epoch, "discriminator training");
  }
  if (!std::isfinite(discriminator_loss(disc, positives, negatives))) {
    throw TrainingDivergedError(config.epochs, "discriminator training");
  }
  return disc;
}

std::vector<double> rebalance_scores(std::span<const double> scores, const std::vector<bool>& seen_mask, double p_d) {
  if (!(p_d >= 0.0 && p_d <= 1.0)) throw ValidationError("p_D must lie in [0, 1]");
  check_mask(scores.size(), seen_mask);
  std::vector<double> out(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) out[j] = (seen_mask[j] ? p_d : 1.0 - p_d) * scores[j];
  return out;
}

std::vector<double> calibrate_stack(std::span<const double> values, const std::vector<bool>& seen_mask, double gamma) {
  check_mask(values.size(), seen_mask);
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t j = 0; j < out.size(); ++j)
    if (seen_mask[j]) out[j] -= gamma;
  return out;
}

double oracle_p(bool is_seen_truth) noexcept { return is_seen_truth ? 1.0 : 0.0; }

void write_discriminator(std::ostream& out, const Discriminator& disc) {
  out << "ZSLC-DISC v1 " << disc.dim() << '\n';
  io::write_hex_row(out, disc.weight);
  out << '\n' << io::format_hex(disc.bias) << '\n';
}

Discriminator read_discriminator(std::istream& in) {
  io::LineReader reader(in);
  const auto header = reader.tokens("discriminator header");
  if (header.size() != 3 || header[0] != "ZSLC-DISC" || header[1] != "v1") {
    throw ParseError(reader.line(), "expected header 'ZSLC-DISC v1 <dim>'");
  }
  const std::size_t dim = io::parse_count(header[2], reader.line());
  Discriminator disc;
  disc.weight = io::parse_hex_row(reader.tokens("weight row"), 0, dim, reader.line());
  const auto bias = io::parse_hex_row(reader.tokens("bias"), 0, 1, reader.line());
  disc.bias = bias[0];
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after discriminator");
  return disc;
}

void save_discriminator(const std::filesystem::path& path, const Discriminator& disc) {
  auto out = io::open_output(path);
  write_discriminator(out, disc);
}

Discriminator load_discriminator(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_discriminator(in);
}

}  // namespace zslcraft::rebalance
