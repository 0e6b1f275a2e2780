#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zslcraft/config.hpp"
#include "zslcraft/dataset.hpp"
#include "zslcraft/errors.hpp"
#include "zslcraft/extractor.hpp"
#include "zslcraft/metrics.hpp"
#include "zslcraft/model.hpp"
#include "zslcraft/rebalance.hpp"
#include "zslcraft/rule_set.hpp"

namespace zslcraft::pipeline {

/// Seed of a named stage, derive_seed(master, stage). Stage names:
/// "synth", "init/<kind>", "train/<kind>", "mixup/<kind>", "disc/<kind>".
std::uint64_t stage_seed(const RunConfig& config, std::string_view stage);

/// SynthConfig with the derived "synth" seed.
data::SynthConfig resolved_synth(const RunConfig& config);

/// {input, hidden..., feature} where feature = model.feature_dim or the embedding dimension.
std::vector<std::size_t> layer_dims(const RunConfig& config, std::size_t input_dim, std::size_t embedding_dim);

/// The untrained extractor of a crafting branch; crafting and training both start from it.
backbone::FeatureExtractor initial_extractor(const RunConfig& config, crafting::RuleKind kind, std::size_t input_dim,
                                             std::size_t embedding_dim);

/// Augmented rule pool (seen classes, then unseen) for one crafting branch.
/// Visual crafting reads seen training rows only.
crafting::RuleSet craft(const RunConfig& config, crafting::RuleKind kind, const data::ClassEmbeddingTable& embeddings,
                        data::DataServer& server);

/// Trains against the seen prefix of `pool` (or skips training when train.finetune is false).
backbone::CraftedModel train(const RunConfig& config, const crafting::RuleSet& pool, std::size_t embedding_dim,
                             data::DataServer& server, std::size_t threads = 1);

/// Discriminator input for one sample: its seen logits, or their softmax.
std::vector<double> discriminator_features(const RunConfig& config, std::span<const double> seen_logits);

/// Positives are seen training logits; negatives mix them with irrelevant logits.
rebalance::Discriminator fit_discriminator(const RunConfig& config, const backbone::CraftedModel& model,
                                           data::DataServer& server, const linalg::Matrix& irrelevant_features,
                                           std::size_t threads = 1);

/// One crafted model with its evaluation pool and (optional) discriminator.
struct Member {
  backbone::CraftedModel model;
  crafting::RuleSet pool;
  std::optional<rebalance::Discriminator> discriminator;
};

struct SamplePrediction {
  std::size_t index = 0;
  data::ClassId truth = 0;
  data::ClassId predicted = 0;
  double max_score = 0.0;
};

struct GammaPoint {
  double gamma = 0.0;
  metrics::GzslScores scores;
};

struct EvalResult {
  metrics::PredictionReport report;
  std::vector<SamplePrediction> zsl_predictions;   // unseen test rows, unseen-only pool
  std::vector<SamplePrediction> gzsl_predictions;  // all test rows, joint pool
  std::vector<GammaPoint> gamma_curve;
};

/// Algorithm-1 testing for one model or a two-member ensemble: T1 from the
/// unseen pool, S/U/H from the joint pool after the configured rebalancing.
EvalResult evaluate(const RunConfig& config, std::span<const Member> members, data::DataServer& server,
                    std::size_t threads = 1);

std::string render_report(const RunConfig& config, const EvalResult& result);

struct CommandOptions {
  std::optional<std::filesystem::path> out;
  bool force = false;
  std::size_t threads = 1;
};

struct CommandResult {
  std::vector<std::filesystem::path> outputs;
  std::set<std::size_t> served_rows;
  bool served_unseen = false;
};

CommandResult cmd_synth(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_craft(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_train(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_rebalance(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_eval(const RunConfig& config, const CommandOptions& options);

/// 2 config, 3 data, 4 numeric.
int exit_code(const Error& error) noexcept;

}  // namespace zslcraft::pipeline
