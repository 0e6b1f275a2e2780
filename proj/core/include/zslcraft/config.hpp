#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zslcraft/rule_set.hpp"
#include "zslcraft/synth.hpp"
#include "zslcraft/trainer.hpp"

namespace zslcraft::pipeline {

enum class EvalMode { kZsl, kGzsl };
enum class RebalanceMode { kNone, kLearned, kOracle, kCalibrate };
enum class RebalanceOrder { kPerBranch, kAfterAverage };
enum class DiscriminatorInput { kLogits, kProbabilities };

struct GammaSweep {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  std::vector<double> values() const;
  friend bool operator==(const GammaSweep&, const GammaSweep&) = default;
};

struct Paths {
  std::filesystem::path features = "features.zslc";
  std::filesystem::path embeddings = "embeddings.zslc";
  std::filesystem::path split = "split.zslc";
  std::filesystem::path irrelevant = "irrelevant.zslc";
  std::filesystem::path rules = "rules.zslc";
  std::filesystem::path model = "model.zslc";
  std::filesystem::path discriminator = "disc.zslc";
  std::filesystem::path rules2 = "rules2.zslc";
  std::filesystem::path model2 = "model2.zslc";
  std::filesystem::path discriminator2 = "disc2.zslc";
  std::filesystem::path report = "report.txt";

  friend bool operator==(const Paths&, const Paths&) = default;
};

/// Every tunable of the pipeline. Stage seeds are derived from `seed`, so the
/// per-module seed fields inside `synth` and `train` are ignored here.
struct RunConfig {
  std::uint64_t seed = 1;

  data::SynthConfig synth;
  std::size_t n_irrelevant = 500;

  std::vector<std::size_t> hidden{64};
  std::size_t feature_dim = 0;  // 0: use the class-embedding dimension

  crafting::RuleKind craft_mode = crafting::RuleKind::kSemantic;
  double lambda = 1e-2;
  bool lambda_cv = false;
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  bool normalize = false;

  backbone::TrainConfig train;
  bool finetune = true;

  double mixup_alpha = 0.4;
  std::size_t n_negatives = 0;  // 0: one negative per positive
  std::size_t disc_epochs = 2000;
  double disc_learning_rate = 0.1;
  DiscriminatorInput disc_input = DiscriminatorInput::kLogits;

  EvalMode eval_mode = EvalMode::kGzsl;
  RebalanceMode rebalance = RebalanceMode::kLearned;
  double gamma = 0.0;
  std::optional<GammaSweep> gamma_sweep;
  double eval_tau = 1.0;
  bool ensemble = false;
  RebalanceOrder rebalance_order = RebalanceOrder::kPerBranch;

  Paths paths;

  /// Re-checks every module-level invariant; throws ConfigError.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Canonical (key, value) listing in a fixed order; doubles use shortest round-trip form.
std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config);

/// Applies one `key = value`; unknown keys and malformed values throw ConfigError.
void set_key(RunConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines with `#` comments. A report file (first line
/// `ZSLC-REPORT v1`) is accepted too: its [config] section is read.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies `key=value` overrides in order, then validates.
RunConfig apply_overrides(RunConfig config, const std::vector<std::string>& overrides);

std::string render_config(const RunConfig& config);

std::string_view to_string(EvalMode m) noexcept;
std::string_view to_string(RebalanceMode m) noexcept;
std::string_view to_string(RebalanceOrder o) noexcept;
std::string_view to_string(DiscriminatorInput d) noexcept;

}  // namespace zslcraft::pipeline
