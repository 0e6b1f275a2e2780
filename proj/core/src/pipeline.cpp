#include "zslcraft/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "zslcraft/crafting.hpp"
#include "zslcraft/formats.hpp"
#include "zslcraft/inference.hpp"
#include "zslcraft/rng.hpp"
#include "zslcraft/synth.hpp"
#include "zslcraft/trainer.hpp"

namespace zslcraft::pipeline {
namespace {

std::string branch(crafting::RuleKind kind) { return std::string(crafting::to_string(kind)); }

void check_pool_layout(const crafting::RuleSet& pool, const data::ZslDataset& dataset) {
  if (pool.class_ids() != dataset.class_ids()) {
    throw ConsistencyError("rule pool classes must be the dataset's seen classes followed by its unseen classes");
  }
}

void guard_output(const std::filesystem::path& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw ConfigError("refusing to overwrite '" + path.string() + "' (pass --force)");
  }
}

std::vector<bool> seen_mask_for(const crafting::RuleSet& pool, std::size_t n_seen) {
  std::vector<bool> mask(pool.size(), false);
  for (std::size_t j = 0; j < n_seen; ++j) mask[j] = true;
  return mask;
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

struct BranchScores {
  linalg::Matrix logits;  // samples x pool
  linalg::Matrix probs;   // softmax over the joint pool
};

/// Applies the configured rebalancing to one score vector.
std::vector<double> rebalanced(const RunConfig& config, RebalanceMode mode, double gamma, std::span<const double> probs,
                               const std::vector<bool>& mask, double p_d) {
  switch (mode) {
    case RebalanceMode::kNone: return {probs.begin(), probs.end()};
    case RebalanceMode::kCalibrate: return rebalance::calibrate_stack(probs, mask, gamma);
    case RebalanceMode::kLearned:
    case RebalanceMode::kOracle: return rebalance::rebalance_scores(probs, mask, p_d);
  }
  (void)config;
  return {probs.begin(), probs.end()};
}

struct JointOutcome {
  std::vector<data::ClassId> predictions;
  std::vector<double> max_scores;
};

/// Joint-pool decisions for a group of rows under one rebalancing mode.
JointOutcome joint_predictions(const RunConfig& config, std::span<const Member> members,
                               const std::vector<BranchScores>& branch, const data::LabeledRows& rows,
                               const data::ZslDataset& dataset, RebalanceMode mode, double gamma) {
  const crafting::RuleSet& pool = members.front().pool;
  const std::size_t n_seen = members.front().model.seen_rules.size();
  const auto mask = seen_mask_for(pool, n_seen);
  JointOutcome out;
  for (std::size_t r = 0; r < rows.labels.size(); ++r) {
    std::vector<double> p_d(members.size(), 0.5);
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (mode == RebalanceMode::kOracle) {
        p_d[m] = rebalance::oracle_p(dataset.is_seen(rows.labels[r]));
      } else if (mode == RebalanceMode::kLearned) {
        const auto logits = branch[m].logits.row(r);
        p_d[m] = rebalance::p_seen(*members[m].discriminator,
                                   discriminator_features(config, logits.subspan(0, n_seen)));
      }
    }
    std::vector<double> final_scores;
    if (config.rebalance_order == RebalanceOrder::kPerBranch) {
      for (std::size_t m = 0; m < members.size(); ++m) {
        auto s = rebalanced(config, mode, gamma, branch[m].probs.row(r), mask, p_d[m]);
        final_scores = m == 0 ? s : inference::ensemble_scores(final_scores, s);
      }
    } else {
      std::vector<double> avg(branch[0].probs.row(r).begin(), branch[0].probs.row(r).end());
      for (std::size_t m = 1; m < members.size(); ++m) avg = inference::ensemble_scores(avg, branch[m].probs.row(r));
      const double mean_pd = std::accumulate(p_d.begin(), p_d.end(), 0.0) / static_cast<double>(p_d.size());
      final_scores = rebalanced(config, mode, gamma, avg, mask, mean_pd);
    }
    out.predictions.push_back(pool.class_ids()[inference::predict(final_scores)]);
    out.max_scores.push_back(max_of(final_scores));
  }
  return out;
}

BranchScores score_branch(const RunConfig& config, const Member& member, const linalg::Matrix& x, std::size_t threads) {
  BranchScores s;
  s.logits = inference::zsl_logits(member.model, x, member.pool, threads);
  s.probs = inference::softmax_rows(s.logits, config.eval_tau);
  return s;
}

}  // namespace

std::uint64_t stage_seed(const RunConfig& config, std::string_view stage) {
  return linalg::derive_seed(config.seed, stage);
}

data::SynthConfig resolved_synth(const RunConfig& config) {
  data::SynthConfig s = config.synth;
  s.seed = stage_seed(config, "synth");
  return s;
}

std::vector<std::size_t> layer_dims(const RunConfig& config, std::size_t input_dim, std::size_t embedding_dim) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.feature_dim == 0 ? embedding_dim : config.feature_dim);
  return dims;
}

backbone::FeatureExtractor initial_extractor(const RunConfig& config, crafting::RuleKind kind, std::size_t input_dim,
                                             std::size_t embedding_dim) {
  linalg::SeededRng rng(stage_seed(config, "init/" + branch(kind)));
  const auto dims = layer_dims(config, input_dim, embedding_dim);
  return backbone::FeatureExtractor::initialize(dims, rng);
}

crafting::RuleSet craft(const RunConfig& config, crafting::RuleKind kind, const data::ClassEmbeddingTable& embeddings,
                        data::DataServer& server) {
  const data::ZslDataset& ds = server.dataset();
  const auto ids = ds.class_ids();
  if (kind == crafting::RuleKind::kSemantic) {
    if (config.feature_dim != 0 && config.feature_dim != embeddings.dim()) {
      throw ConfigError("semantic crafting needs model.feature_dim equal to the embedding dimension");
    }
    return crafting::semantic_rules(embeddings, ids, config.normalize);
  }
  const auto extractor = initial_extractor(config, kind, ds.dim(), embeddings.dim());
  const data::LabeledRows train_rows = server.train_rows();
  const linalg::Matrix features = extractor.forward(train_rows.features);
  const linalg::Matrix seen = crafting::seen_prototypes(features, train_rows.labels, ds.seen_classes);
  const linalg::Matrix seen_emb = embeddings.select(ds.seen_classes);
  double lambda = config.lambda;
  if (config.lambda_cv) {
    lambda = crafting::select_lambda_cv(seen_emb, seen, config.lambda_grid,
                                        std::min<std::size_t>(5, ds.seen_classes.size()));
  }
  const linalg::Matrix projection = crafting::fit_projection(seen_emb, seen, lambda);
  const linalg::Matrix unseen = crafting::unseen_prototypes(projection, embeddings.select(ds.unseen_classes));
  return crafting::visual_rules(seen, unseen, ids, config.normalize);
}

backbone::CraftedModel train(const RunConfig& config, const crafting::RuleSet& pool, std::size_t embedding_dim,
                             data::DataServer& server, std::size_t threads) {
  const data::ZslDataset& ds = server.dataset();
  check_pool_layout(pool, ds);
  const crafting::RuleSet seen_rules = pool.prefix(ds.seen_classes.size());
  const auto kind = pool.kind();
  backbone::FeatureExtractor extractor = initial_extractor(config, kind, ds.dim(), embedding_dim);
  if (extractor.output_dim() != pool.dim()) {
    throw ConsistencyError("rule dimension " + std::to_string(pool.dim()) + " does not match the configured feature size " +
                           std::to_string(extractor.output_dim()));
  }
  if (config.finetune) {
    backbone::TrainConfig tc = config.train;
    tc.seed = stage_seed(config, "train/" + branch(kind));
    tc.threads = threads;
    extractor = backbone::train_crafted(extractor, seen_rules, server.train_rows(), tc).extractor;
  }
  return backbone::CraftedModel{std::move(extractor), seen_rules, config.train.tau};
}

std::vector<double> discriminator_features(const RunConfig& config, std::span<const double> seen_logits) {
  if (config.disc_input == DiscriminatorInput::kProbabilities) {
    return inference::softmax_temp(seen_logits, config.eval_tau);
  }
  return {seen_logits.begin(), seen_logits.end()};
}

rebalance::Discriminator fit_discriminator(const RunConfig& config, const backbone::CraftedModel& model,
                                           data::DataServer& server, const linalg::Matrix& irrelevant_features,
                                           std::size_t threads) {
  const auto kind = branch(model.seen_rules.kind());
  const data::LabeledRows train_rows = server.train_rows();
  const linalg::Matrix seen_logits = inference::zsl_logits(model, train_rows.features, model.seen_rules, threads);
  const linalg::Matrix irrelevant_logits = inference::zsl_logits(model, irrelevant_features, model.seen_rules, threads);

  rebalance::MixupConfig mixup;
  mixup.alpha = config.mixup_alpha;
  mixup.n_negatives = config.n_negatives == 0 ? seen_logits.rows() : config.n_negatives;
  mixup.seed = stage_seed(config, "mixup/" + kind);
  const linalg::Matrix negatives = rebalance::synth_negative_logits(seen_logits, irrelevant_logits, mixup).logits;

  auto to_inputs = [&config](const linalg::Matrix& logits) {
    linalg::Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      const auto f = discriminator_features(config, logits.row(r));
      std::copy(f.begin(), f.end(), out.row(r).begin());
    }
    return out;
  };
  rebalance::DiscriminatorConfig dc;
  dc.epochs = config.disc_epochs;
  dc.learning_rate = config.disc_learning_rate;
  dc.seed = stage_seed(config, "disc/" + kind);
  return rebalance::train_discriminator(to_inputs(seen_logits), to_inputs(negatives), dc);
}

EvalResult evaluate(const RunConfig& config, std::span<const Member> members, data::DataServer& server,
                    std::size_t threads) {
  if (members.empty() || members.size() > 2) throw ConfigError("evaluation takes one model or a two-model ensemble");
  const data::ZslDataset& ds = server.dataset();
  for (const Member& m : members) {
    check_pool_layout(m.pool, ds);
    if (m.model.seen_rules.size() != ds.seen_classes.size()) {
      throw ConsistencyError("model was trained on a different number of seen classes");
    }
    if (config.rebalance == RebalanceMode::kLearned) {
      if (!m.discriminator) throw ConfigError("eval.rebalance = learned needs a discriminator per model");
      if (m.discriminator->dim() != ds.seen_classes.size()) {
        throw ConsistencyError("discriminator input size does not match the seen classes");
      }
    }
  }
  if (members.size() == 2 && members[0].pool.class_ids() != members[1].pool.class_ids()) {
    throw ConsistencyError("ensemble members use different class orderings");
  }

  const data::LabeledRows seen_rows = server.seen_test_rows();
  const data::LabeledRows unseen_rows = server.unseen_test_rows();
  const std::size_t n_seen = ds.seen_classes.size();
  const std::size_t n_pool = members.front().pool.size();

  std::vector<BranchScores> seen_scores;
  std::vector<BranchScores> unseen_scores;
  for (const Member& m : members) {
    seen_scores.push_back(score_branch(config, m, seen_rows.features, threads));
    unseen_scores.push_back(score_branch(config, m, unseen_rows.features, threads));
  }

  EvalResult result;

  // Standard ZSL: unseen rows against the unseen block of the pool only.
  std::vector<data::ClassId> zsl_pred;
  for (std::size_t r = 0; r < unseen_rows.labels.size(); ++r) {
    std::vector<double> avg;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto logits = unseen_scores[m].logits.row(r).subspan(n_seen, n_pool - n_seen);
      const auto p = inference::softmax_temp(logits, config.eval_tau);
      avg = m == 0 ? p : inference::ensemble_scores(avg, p);
    }
    const auto best = inference::predict(avg);
    const data::ClassId predicted = ds.unseen_classes[best];
    zsl_pred.push_back(predicted);
    result.zsl_predictions.push_back({unseen_rows.indices[r], unseen_rows.labels[r], predicted, avg[best]});
  }
  result.report.t1 = metrics::zsl_t1(zsl_pred, unseen_rows.labels, ds.unseen_classes);

  // Generalized ZSL over the joint pool.
  const auto seen_out = joint_predictions(config, members, seen_scores, seen_rows, ds, config.rebalance, config.gamma);
  const auto unseen_out =
      joint_predictions(config, members, unseen_scores, unseen_rows, ds, config.rebalance, config.gamma);
  const auto g = metrics::gzsl_h(seen_out.predictions, seen_rows.labels, ds.seen_classes, unseen_out.predictions,
                                 unseen_rows.labels, ds.unseen_classes);
  result.report.s = g.s;
  result.report.u = g.u;
  result.report.h = g.h;

  std::vector<data::ClassId> all_pred = seen_out.predictions;
  all_pred.insert(all_pred.end(), unseen_out.predictions.begin(), unseen_out.predictions.end());
  std::vector<data::ClassId> all_truth = seen_rows.labels;
  all_truth.insert(all_truth.end(), unseen_rows.labels.begin(), unseen_rows.labels.end());
  result.report.per_class_accuracy = metrics::per_class_accuracy(all_pred, all_truth, ds.class_ids());

  for (std::size_t r = 0; r < seen_rows.labels.size(); ++r) {
    result.gzsl_predictions.push_back(
        {seen_rows.indices[r], seen_rows.labels[r], seen_out.predictions[r], seen_out.max_scores[r]});
  }
  for (std::size_t r = 0; r < unseen_rows.labels.size(); ++r) {
    result.gzsl_predictions.push_back(
        {unseen_rows.indices[r], unseen_rows.labels[r], unseen_out.predictions[r], unseen_out.max_scores[r]});
  }
  std::sort(result.gzsl_predictions.begin(), result.gzsl_predictions.end(),
            [](const SamplePrediction& a, const SamplePrediction& b) { return a.index < b.index; });

  if (config.gamma_sweep) {
    for (double gamma : config.gamma_sweep->values()) {
      const auto s = joint_predictions(config, members, seen_scores, seen_rows, ds, RebalanceMode::kCalibrate, gamma);
      const auto u = joint_predictions(config, members, unseen_scores, unseen_rows, ds, RebalanceMode::kCalibrate, gamma);
      result.gamma_curve.push_back({gamma, metrics::gzsl_h(s.predictions, seen_rows.labels, ds.seen_classes,
                                                           u.predictions, unseen_rows.labels, ds.unseen_classes)});
    }
  }
  return result;
}

std::string render_report(const RunConfig& config, const EvalResult& result) {
  std::ostringstream out;
  out << "ZSLC-REPORT v1\n[config]\n" << render_config(config);
  const bool gzsl = config.eval_mode == EvalMode::kGzsl;
  out << "[predictions " << to_string(config.eval_mode) << "]\n";
  char buf[128];
  for (const SamplePrediction& p : gzsl ? result.gzsl_predictions : result.zsl_predictions) {
    std::snprintf(buf, sizeof(buf), "%zu %d %d %.6f\n", p.index, static_cast<int>(p.truth),
                  static_cast<int>(p.predicted), p.max_score);
    out << buf;
  }
  if (!result.gamma_curve.empty()) {
    out << "[gamma-sweep]\n";
    for (const GammaPoint& g : result.gamma_curve) {
      std::snprintf(buf, sizeof(buf), "gamma=%.6f S=%.6f U=%.6f H=%.6f\n", g.gamma, g.scores.s, g.scores.u,
                    g.scores.h);
      out << buf;
    }
  }
  out << "[metrics]\n" << metrics::format_metrics_block(result.report);
  return out.str();
}

CommandResult cmd_synth(const RunConfig& config, const CommandOptions& options) {
  RunConfig resolved = config;
  if (options.out) {
    auto& p = resolved.paths;
    for (auto* path : {&p.features, &p.embeddings, &p.split, &p.irrelevant}) *path = *options.out / path->filename();
  }
  const auto& p = resolved.paths;
  for (const auto& path : {p.features, p.embeddings, p.split, p.irrelevant}) guard_output(path, options.force);

  const data::SynthConfig sc = resolved_synth(resolved);
  const data::SynthResult synth = data::synth_zsl(sc);
  const data::IrrelevantSet irrelevant = data::synth_irrelevant(sc, resolved.n_irrelevant);

  io::save_features(p.features, synth.dataset.features, synth.dataset.labels);
  io::save_embeddings(p.embeddings, synth.embeddings);
  io::save_split(p.split, synth.dataset.split());
  const std::vector<data::ClassId> unlabeled(irrelevant.features.rows(), io::kUnlabeled);
  io::save_features(p.irrelevant, irrelevant.features, unlabeled);
  return CommandResult{{p.features, p.embeddings, p.split, p.irrelevant}, {}, false};
}

CommandResult cmd_craft(const RunConfig& config, const CommandOptions& options) {
  const auto out = options.out.value_or(config.paths.rules);
  guard_output(out, options.force);
  const data::ZslDataset ds = io::load_dataset(config.paths.features, config.paths.split);
  const data::ClassEmbeddingTable emb = io::load_embeddings(config.paths.embeddings);
  data::DataServer server(ds);
  const crafting::RuleSet pool = craft(config, config.craft_mode, emb, server);
  crafting::save_rules(out, pool);
  return CommandResult{{out}, server.served(), server.served_unseen()};
}

CommandResult cmd_train(const RunConfig& config, const CommandOptions& options) {
  const auto out = options.out.value_or(config.paths.model);
  guard_output(out, options.force);
  const data::ZslDataset ds = io::load_dataset(config.paths.features, config.paths.split);
  const data::ClassEmbeddingTable emb = io::load_embeddings(config.paths.embeddings);
  const crafting::RuleSet pool = crafting::load_rules(config.paths.rules);
  data::DataServer server(ds);
  const backbone::CraftedModel model = train(config, pool, emb.dim(), server, options.threads);
  backbone::save_model(out, model);
  return CommandResult{{out}, server.served(), server.served_unseen()};
}

CommandResult cmd_rebalance(const RunConfig& config, const CommandOptions& options) {
  const auto out = options.out.value_or(config.paths.discriminator);
  guard_output(out, options.force);
  const data::ZslDataset ds = io::load_dataset(config.paths.features, config.paths.split);
  const backbone::CraftedModel model = backbone::load_model(config.paths.model);
  const io::FeatureFile irrelevant = io::load_features(config.paths.irrelevant);
  data::DataServer server(ds);
  const rebalance::Discriminator disc = fit_discriminator(config, model, server, irrelevant.features, options.threads);
  rebalance::save_discriminator(out, disc);
  return CommandResult{{out}, server.served(), server.served_unseen()};
}

CommandResult cmd_eval(const RunConfig& config, const CommandOptions& options) {
  RunConfig resolved = config;
  if (options.out) resolved.paths.report = *options.out;
  const auto& p = resolved.paths;
  guard_output(p.report, options.force);
  const data::ZslDataset ds = io::load_dataset(p.features, p.split);

  std::vector<Member> members;
  auto load_member = [&](const std::filesystem::path& model, const std::filesystem::path& rules,
                         const std::filesystem::path& disc) {
    Member m{backbone::load_model(model), crafting::load_rules(rules), std::nullopt};
    if (resolved.rebalance == RebalanceMode::kLearned) m.discriminator = rebalance::load_discriminator(disc);
    members.push_back(std::move(m));
  };
  load_member(p.model, p.rules, p.discriminator);
  if (resolved.ensemble) load_member(p.model2, p.rules2, p.discriminator2);

  data::DataServer server(ds);
  const EvalResult result = evaluate(resolved, members, server, options.threads);
  auto out = io::open_output(p.report);
  out << render_report(resolved, result);
  return CommandResult{{p.report}, server.served(), server.served_unseen()};
}

int exit_code(const Error& error) noexcept {
  switch (error.kind()) {
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kData: return 3;
    case ErrorKind::kNumeric: return 4;
  }
  return 3;
}

}  // namespace zslcraft::pipeline
