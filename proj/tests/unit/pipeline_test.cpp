#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>

#include "zslcraft/config.hpp"
#include "zslcraft/errors.hpp"
#include "zslcraft/formats.hpp"
#include "zslcraft/inference.hpp"
#include "zslcraft/synth.hpp"
#include "zslcraft/model.hpp"
#include "zslcraft/pipeline.hpp"
#include "workspace.hpp"

namespace zp = zslcraft::pipeline;
namespace zt = zslcraft::testing;

namespace {

zp::RunConfig tiny_config() {
  zp::RunConfig c;
  c.synth.n_seen = 5;
  c.synth.n_unseen = 3;
  c.synth.q = 10;
  c.synth.d = 12;
  c.synth.samples_per_class = 20;
  c.n_irrelevant = 50;
  c.hidden = {16};
  c.train.epochs = 5;
  c.disc_epochs = 100;
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const zp::RunConfig c;
  EXPECT_EQ(zp::parse_config(zp::render_config(c)), c);
}

TEST(Config, ParsesCommentsAndOverrides) {
  const auto c = zp::parse_config("# run\nseed = 9\ntrain.epochs = 3   # short\n\ncraft.mode = visual\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.train.epochs, 3u);
  EXPECT_EQ(c.craft_mode, zslcraft::crafting::RuleKind::kVisual);
  const auto o = zp::apply_overrides(c, {"train.epochs=7", "eval.rebalance=oracle"});
  EXPECT_EQ(o.train.epochs, 7u);
  EXPECT_EQ(o.rebalance, zp::RebalanceMode::kOracle);
}

TEST(Config, RejectsUnknownDuplicateAndInvalid) {
  EXPECT_THROW(zp::parse_config("train.epoch = 3\n"), zslcraft::ConfigError);
  EXPECT_THROW(zp::parse_config("seed = 1\nseed = 2\n"), zslcraft::ConfigError);
  EXPECT_THROW(zp::parse_config("train.epochs = -1\n"), zslcraft::ConfigError);
  EXPECT_THROW(zp::parse_config("train.epochs = 0\n"), zslcraft::ConfigError);
  EXPECT_THROW(zp::parse_config("mixup.alpha = 0\n"), zslcraft::ConfigError);
  EXPECT_THROW(zp::parse_config("seed 4\n"), zslcraft::ConfigError);
  EXPECT_THROW(zp::apply_overrides({}, {"noequals"}), zslcraft::ConfigError);
}

TEST(Config, GammaSweepSyntax) {
  const auto c = zp::parse_config("eval.gamma_sweep = 0:0.5:0.25\n");
  ASSERT_TRUE(c.gamma_sweep.has_value());
  EXPECT_EQ(c.gamma_sweep->values(), (std::vector<double>{0.0, 0.25, 0.5}));
  EXPECT_EQ(zp::parse_config(zp::render_config(c)), c);
}

TEST(Commands, LeakAuditAndReproducibleReport) {
  zt::ScratchDir dir("pipeline");
  const auto config = tiny_config();
  zp::CommandOptions opt;
  zp::cmd_synth(config, opt);
  const auto v = zt::branch_config(config, zslcraft::crafting::RuleKind::kVisual);
  for (auto* cmd : {&zp::cmd_craft, &zp::cmd_train, &zp::cmd_rebalance}) {
    const auto r = (*cmd)(v, opt);
    EXPECT_FALSE(r.served_unseen);
  }
  const auto model_bytes = zt::read_file("model.zslc");
  const auto eval = zp::cmd_eval(v, opt);
  EXPECT_TRUE(eval.served_unseen);
  EXPECT_EQ(zt::read_file("model.zslc"), model_bytes);

  // The report's embedded config reproduces the report.
  const auto report = zt::read_file("report.txt");
  const auto replay = zp::load_config("report.txt");
  zp::CommandOptions again;
  again.out = "replay.txt";
  zp::cmd_eval(replay, again);
  const auto replayed = zt::read_file("replay.txt");
  EXPECT_EQ(replayed.substr(replayed.find("[predictions")), report.substr(report.find("[predictions")));
}

TEST(Evaluate, GammaSweepTradesSeenForUnseen) {
  zt::ScratchDir dir("sweep");
  auto config = zt::branch_config(tiny_config(), zslcraft::crafting::RuleKind::kSemantic);
  config.rebalance = zp::RebalanceMode::kNone;
  config.gamma_sweep = zp::GammaSweep{0.0, 1.0, 0.05};
  zp::cmd_synth(config, {});
  zp::cmd_craft(config, {});
  zp::cmd_train(config, {});
  const auto ds = zslcraft::io::load_dataset(config.paths.features, config.paths.split);
  const std::vector<zp::Member> members{
      {zslcraft::backbone::load_model(config.paths.model), zslcraft::crafting::load_rules(config.paths.rules), {}}};
  zslcraft::data::DataServer server(ds);
  const auto result = zp::evaluate(config, members, server, 1);
  ASSERT_EQ(result.gamma_curve.size(), 21u);
  for (std::size_t i = 1; i < result.gamma_curve.size(); ++i) {
    EXPECT_LE(result.gamma_curve[i].scores.s, result.gamma_curve[i - 1].scores.s);
    EXPECT_GE(result.gamma_curve[i].scores.u, result.gamma_curve[i - 1].scores.u);
  }
  EXPECT_EQ(result.gamma_curve.back().scores.s, 0.0);
  EXPECT_DOUBLE_EQ(result.gamma_curve.front().scores.h, result.report.h);
}

TEST(Evaluate, IrrelevantSamplesAreLessConfident) {
  const zp::RunConfig config;
  const auto synth = zslcraft::data::synth_zsl(zp::resolved_synth(config));
  const auto irrelevant = zslcraft::data::synth_irrelevant(zp::resolved_synth(config), config.n_irrelevant);
  zslcraft::data::DataServer server(synth.dataset);
  const auto pool = zp::craft(config, zslcraft::crafting::RuleKind::kSemantic, synth.embeddings, server);
  const auto model = zp::train(config, pool, synth.embeddings.dim(), server, 1);
  auto mean_max = [&](const zslcraft::linalg::Matrix& x) {
    const auto p = zslcraft::inference::softmax_rows(zslcraft::inference::zsl_logits(model, x, model.seen_rules), 1.0);
    double total = 0.0;
    for (std::size_t r = 0; r < p.rows(); ++r) total += *std::max_element(p.row(r).begin(), p.row(r).end());
    return total / static_cast<double>(p.rows());
  };
  EXPECT_LT(mean_max(irrelevant.features), mean_max(server.seen_test_rows().features));
}

TEST(Commands, RefuseToOverwriteWithoutForce) {
  zt::ScratchDir dir("force");
  const auto config = tiny_config();
  zp::cmd_synth(config, {});
  EXPECT_THROW(zp::cmd_synth(config, {}), zslcraft::ConfigError);
  zp::CommandOptions force;
  force.force = true;
  EXPECT_NO_THROW(zp::cmd_synth(config, force));
}

TEST(Commands, EvalRejectsForeignPool) {
  zt::ScratchDir dir("foreign");
  auto config = tiny_config();
  zp::cmd_synth(config, {});
  const auto v = zt::branch_config(config, zslcraft::crafting::RuleKind::kVisual);
  zp::cmd_craft(v, {});
  zp::cmd_train(v, {});
  const auto s = zt::branch_config(config, zslcraft::crafting::RuleKind::kSemantic);
  zp::cmd_craft(s, {});
  auto mixed = v;
  mixed.paths.rules = s.paths.rules;
  mixed.rebalance = zp::RebalanceMode::kNone;
  EXPECT_THROW(zp::cmd_eval(mixed, {}), zslcraft::Error);
}

TEST(Commands, SemanticCraftNeedsMatchingFeatureSize) {
  zt::ScratchDir dir("dims");
  auto config = tiny_config();
  zp::cmd_synth(config, {});
  config.feature_dim = 7;
  EXPECT_THROW(zp::cmd_craft(config, {}), zslcraft::ConfigError);
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(zp::exit_code(zslcraft::ConfigError("x")), 2);
  EXPECT_EQ(zp::exit_code(zslcraft::ParseError(1, "x")), 3);
  EXPECT_EQ(zp::exit_code(zslcraft::SingularMatrixError(0)), 4);
}

#ifdef ZSLCRAFT_CLI_PATH
TEST(Cli, ProcessExitCodes) {
  zt::ScratchDir dir("cli");
  const std::string cli = ZSLCRAFT_CLI_PATH;
  {
    std::ofstream cfg("run.cfg");
    cfg << "synth.samples_per_class = 10\nn_bogus = 1\n";
  }
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("synth --config run.cfg"), 2);
  {
    std::ofstream cfg("run.cfg");
    cfg << "synth.samples_per_class = 10\n";
  }
  EXPECT_EQ(run("synth --config run.cfg"), 0);
  EXPECT_EQ(run("synth --config run.cfg"), 2);
  EXPECT_EQ(run("synth --config run.cfg --force --set synth.noise_stddev=0.2"), 0);
  {
    std::ofstream bad("features.zslc");
    bad << "ZSLC-FEAT v1 1 1\n0 oops\n";
  }
  EXPECT_EQ(run("craft --config run.cfg"), 3);
  EXPECT_EQ(run("synth --config run.cfg --force"), 0);
  EXPECT_EQ(run("craft --config run.cfg --set craft.mode=visual --set craft.lambda=0"), 4);
  EXPECT_EQ(run("frobnicate --config run.cfg"), 2);
}
#endif
