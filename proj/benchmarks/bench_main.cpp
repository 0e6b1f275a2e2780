#include <benchmark/benchmark.h>

#include "zslcraft/crafting.hpp"
#include "zslcraft/inference.hpp"
#include "zslcraft/matrix.hpp"
#include "zslcraft/rng.hpp"
#include "zslcraft/synth.hpp"
#include "zslcraft/trainer.hpp"

namespace zb = zslcraft::backbone;
namespace zc = zslcraft::crafting;
namespace zd = zslcraft::data;
namespace zl = zslcraft::linalg;

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  zl::SeededRng rng(1);
  const auto a = zl::rand_normal(rng, n, n, 0.0, 1.0);
  const auto b = zl::rand_normal(rng, n, n, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(zl::matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

static void BM_SolveSpd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  zl::SeededRng rng(2);
  const auto g = zl::rand_normal(rng, n, n, 0.0, 1.0);
  const auto a = zl::add(zl::transposed_matmul(g, g), zl::Matrix::identity(n));
  const auto b = zl::rand_normal(rng, n, 8, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(zl::solve_spd(a, b));
}
BENCHMARK(BM_SolveSpd)->RangeMultiplier(2)->Range(8, 128);

static void BM_LossAndGrad(benchmark::State& state) {
  const auto synth = zd::synth_zsl(zd::SynthConfig{});
  const auto& ds = synth.dataset;
  zl::SeededRng rng(3);
  const std::vector<std::size_t> dims{ds.dim(), 64, synth.embeddings.dim()};
  const auto f = zb::FeatureExtractor::initialize(dims, rng);
  const auto rules = zc::semantic_rules(synth.embeddings, ds.seen_classes, false);
  const auto idx = ds.train_indices();
  const std::vector<std::size_t> first(idx.begin(), idx.begin() + state.range(0));
  const auto batch = zl::gather_rows(ds.features, first);
  std::vector<zd::ClassId> labels;
  for (auto i : first) labels.push_back(ds.labels[i]);
  for (auto _ : state) benchmark::DoNotOptimize(zb::crafted_loss_and_grad(f, rules, batch, labels, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)->Arg(32)->Arg(256)->Arg(1024);

static void BM_ZslLogits(benchmark::State& state) {
  const auto synth = zd::synth_zsl(zd::SynthConfig{});
  const auto& ds = synth.dataset;
  zl::SeededRng rng(4);
  const std::vector<std::size_t> dims{ds.dim(), 64, synth.embeddings.dim()};
  const zb::CraftedModel model{zb::FeatureExtractor::initialize(dims, rng),
                               zc::semantic_rules(synth.embeddings, ds.seen_classes, false), 1.0};
  const auto pool = zc::semantic_rules(synth.embeddings, ds.class_ids(), false);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(zslcraft::inference::zsl_logits(model, ds.features, pool, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.num_samples()));
}
BENCHMARK(BM_ZslLogits)->Arg(1)->Arg(4);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto synth = zd::synth_zsl(zd::SynthConfig{});
  const auto& ds = synth.dataset;
  zl::SeededRng rng(5);
  const std::vector<std::size_t> dims{ds.dim(), 64, synth.embeddings.dim()};
  const auto f = zb::FeatureExtractor::initialize(dims, rng);
  const auto rules = zc::semantic_rules(synth.embeddings, ds.seen_classes, false);
  zb::TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(zb::train_crafted(f, rules, ds, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
