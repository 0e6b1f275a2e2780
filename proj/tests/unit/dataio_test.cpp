#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "zslcraft/errors.hpp"
#include "zslcraft/formats.hpp"
#include "zslcraft/rng.hpp"
#include "zslcraft/synth.hpp"

namespace zd = zslcraft::data;
namespace zi = zslcraft::io;
namespace zl = zslcraft::linalg;

namespace {

zd::SynthConfig small_config(std::uint64_t seed) {
  zd::SynthConfig c;
  c.n_seen = 4;
  c.n_unseen = 2;
  c.q = 8;
  c.d = 6;
  c.samples_per_class = 10;
  c.seed = seed;
  return c;
}

std::vector<double> row_vec(const zl::Matrix& m, std::size_t r) { return {m.row(r).begin(), m.row(r).end()}; }

}  // namespace

TEST(Synth, SameSeedSameDataset) {
  const auto a = zd::synth_zsl(small_config(7));
  const auto b = zd::synth_zsl(small_config(7));
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.embeddings, b.embeddings);
}

TEST(Synth, ZeroNoiseSamplesOfOneClassCoincide) {
  auto c = small_config(3);
  c.noise_stddev = 0.0;
  const auto r = zd::synth_zsl(c);
  EXPECT_EQ(r.dataset.labels[0], r.dataset.labels[1]);
  EXPECT_EQ(row_vec(r.dataset.features, 0), row_vec(r.dataset.features, 1));
}

TEST(Synth, InvariantsHoldOverRandomConfigs) {
  zl::SeededRng rng(99);
  for (int t = 0; t < 25; ++t) {
    zd::SynthConfig c;
    c.n_seen = 1 + rng.below(6);
    c.n_unseen = 1 + rng.below(4);
    c.q = 4 + rng.below(8);
    c.d = 2 + rng.below(8);
    c.samples_per_class = 1 + rng.below(12);
    c.noise_stddev = rng.uniform();
    c.seed = rng.next_u64();
    const auto r = zd::synth_zsl(c);
    EXPECT_NO_THROW(r.dataset.validate());
    EXPECT_NO_THROW(r.embeddings.validate());
    EXPECT_EQ(r.dataset.seen_classes.size(), c.n_seen);
    EXPECT_EQ(r.dataset.unseen_classes.size(), c.n_unseen);
    for (std::size_t i = 0; i < r.dataset.num_samples(); ++i) {
      if (r.dataset.train_mask[i]) EXPECT_TRUE(r.dataset.is_seen(r.dataset.labels[i]));
      EXPECT_NE(r.dataset.train_mask[i], r.dataset.test_mask[i]);
    }
  }
}

TEST(Synth, DefaultSplitIsEightyTwenty) {
  const auto r = zd::synth_zsl(zd::SynthConfig{});
  EXPECT_EQ(r.dataset.train_indices().size(), 15u * 80u);
  EXPECT_EQ(r.dataset.test_indices().size(), 15u * 20u + 5u * 100u);
}

TEST(Synth, NearestEmbeddingBaselineBeatsChance) {
  // Least-squares map from features to attributes fit on seen training rows,
  // then nearest unseen embedding.
  const auto r = zd::synth_zsl(zd::SynthConfig{});
  const auto& ds = r.dataset;
  const auto train = ds.train_indices();
  zl::Matrix x = zl::gather_rows(ds.features, train);
  zl::Matrix a(train.size(), r.embeddings.dim());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto e = r.embeddings.embeddings.row(r.embeddings.row_of(ds.labels[train[i]]));
    std::copy(e.begin(), e.end(), a.row(i).begin());
  }
  auto gram = zl::transposed_matmul(x, x);
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += 1e-3;
  const auto w = zl::solve_spd(gram, zl::transposed_matmul(x, a));
  const auto unseen_emb = r.embeddings.select(ds.unseen_classes);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    if (ds.is_seen(ds.labels[i])) continue;
    const auto pred = zl::matmul(zl::Matrix(1, ds.dim(), row_vec(ds.features, i)), w);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < unseen_emb.rows(); ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < unseen_emb.cols(); ++k) d += std::pow(pred(0, k) - unseen_emb(c, k), 2);
      if (d < best_d) best_d = d, best = c;
    }
    correct += ds.unseen_classes[best] == ds.labels[i];
    ++total;
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(total), 0.20);
}

TEST(Synth, NoiselessClassesAreNearestPrototypeSeparable) {
  auto c = small_config(5);
  c.noise_stddev = 0.0;
  const auto r = zd::synth_zsl(c);
  const auto& ds = r.dataset;
  const auto ids = ds.class_ids();
  std::map<zd::ClassId, std::vector<double>> proto;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) proto.emplace(ds.labels[i], row_vec(ds.features, i));
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    zd::ClassId best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [id, p] : proto) {
      double d = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) d += std::pow(ds.features(i, k) - p[k], 2);
      if (d < best_d) best_d = d, best = id;
    }
    EXPECT_EQ(best, ds.labels[i]);
  }
}

TEST(Synth, IrrelevantAttributesMatchNoClass) {
  const auto c = small_config(2);
  const auto r = zd::synth_zsl(c);
  const auto irr = zd::synth_irrelevant(c, 40);
  EXPECT_EQ(irr.features.rows(), 40u);
  EXPECT_EQ(irr.features.cols(), c.d);
  for (std::size_t i = 0; i < irr.attributes.rows(); ++i)
    for (std::size_t k = 0; k < r.embeddings.embeddings.rows(); ++k)
      EXPECT_NE(row_vec(irr.attributes, i), row_vec(r.embeddings.embeddings, k));
}

TEST(Synth, EmptyIrrelevantSet) {
  const auto irr = zd::synth_irrelevant(small_config(2), 0);
  EXPECT_EQ(irr.features.rows(), 0u);
  EXPECT_EQ(irr.features.cols(), 6u);
}

TEST(Synth, TooManyClassesForAttributeSpace) {
  zd::SynthConfig c;
  c.q = 2;
  c.n_seen = 3;
  c.n_unseen = 2;
  EXPECT_THROW(zd::synth_zsl(c), zslcraft::Error);
}

TEST(Dataset, RejectsUnseenTrainingSample) {
  zd::SplitSets split{{0}, {1}, {0, 1}, {}};
  EXPECT_THROW(zd::make_dataset(zl::Matrix(2, 1, 1.0), {0, 1}, split), zslcraft::ValidationError);
}

TEST(Dataset, RejectsOverlappingPartition) {
  zd::SplitSets split{{0, 1}, {1}, {0}, {1}};
  EXPECT_THROW(zd::make_dataset(zl::Matrix(2, 1, 1.0), {0, 1}, split), zslcraft::ValidationError);
}

TEST(DataServer, TrainRowsNeverIncludeUnseen) {
  const auto r = zd::synth_zsl(small_config(4));
  zd::DataServer server(r.dataset);
  const auto rows = server.train_rows();
  for (auto l : rows.labels) EXPECT_TRUE(r.dataset.is_seen(l));
  EXPECT_FALSE(server.served_unseen());
  server.unseen_test_rows();
  EXPECT_TRUE(server.served_unseen());
}

TEST(Formats, HexRoundTripIsExact) {
  for (double v : {0.0, -0.0, 1.0, -3.25, 1e-300, 6.02214076e23, 0.1}) {
    const double back = zi::parse_hex(zi::format_hex(v), 1);
    EXPECT_EQ(std::signbit(back), std::signbit(v));
    EXPECT_EQ(back, v);
  }
  EXPECT_THROW(zi::parse_hex("nan", 1), zslcraft::ParseError);
  EXPECT_THROW(zi::parse_hex("0x1p+2000", 1), zslcraft::ParseError);
}

TEST(Formats, FeatureRoundTrip) {
  zl::SeededRng rng(12);
  const auto x = zl::rand_normal(rng, 5, 3, 0.0, 1.0);
  const std::vector<zd::ClassId> labels{0, 1, 2, 1, zi::kUnlabeled};
  std::stringstream s;
  zi::write_features(s, x, labels);
  const auto back = zi::read_features(s);
  EXPECT_EQ(back.features, x);
  EXPECT_EQ(back.labels, labels);
}

TEST(Formats, ShortRowNamesLine) {
  std::stringstream s("ZSLC-FEAT v1 2 4\n0 0x1p+0 0x1p+0 0x1p+0 0x1p+0\n1 0x1p+0 0x1p+0 0x1p+0\n");
  try {
    zi::read_features(s);
    FAIL() << "expected ParseError";
  } catch (const zslcraft::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Formats, NonFiniteLiteralRejected) {
  std::stringstream s("ZSLC-FEAT v1 1 1\n0 inf\n");
  EXPECT_THROW(zi::read_features(s), zslcraft::ParseError);
}

TEST(Formats, MalformedHeaderRejected) {
  std::stringstream s("ZSLC-FEAT v2 1 1\n0 0x1p+0\n");
  EXPECT_THROW(zi::read_features(s), zslcraft::ParseError);
}

TEST(Formats, EmbeddingRoundTripAndDuplicates) {
  const auto r = zd::synth_zsl(small_config(1));
  std::stringstream s;
  zi::write_embeddings(s, r.embeddings);
  EXPECT_EQ(zi::read_embeddings(s), r.embeddings);

  std::stringstream dup("ZSLC-EMB v1 2 2\n3 0x1p+0 0x0p+0\n3 0x0p+0 0x1p+0\n");
  EXPECT_THROW(zi::read_embeddings(dup), zslcraft::ParseError);
}

TEST(Formats, SplitRoundTrip) {
  const auto r = zd::synth_zsl(small_config(1));
  std::stringstream s;
  zi::write_split(s, r.dataset.split());
  EXPECT_EQ(zi::read_split(s), r.dataset.split());
}
