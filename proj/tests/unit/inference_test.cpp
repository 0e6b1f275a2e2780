#include <gtest/gtest.h>

#include <cmath>

#include "zslcraft/errors.hpp"
#include "zslcraft/inference.hpp"
#include "zslcraft/rng.hpp"

namespace zb = zslcraft::backbone;
namespace zc = zslcraft::crafting;
namespace zf = zslcraft::inference;
namespace zl = zslcraft::linalg;

namespace {

zb::CraftedModel small_model(std::uint64_t seed, std::size_t seen) {
  zl::SeededRng rng(seed);
  const std::vector<std::size_t> dims{4, 6, 3};
  std::vector<zslcraft::data::ClassId> ids;
  for (std::size_t i = 0; i < seen; ++i) ids.push_back(static_cast<zslcraft::data::ClassId>(i));
  return {zb::FeatureExtractor::initialize(dims, rng),
          zc::RuleSet(zl::rand_normal(rng, seen, 3, 0.0, 1.0), ids, zc::RuleKind::kVisual, false), 1.0};
}

zc::RuleSet augmented(const zb::CraftedModel& m, std::size_t extra, std::uint64_t seed) {
  zl::SeededRng rng(seed);
  auto ids = m.seen_rules.class_ids();
  for (std::size_t i = 0; i < extra; ++i) ids.push_back(static_cast<zslcraft::data::ClassId>(100 + i));
  return {zl::vstack(m.seen_rules.rules(), zl::rand_normal(rng, extra, 3, 0.0, 1.0)), ids, zc::RuleKind::kVisual,
          false};
}

}  // namespace

TEST(Logits, OrthogonalFeaturesGiveZero) {
  zb::Layer layer{zl::Matrix(2, 2, 0.0), zl::Matrix{{3.0, 0.0}}};
  zb::CraftedModel m{zb::FeatureExtractor({layer}), zc::RuleSet(zl::Matrix{{0, 1}}, {0}, zc::RuleKind::kVisual, false),
                     1.0};
  const auto l = zf::zsl_logits(m, zl::Matrix(3, 2, 1.0), m.seen_rules);
  for (double v : l.data()) EXPECT_EQ(v, 0.0);
}

TEST(Logits, AugmentingPoolKeepsSeenPrefix) {
  const auto m = small_model(1, 4);
  zl::SeededRng rng(2);
  const auto x = zl::rand_normal(rng, 9, 4, 0.0, 1.0);
  const auto seen_only = zf::zsl_logits(m, x, m.seen_rules);
  const auto full = zf::zsl_logits(m, x, augmented(m, 3, 5));
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(full(r, j), seen_only(r, j));
}

TEST(Logits, MismatchedPoolRejected) {
  const auto m = small_model(1, 4);
  const auto other = small_model(2, 4);
  EXPECT_THROW(zf::zsl_logits(m, zl::Matrix(1, 4), augmented(other, 2, 3)), zslcraft::ConsistencyError);
}

TEST(Logits, ExtractorUntouchedByInference) {
  const auto m = small_model(4, 3);
  const auto before = m.extractor.fingerprint();
  zl::SeededRng rng(2);
  zf::zsl_logits(m, zl::rand_normal(rng, 50, 4, 0.0, 1.0), augmented(m, 2, 1), 4);
  EXPECT_EQ(m.extractor.fingerprint(), before);
}

TEST(Softmax, HandValues) {
  const auto u = zf::softmax_temp(std::vector<double>{0, 0, 0}, 1.0);
  for (double p : u) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  const auto p = zf::softmax_temp(std::vector<double>{std::log(2.0), 0.0}, 1.0);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
  EXPECT_THROW(zf::softmax_temp(std::vector<double>{1.0}, 0.0), zslcraft::ValidationError);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const auto p = zf::softmax_temp(std::vector<double>{1000.0, 999.0, -1000.0}, 1.0);
  for (double v : p) EXPECT_TRUE(std::isfinite(v));
}

TEST(Softmax, RowsSumToOneAndArgmaxIsTemperatureFree) {
  zl::SeededRng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto l = zl::rand_normal(rng, 1, 7, 0.0, 3.0);
    const auto base = zf::predict(l.row(0));
    for (double tau : {0.1, 1.0, 10.0}) {
      const auto p = zf::softmax_temp(l.row(0), tau);
      double s = 0.0;
      for (double v : p) {
        if (tau >= 1.0) {
          EXPECT_GT(v, 0.0);
          EXPECT_LT(v, 1.0);
        }
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
      EXPECT_EQ(zf::predict(p), base);
    }
  }
}

TEST(Softmax, RestrictionIdentity) {
  zl::SeededRng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto l = zl::rand_normal(rng, 1, 8, 0.0, 2.0);
    const auto full = zf::softmax_temp(l.row(0), 1.5);
    const auto seen = zf::softmax_temp(l.row(0).subspan(0, 5), 1.5);
    double mass = 0.0;
    for (std::size_t j = 0; j < 5; ++j) mass += full[j];
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(full[j] / mass, seen[j], 1e-9);
  }
}

TEST(Predict, TieBreaksLow) {
  EXPECT_EQ(zf::predict(std::vector<double>{0.2, 0.5, 0.3}), 1u);
  EXPECT_EQ(zf::predict(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_THROW(zf::predict(std::vector<double>{}), zslcraft::ValidationError);
}

TEST(Ensemble, Averages) {
  const std::vector<double> a{1, 0};
  const std::vector<double> b{0, 1};
  EXPECT_EQ(zf::ensemble_scores(a, b), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(zf::ensemble_scores(a, a), a);
  zl::SeededRng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto p = zf::softmax_temp(zl::rand_normal(rng, 1, 6, 0.0, 1.0).row(0), 1.0);
    const auto q = zf::softmax_temp(zl::rand_normal(rng, 1, 6, 0.0, 1.0).row(0), 1.0);
    double s = 0.0;
    for (double v : zf::ensemble_scores(p, q)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Ensemble, TablesMustAgreeOnOrdering) {
  zf::ScoreTable a{{0, 1}, {true, false}, zl::Matrix{{0.3, 0.7}}};
  zf::ScoreTable b{{1, 0}, {true, false}, zl::Matrix{{0.6, 0.4}}};
  EXPECT_THROW(zf::ensemble_scores(a, b), zslcraft::ConsistencyError);
  const auto same = zf::ensemble_scores(a, a);
  EXPECT_EQ(zf::predict_all(same), zf::predict_all(a));
}
