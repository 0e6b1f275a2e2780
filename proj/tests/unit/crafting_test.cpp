#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "zslcraft/crafting.hpp"
#include "zslcraft/errors.hpp"
#include "zslcraft/extractor.hpp"
#include "zslcraft/rng.hpp"
#include "zslcraft/synth.hpp"

namespace zc = zslcraft::crafting;
namespace zd = zslcraft::data;
namespace zl = zslcraft::linalg;

namespace {

/// Gradient descent on ||SW - M||^2 + lambda ||W||^2 until the update stalls.
zl::Matrix ridge_by_descent(const zl::Matrix& s, const zl::Matrix& m, double lambda) {
  zl::Matrix w(s.cols(), m.cols());
  const double lr = 0.5 / (zl::frobenius_norm(zl::transposed_matmul(s, s)) + lambda);
  for (int it = 0; it < 200000; ++it) {
    const auto residual = zl::subtract(zl::matmul(s, w), m);
    const auto grad = zl::add(zl::transposed_matmul(s, residual), zl::scale(w, lambda));
    w = zl::subtract(w, zl::scale(grad, lr));
    if (zl::max_abs(grad) < 1e-12) break;
  }
  return w;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  return zl::dot(a, b) / (zl::norm2(a) * zl::norm2(b));
}

}  // namespace

TEST(SemanticRules, EqualEmbeddings) {
  zd::ClassEmbeddingTable t{zl::Matrix{{1, 0, 1}, {0, 1, 1}, {3, 4, 0}}, {5, 6, 7}};
  const std::vector<zd::ClassId> classes{7, 5};
  const auto rules = zc::semantic_rules(t, classes, false);
  EXPECT_EQ(rules.class_ids(), classes);
  EXPECT_EQ(rules.rules(), (zl::Matrix{{3, 4, 0}, {1, 0, 1}}));
  EXPECT_EQ(rules.kind(), zc::RuleKind::kSemantic);
  const auto unit = zc::semantic_rules(t, classes, true);
  EXPECT_NEAR(unit.rules()(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(unit.rules()(0, 1), 0.8, 1e-15);
}

TEST(SemanticRules, UnknownClassThrows) {
  zd::ClassEmbeddingTable t{zl::Matrix{{1, 0}}, {0}};
  const std::vector<zd::ClassId> classes{1};
  EXPECT_THROW(zc::semantic_rules(t, classes, false), zslcraft::Error);
}

TEST(RuleSet, Invariants) {
  EXPECT_THROW(zc::RuleSet(zl::Matrix{{1, 0}, {0, 0}}, {0, 1}, zc::RuleKind::kSemantic, false),
               zslcraft::ValidationError);
  EXPECT_THROW(zc::RuleSet(zl::Matrix{{1, 0}, {0, 1}}, {0, 0}, zc::RuleKind::kSemantic, false),
               zslcraft::ValidationError);
  EXPECT_THROW(zc::RuleSet(zl::Matrix{{2, 0}}, {0}, zc::RuleKind::kSemantic, true), zslcraft::ValidationError);
  const zc::RuleSet r(zl::Matrix{{1, 0}, {0, 1}}, {4, 9}, zc::RuleKind::kVisual, true);
  EXPECT_EQ(r.index_of(9), 1u);
  EXPECT_THROW(r.index_of(3), zslcraft::IndexError);
  EXPECT_TRUE(r.has_prefix(r.prefix(1)));
}

TEST(RuleSet, RoundTrip) {
  zl::SeededRng rng(3);
  const zc::RuleSet r(zl::rand_normal(rng, 4, 3, 0.0, 1.0), {0, 1, 2, 3}, zc::RuleKind::kVisual, false);
  std::stringstream s;
  zc::write_rules(s, r);
  EXPECT_EQ(zc::read_rules(s), r);
}

TEST(Prototypes, PlainAverage) {
  const zl::Matrix f{{1, 2}, {3, 4}, {10, 10}};
  const std::vector<zd::ClassId> labels{0, 0, 1};
  const std::vector<zd::ClassId> classes{0, 1};
  EXPECT_EQ(zc::seen_prototypes(f, labels, classes), (zl::Matrix{{2, 3}, {10, 10}}));
}

TEST(Prototypes, SingleSampleIsItsOwnPrototype) {
  const zl::Matrix f{{0.25, -1.5}};
  const std::vector<zd::ClassId> labels{4};
  const std::vector<zd::ClassId> classes{4};
  EXPECT_EQ(zc::seen_prototypes(f, labels, classes), f);
}

TEST(Prototypes, EmptyClassOrForeignLabelThrows) {
  const zl::Matrix f{{1, 2}};
  const std::vector<zd::ClassId> labels{0};
  const std::vector<zd::ClassId> two{0, 1};
  EXPECT_THROW(zc::seen_prototypes(f, labels, two), zslcraft::ValidationError);
  const std::vector<zd::ClassId> other{2};
  EXPECT_THROW(zc::seen_prototypes(f, labels, other), zslcraft::ValidationError);
}

TEST(Projection, IdentityEmbeddingsReproducePrototypes) {
  const zl::Matrix m{{1, 2}, {3, 4}, {5, 6}};
  const auto w = zc::fit_projection(zl::Matrix::identity(3), m, 0.0);
  EXPECT_LE(zl::max_abs(zl::subtract(w, m)), 1e-14);
}

TEST(Projection, MatchesFrozenReference) {
  const zl::Matrix s{{1, 0, 1}, {0, 1, 1}, {1, 1, 0}, {1, 0, 0}};
  const zl::Matrix m{{0.5, -0.2}, {0.1, 0.4}, {0.3, 0.3}, {-0.6, 0.2}};
  const zl::Matrix expected{{-0.04993429697766093, 0.003942181340341672},
                            {0.0864890694062836, 0.3711623461951976},
                            {0.26830725122446536, -0.08338310835025681}};
  EXPECT_LE(zl::max_abs(zl::subtract(zc::fit_projection(s, m, 0.1), expected)), 1e-12);
}

TEST(Projection, AgreesWithGradientDescent) {
  zl::SeededRng rng(31);
  for (std::size_t q : {4u, 6u}) {
    for (int t = 0; t < 3; ++t) {
      const auto s = zl::rand_normal(rng, 10, q, 0.0, 1.0);
      const auto m = zl::rand_normal(rng, 10, 3, 0.0, 1.0);
      const auto closed = zc::fit_projection(s, m, 1e-2);
      EXPECT_LE(zl::max_abs(zl::subtract(closed, ridge_by_descent(s, m, 1e-2))), 1e-5);
    }
  }
}

TEST(Projection, UnderdeterminedWithoutRidgeFails) {
  zl::SeededRng rng(2);
  const auto s = zl::rand_normal(rng, 3, 5, 0.0, 1.0);
  const auto m = zl::rand_normal(rng, 3, 2, 0.0, 1.0);
  EXPECT_THROW(zc::fit_projection(s, m, 0.0), zslcraft::SingularMatrixError);
  EXPECT_NO_THROW(zc::fit_projection(s, m, 1e-2));
}

TEST(Projection, LinearMapIsRecoveredForUnseenClasses) {
  zl::SeededRng rng(14);
  const auto truth = zl::rand_normal(rng, 6, 4, 0.0, 1.0);
  const auto seen_emb = zl::rand_normal(rng, 12, 6, 0.0, 1.0);
  const auto unseen_emb = zl::rand_normal(rng, 3, 6, 0.0, 1.0);
  const auto w = zc::fit_projection(seen_emb, zl::matmul(seen_emb, truth), 1e-6);
  const auto predicted = zc::unseen_prototypes(w, unseen_emb);
  EXPECT_LE(zl::max_abs(zl::subtract(predicted, zl::matmul(unseen_emb, truth))), 1e-4);
}

TEST(Projection, UnseenPrototypesPointTheRightWay) {
  // Prototypes from a random extractor on the default benchmark; predicted
  // unseen prototypes against the ones measured from unseen rows.
  const auto synth = zd::synth_zsl(zd::SynthConfig{});
  const auto& ds = synth.dataset;
  zl::SeededRng rng(1);
  const std::vector<std::size_t> dims{ds.dim(), 64, 16};
  const auto f = zslcraft::backbone::FeatureExtractor::initialize(dims, rng).forward(ds.features);
  const auto seen = zc::seen_prototypes(zl::gather_rows(f, ds.train_indices()),
                                        [&] {
                                          std::vector<zd::ClassId> l;
                                          for (auto i : ds.train_indices()) l.push_back(ds.labels[i]);
                                          return l;
                                        }(),
                                        ds.seen_classes);
  const auto w = zc::fit_projection(synth.embeddings.select(ds.seen_classes), seen, 1e-2);
  const auto predicted = zc::unseen_prototypes(w, synth.embeddings.select(ds.unseen_classes));
  const auto measured = zc::seen_prototypes(f, ds.labels, ds.class_ids());
  double total = 0.0;
  for (std::size_t k = 0; k < ds.unseen_classes.size(); ++k)
    total += cosine(predicted.row(k), measured.row(ds.seen_classes.size() + k));
  EXPECT_GE(total / static_cast<double>(ds.unseen_classes.size()), 0.8);
}

TEST(VisualRules, StacksSeenThenUnseen) {
  const zl::Matrix seen{{1, 0}, {0, 1}};
  const zl::Matrix unseen{{1, 1}};
  const std::vector<zd::ClassId> ids{0, 1, 2};
  const auto r = zc::visual_rules(seen, unseen, ids, false);
  EXPECT_EQ(r.rules(), (zl::Matrix{{1, 0}, {0, 1}, {1, 1}}));
  EXPECT_EQ(r.kind(), zc::RuleKind::kVisual);
  const auto n = zc::visual_rules(seen, unseen, ids, true);
  EXPECT_NEAR(zl::norm2(n.rules().row(2)), 1.0, 1e-15);
}

TEST(LambdaCv, PicksFromGrid) {
  zl::SeededRng rng(6);
  const auto s = zl::rand_normal(rng, 10, 4, 0.0, 1.0);
  const auto m = zl::add(zl::matmul(s, zl::rand_normal(rng, 4, 3, 0.0, 1.0)), zl::rand_normal(rng, 10, 3, 0.0, 0.01));
  const std::vector<double> grid{1e-4, 1e-2, 10.0, 1000.0};
  const double picked = zc::select_lambda_cv(s, m, grid);
  EXPECT_TRUE(picked == 1e-4 || picked == 1e-2);
  EXPECT_THROW(zc::select_lambda_cv(s, m, std::vector<double>{}), zslcraft::ConfigError);
}
