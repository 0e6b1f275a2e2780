#include <gtest/gtest.h>

#include <cmath>

#include "zslcraft/errors.hpp"
#include "zslcraft/matrix.hpp"
#include "zslcraft/rng.hpp"

namespace zl = zslcraft::linalg;

namespace {

zl::Matrix naive_product(const zl::Matrix& a, const zl::Matrix& b) {
  zl::Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST(Matrix, RejectsBadConstruction) {
  EXPECT_THROW(zl::Matrix(2, 2, std::vector<double>{1, 2, 3}), zslcraft::ShapeError);
  EXPECT_THROW(zl::Matrix(1, 2, std::vector<double>{1, NAN}), zslcraft::Error);
  EXPECT_THROW(zl::Matrix(1, 1, std::vector<double>{INFINITY}), zslcraft::Error);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const zl::Matrix m{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(zl::matmul(zl::Matrix::identity(3), m), m);
}

TEST(Matmul, HandArithmetic) {
  const zl::Matrix a{{1, 2}, {3, 4}};
  const zl::Matrix b{{0}, {1}};
  EXPECT_EQ(zl::matmul(a, b), (zl::Matrix{{2}, {4}}));
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(zl::matmul(zl::Matrix(2, 3), zl::Matrix(2, 3)), zslcraft::ShapeError);
}

TEST(Matmul, MatchesTripleLoop) {
  zl::SeededRng rng(11);
  const auto a = zl::rand_normal(rng, 7, 5, 0.0, 1.0);
  const auto b = zl::rand_normal(rng, 5, 3, 0.0, 1.0);
  const auto got = zl::matmul(a, b);
  const auto want = naive_product(a, b);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_LE(std::abs(got.data()[i] - want.data()[i]), 1e-12);
}

TEST(Matmul, TransposedVariantsAgree) {
  zl::SeededRng rng(3);
  const auto a = zl::rand_normal(rng, 4, 6, 0.0, 1.0);
  const auto b = zl::rand_normal(rng, 5, 6, 0.0, 1.0);
  const auto c = zl::rand_normal(rng, 4, 2, 0.0, 1.0);
  EXPECT_LE(zl::max_abs(zl::subtract(zl::matmul_transposed(a, b), naive_product(a, zl::transpose(b)))), 1e-12);
  EXPECT_LE(zl::max_abs(zl::subtract(zl::transposed_matmul(a, c), naive_product(zl::transpose(a), c))), 1e-12);
}

TEST(Matmul, AssociativeOnRandomTriples) {
  zl::SeededRng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto a = zl::rand_normal(rng, 4, 5, 0.0, 1.0);
    const auto b = zl::rand_normal(rng, 5, 6, 0.0, 1.0);
    const auto c = zl::rand_normal(rng, 6, 3, 0.0, 1.0);
    const auto left = zl::matmul(zl::matmul(a, b), c);
    const auto right = zl::matmul(a, zl::matmul(b, c));
    EXPECT_LE(zl::frobenius_norm(zl::subtract(left, right)), 1e-9 * zl::frobenius_norm(left));
  }
}

TEST(SolveSpd, IdentityAndScalarCases) {
  const zl::Matrix b{{1.5, -2}, {0.25, 7}};
  EXPECT_EQ(zl::solve_spd(zl::Matrix::identity(2), b), b);
  const auto x = zl::solve_spd(zl::Matrix{{2, 0}, {0, 2}}, zl::Matrix{{4}, {6}});
  EXPECT_NEAR(x(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(x(1, 0), 3.0, 1e-15);
}

TEST(SolveSpd, ResidualOnRandomSpd) {
  zl::SeededRng rng(21);
  const auto g = zl::rand_normal(rng, 6, 6, 0.0, 1.0);
  const auto a = zl::add(zl::transposed_matmul(g, g), zl::Matrix::identity(6));
  const auto b = zl::rand_normal(rng, 6, 2, 0.0, 1.0);
  const auto x = zl::solve_spd(a, b);
  EXPECT_LE(zl::max_abs(zl::subtract(zl::matmul(a, x), b)), 1e-8 * zl::max_abs(b));
}

TEST(SolveSpd, RecoversKnownSolution) {
  zl::SeededRng rng(8);
  for (int t = 0; t < 10; ++t) {
    const auto g = zl::rand_normal(rng, 5, 5, 0.0, 1.0);
    const auto a = zl::add(zl::transposed_matmul(g, g), zl::scale(zl::Matrix::identity(5), 0.5));
    const auto x0 = zl::rand_normal(rng, 5, 3, 0.0, 1.0);
    const auto x = zl::solve_spd(a, zl::matmul(a, x0));
    EXPECT_LE(zl::frobenius_norm(zl::subtract(x, x0)), 1e-7 * zl::frobenius_norm(x0));
  }
}

TEST(SolveSpd, SingularPivotIsReported) {
  const zl::Matrix a{{1, 0, 0}, {0, 1, 1}, {0, 1, 1}};
  try {
    zl::solve_spd(a, zl::Matrix(3, 1, 1.0));
    FAIL() << "expected SingularMatrixError";
  } catch (const zslcraft::SingularMatrixError& e) {
    EXPECT_EQ(e.pivot(), 2u);
  }
}

TEST(SolveSpd, RejectsAsymmetric) {
  EXPECT_THROW(zl::solve_spd(zl::Matrix{{2, 1}, {0, 2}}, zl::Matrix(2, 1, 1.0)), zslcraft::Error);
}

TEST(Rng, ZeroStddevGivesMean) {
  zl::SeededRng rng(1);
  const auto m = zl::rand_normal(rng, 3, 4, 2.5, 0.0);
  for (double v : m.data()) EXPECT_EQ(v, 2.5);
}

TEST(Rng, SameSeedSameDraws) {
  zl::SeededRng a(42);
  zl::SeededRng b(42);
  EXPECT_EQ(zl::rand_normal(a, 10, 10, 0.0, 1.0), zl::rand_normal(b, 10, 10, 0.0, 1.0));
}

TEST(Rng, SampleMeanNearZero) {
  zl::SeededRng rng(7);
  const auto m = zl::rand_normal(rng, 100, 100, 0.0, 1.0);
  double s = 0.0;
  for (double v : m.data()) s += v;
  EXPECT_LE(std::abs(s / 10000.0), 0.05);
}

TEST(Rng, SplitStreamsAreIndependentOfParentState) {
  zl::SeededRng a(9);
  const auto child_before = a.split("x").next_u64();
  a.next_u64();
  EXPECT_EQ(a.split("x").next_u64(), child_before);
  EXPECT_NE(a.split("y").next_u64(), child_before);
}

TEST(Rng, StageSeedsDiffer) {
  EXPECT_NE(zl::derive_seed(1, "synth"), zl::derive_seed(1, "train"));
  EXPECT_NE(zl::derive_seed(1, "synth"), zl::derive_seed(2, "synth"));
  EXPECT_EQ(zl::derive_seed(1, "synth"), zl::derive_seed(1, "synth"));
}

TEST(Rng, BelowStaysInRange) {
  zl::SeededRng rng(4);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(Rng, PermutationCoversAllIndices) {
  zl::SeededRng rng(6);
  auto p = zl::permutation(rng, 50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
}
