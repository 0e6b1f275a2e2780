#include "zslcraft/crafting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zslcraft/errors.hpp"

namespace zslcraft::crafting {

linalg::Matrix normalize_rows(const linalg::Matrix& m) {
  linalg::Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double n = linalg::norm2(row);
    if (n > 0.0)
      for (double& v : row) v /= n;
  }
  return out;
}

RuleSet semantic_rules(const data::ClassEmbeddingTable& table, std::span<const data::ClassId> classes,
                       bool normalize) {
  linalg::Matrix rows = table.select(classes);
  if (normalize) rows = normalize_rows(rows);
  return RuleSet(std::move(rows), {classes.begin(), classes.end()}, RuleKind::kSemantic, normalize);
}

linalg::Matrix seen_prototypes(const linalg::Matrix& features, std::span<const data::ClassId> labels,
                               std::span<const data::ClassId> classes) {
  if (features.rows() != labels.size()) throw ShapeError("prototype features and labels differ in length");
  linalg::Matrix sums(classes.size(), features.cols());
  std::vector<std::size_t> counts(classes.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), labels[i]);
    if (it == classes.end()) {
      throw ValidationError("prototype input row " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                            " outside the requested classes");
    }
    const auto c = static_cast<std::size_t>(it - classes.begin());
    auto acc = sums.row(c);
    const auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) acc[j] += row[j];
    ++counts[c];
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (counts[c] == 0) {
      throw ValidationError("prototype undefined for class " + std::to_string(classes[c]) + ": no samples");
    }
    for (double& v : sums.row(c)) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

linalg::Matrix fit_projection(const linalg::Matrix& seen_embeddings, const linalg::Matrix& seen_prototypes,
                              double lambda) {
  if (seen_embeddings.rows() != seen_prototypes.rows()) {
    throw ShapeError("projection: " + std::to_string(seen_embeddings.rows()) + " embeddings vs " +
                     std::to_string(seen_prototypes.rows()) + " prototypes");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("projection: lambda must be >= 0");
  const std::size_t q = seen_embeddings.cols();
  const char* hint = "the design is rank-deficient; use lambda > 0";
  if (lambda == 0.0 && q > seen_embeddings.rows()) throw SingularMatrixError(seen_embeddings.rows(), hint);

  linalg::Matrix gram = linalg::transposed_matmul(seen_embeddings, seen_embeddings);
  for (std::size_t i = 0; i < q; ++i) gram(i, i) += lambda;
  const linalg::Matrix rhs = linalg::transposed_matmul(seen_embeddings, seen_prototypes);
  try {
    return linalg::solve_spd(gram, rhs);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(e.pivot(), hint);
  }
}

linalg::Matrix unseen_prototypes(const linalg::Matrix& projection, const linalg::Matrix& unseen_embeddings) {
  if (unseen_embeddings.cols() != projection.rows()) {
    throw ShapeError("unseen embeddings have " + std::to_string(unseen_embeddings.cols()) +
                     " columns, projection expects " + std::to_string(projection.rows()));
  }
  return linalg::matmul(unseen_embeddings, projection);
}

RuleSet visual_rules(const linalg::Matrix& seen, const linalg::Matrix& unseen, std::span<const data::ClassId> class_ids,
                     bool normalize) {
  linalg::Matrix rows = unseen.rows() == 0 ? seen : linalg::vstack(seen, unseen);
  if (normalize) rows = normalize_rows(rows);
  return RuleSet(std::move(rows), {class_ids.begin(), class_ids.end()}, RuleKind::kVisual, normalize);
}

double select_lambda_cv(const linalg::Matrix& seen_embeddings, const linalg::Matrix& seen_prototypes,
                        std::span<const double> grid, std::size_t folds) {
  const std::size_t n = seen_embeddings.rows();
  if (grid.empty()) throw ConfigError("lambda grid is empty");
  if (folds < 2 || folds > n) throw ConfigError("cross-validation needs 2 <= folds <= number of seen classes");
  double best_lambda = grid.front();
  double best_error = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double error = 0.0;
    bool feasible = true;
    for (std::size_t f = 0; f < folds && feasible; ++f) {
      std::vector<std::size_t> train;
      std::vector<std::size_t> held;
      for (std::size_t i = 0; i < n; ++i) (i % folds == f ? held : train).push_back(i);
      try {
        const auto w = fit_projection(linalg::gather_rows(seen_embeddings, train),
                                      linalg::gather_rows(seen_prototypes, train), lambda);
        const auto pred = unseen_prototypes(w, linalg::gather_rows(seen_embeddings, held));
        const auto diff = linalg::subtract(pred, linalg::gather_rows(seen_prototypes, held));
        for (double v : diff.data()) error += v * v;
      } catch (const SingularMatrixError&) {
        feasible = false;
      }
    }
    if (feasible && error < best_error) {
      best_error = error;
      best_lambda = lambda;
    }
  }
  if (!std::isfinite(best_error)) throw SingularMatrixError(0, "no lambda in the grid gives a solvable system");
  return best_lambda;
}

}  // namespace zslcraft::crafting
