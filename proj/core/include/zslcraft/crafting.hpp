#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zslcraft/dataset.hpp"
#include "zslcraft/matrix.hpp"
#include "zslcraft/rule_set.hpp"

namespace zslcraft::crafting {

/// S-CC rules: the class embeddings themselves, optionally L2-normalized.
RuleSet semantic_rules(const data::ClassEmbeddingTable& table, std::span<const data::ClassId> classes, bool normalize);

/// Mean feature row per class, in `classes` order.
///
/// Every row of `features` must carry a label from `classes`; callers filter to
/// seen training rows first, so an unseen-labeled row here is an error rather
/// than something to skip.
linalg::Matrix seen_prototypes(const linalg::Matrix& features, std::span<const data::ClassId> labels,
                               std::span<const data::ClassId> classes);

/// Ridge map W (q x p) minimizing ||S W - M||_F^2 + lambda ||W||_F^2, solved
/// from the normal equations (S^T S + lambda I) W = S^T M.
linalg::Matrix fit_projection(const linalg::Matrix& seen_embeddings, const linalg::Matrix& seen_prototypes,
                              double lambda);

/// Predicted prototypes E * W. Only class embeddings go in.
linalg::Matrix unseen_prototypes(const linalg::Matrix& projection, const linalg::Matrix& unseen_embeddings);

/// V-CC rules: seen prototypes stacked over (possibly empty) unseen prototypes.
RuleSet visual_rules(const linalg::Matrix& seen, const linalg::Matrix& unseen, std::span<const data::ClassId> class_ids,
                     bool normalize);

/// Row-wise L2 normalization; all-zero rows are left as they are.
linalg::Matrix normalize_rows(const linalg::Matrix& m);

/// Picks lambda from `grid` by k-fold cross-validation over seen classes: each
/// fold holds out whole classes and scores the squared error of their
/// predicted prototypes. Ties go to the earlier grid entry.
double select_lambda_cv(const linalg::Matrix& seen_embeddings, const linalg::Matrix& seen_prototypes,
                        std::span<const double> grid, std::size_t folds = 5);

}  // namespace zslcraft::crafting
