#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zslcraft/dataset.hpp"
#include "zslcraft/matrix.hpp"
#include "zslcraft/model.hpp"
#include "zslcraft/rule_set.hpp"

namespace zslcraft::inference {

/// Logits f(x) . r_j for every row of `batch` against an augmented pool.
///
/// The pool must start with the model's frozen seen rules, bit for bit;
/// otherwise ConsistencyError. Rows are computed independently and written to
/// fixed slots, so `threads` never changes the result.
linalg::Matrix zsl_logits(const backbone::CraftedModel& model, const linalg::Matrix& batch,
                          const crafting::RuleSet& pool, std::size_t threads = 1);

/// Numerically stable softmax of logits / tau. Throws ValidationError for tau <= 0.
std::vector<double> softmax_temp(std::span<const double> logits, double tau);
/// Row-wise softmax_temp.
linalg::Matrix softmax_rows(const linalg::Matrix& logits, double tau);

/// Argmax with ties broken toward the lowest index.
std::size_t predict(std::span<const double> scores);

/// Plain average of two score vectors.
std::vector<double> ensemble_scores(std::span<const double> a, std::span<const double> b);

/// Per-class scores for a batch, ordered like the pool (seen block first).
struct ScoreTable {
  std::vector<data::ClassId> class_ids;
  std::vector<bool> seen_mask;
  linalg::Matrix scores;  // samples x classes
};

/// Averages two tables; their class orderings and seen masks must match exactly.
ScoreTable ensemble_scores(const ScoreTable& a, const ScoreTable& b);

/// Scores of one sample together with its decision.
struct ScoredPrediction {
  std::vector<double> class_scores;
  data::ClassId predicted_class = 0;
  std::vector<bool> seen_mask;
};

ScoredPrediction scored_prediction(const ScoreTable& table, std::size_t sample);

/// Column subset of a table (e.g. the unseen block for standard ZSL).
ScoreTable select_classes(const ScoreTable& table, std::span<const std::size_t> columns);

/// Predicted class id per sample.
std::vector<data::ClassId> predict_all(const ScoreTable& table);

}  // namespace zslcraft::inference
