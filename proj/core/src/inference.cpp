#include "zslcraft/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zslcraft/errors.hpp"
#include "zslcraft/parallel.hpp"

namespace zslcraft::inference {
namespace {
constexpr std::size_t kChunkRows = 64;
}

linalg::Matrix zsl_logits(const backbone::CraftedModel& model, const linalg::Matrix& batch,
                          const crafting::RuleSet& pool, std::size_t threads) {
  if (pool.dim() != model.extractor.output_dim()) {
    throw ShapeError("pool rule dimension " + std::to_string(pool.dim()) + " != feature dimension " +
                     std::to_string(model.extractor.output_dim()));
  }
  if (!pool.has_prefix(model.seen_rules)) {
    throw ConsistencyError("the rule pool does not start with the model's frozen seen rules");
  }
  linalg::Matrix logits(batch.rows(), pool.size());
  const std::size_t chunks = (batch.rows() + kChunkRows - 1) / kChunkRows;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kChunkRows;
    const std::size_t end = std::min(batch.rows(), begin + kChunkRows);
    std::vector<std::size_t> rows(end - begin);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
    const linalg::Matrix part =
        linalg::matmul_transposed(model.extractor.forward(linalg::gather_rows(batch, rows)), pool.rules());
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(part.row(i).begin(), part.cols(), logits.row(begin + i).begin());
  });
  return logits;
}

std::vector<double> softmax_temp(std::span<const double> logits, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("softmax temperature must be > 0");
  if (logits.empty()) return {};
  std::vector<double> out(logits.size());
  const double mx = *std::max_element(logits.begin(), logits.end()) / tau;
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] / tau - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

linalg::Matrix softmax_rows(const linalg::Matrix& logits, double tau) {
  linalg::Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto p = softmax_temp(logits.row(r), tau);
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

std::size_t predict(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("predict: empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

std::vector<double> ensemble_scores(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConsistencyError("ensemble members score different numbers of classes");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
  return out;
}

ScoreTable ensemble_scores(const ScoreTable& a, const ScoreTable& b) {
  if (a.class_ids != b.class_ids || a.seen_mask != b.seen_mask) {
    throw ConsistencyError("ensemble members use different class orderings");
  }
  if (a.scores.rows() != b.scores.rows()) throw ConsistencyError("ensemble members scored different sample counts");
  ScoreTable out{a.class_ids, a.seen_mask, linalg::Matrix(a.scores.rows(), a.scores.cols())};
  for (std::size_t r = 0; r < a.scores.rows(); ++r) {
    const auto avg = ensemble_scores(a.scores.row(r), b.scores.row(r));
    std::copy(avg.begin(), avg.end(), out.scores.row(r).begin());
  }
  return out;
}

ScoredPrediction scored_prediction(const ScoreTable& table, std::size_t sample) {
  ScoredPrediction p;
  const auto row = table.scores.row(sample);
  p.class_scores.assign(row.begin(), row.end());
  p.predicted_class = table.class_ids[predict(row)];
  p.seen_mask = table.seen_mask;
  return p;
}

ScoreTable select_classes(const ScoreTable& table, std::span<const std::size_t> columns) {
  ScoreTable out;
  out.scores = linalg::Matrix(table.scores.rows(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= table.class_ids.size()) throw ShapeError("class column out of range");
    out.class_ids.push_back(table.class_ids[columns[j]]);
    out.seen_mask.push_back(table.seen_mask[columns[j]]);
    for (std::size_t r = 0; r < table.scores.rows(); ++r) out.scores(r, j) = table.scores(r, columns[j]);
  }
  return out;
}

std::vector<data::ClassId> predict_all(const ScoreTable& table) {
  std::vector<data::ClassId> out(table.scores.rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = table.class_ids[predict(table.scores.row(r))];
  return out;
}

}  // namespace zslcraft::inference
