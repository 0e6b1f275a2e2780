#include "zslcraft/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "zslcraft/errors.hpp"

namespace zslcraft::metrics {

std::map<data::ClassId, double> per_class_accuracy(std::span<const data::ClassId> predictions,
                                                   std::span<const data::ClassId> truths,
                                                   std::span<const data::ClassId> classes) {
  if (predictions.size() != truths.size()) throw MetricError("predictions and truths differ in length");
  std::map<data::ClassId, std::pair<std::size_t, std::size_t>> counts;  // correct, total
  for (data::ClassId c : classes) counts[c] = {0, 0};
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto it = counts.find(truths[i]);
    if (it == counts.end()) throw MetricError("truth label " + std::to_string(truths[i]) + " outside the class set");
    ++it->second.second;
    if (predictions[i] == truths[i]) ++it->second.first;
  }
  std::map<data::ClassId, double> out;
  for (const auto& [c, ct] : counts) {
    if (ct.second == 0) throw MetricError("accuracy undefined for class " + std::to_string(c) + ": no test samples");
    out[c] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
  }
  return out;
}

double mean_per_class_accuracy(std::span<const data::ClassId> predictions, std::span<const data::ClassId> truths,
                               std::span<const data::ClassId> classes) {
  if (classes.empty()) throw MetricError("mean per-class accuracy over an empty class set");
  const auto acc = per_class_accuracy(predictions, truths, classes);
  double sum = 0.0;
  for (const auto& [c, a] : acc) sum += a;
  return sum / static_cast<double>(acc.size());
}

double zsl_t1(std::span<const data::ClassId> predictions, std::span<const data::ClassId> truths,
              std::span<const data::ClassId> unseen_classes) {
  if (unseen_classes.empty()) throw MetricError("T1 needs at least one unseen class");
  return mean_per_class_accuracy(predictions, truths, unseen_classes);
}

double harmonic_mean(double s, double u) noexcept {
  const double sum = s + u;
  return sum > 0.0 ? 2.0 * s * u / sum : 0.0;
}

GzslScores gzsl_h(std::span<const data::ClassId> seen_predictions, std::span<const data::ClassId> seen_truths,
                  std::span<const data::ClassId> seen_classes, std::span<const data::ClassId> unseen_predictions,
                  std::span<const data::ClassId> unseen_truths, std::span<const data::ClassId> unseen_classes) {
  if (seen_classes.empty() || unseen_classes.empty()) throw MetricError("H needs non-empty seen and unseen groups");
  GzslScores out;
  out.s = mean_per_class_accuracy(seen_predictions, seen_truths, seen_classes);
  out.u = mean_per_class_accuracy(unseen_predictions, unseen_truths, unseen_classes);
  out.h = harmonic_mean(out.s, out.u);
  return out;
}

std::string format_metrics_block(const PredictionReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "T1=%.6f\nS=%.6f\nU=%.6f\nH=%.6f\n", report.t1, report.s, report.u, report.h);
  return buf;
}

}  // namespace zslcraft::metrics
