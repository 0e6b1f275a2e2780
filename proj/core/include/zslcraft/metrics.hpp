#pragma once

#include <map>
#include <span>
#include <string>

#include "zslcraft/dataset.hpp"

namespace zslcraft::metrics {

/// correct_c / total_c for every class in `classes`. A class without samples is
/// a MetricError, as is a truth label outside `classes`.
std::map<data::ClassId, double> per_class_accuracy(std::span<const data::ClassId> predictions,
                                                   std::span<const data::ClassId> truths,
                                                   std::span<const data::ClassId> classes);

/// Unweighted mean over classes of per_class_accuracy.
double mean_per_class_accuracy(std::span<const data::ClassId> predictions, std::span<const data::ClassId> truths,
                               std::span<const data::ClassId> classes);

/// Standard ZSL top-1: mean per-class accuracy over unseen classes, with
/// predictions made from the unseen pool only.
double zsl_t1(std::span<const data::ClassId> predictions, std::span<const data::ClassId> truths,
              std::span<const data::ClassId> unseen_classes);

/// 2SU / (S + U), and 0 when S + U == 0.
double harmonic_mean(double s, double u) noexcept;

struct GzslScores {
  double s = 0.0;
  double u = 0.0;
  double h = 0.0;
};

/// S and U are mean per-class accuracies of each group under joint seen+unseen inference.
GzslScores gzsl_h(std::span<const data::ClassId> seen_predictions, std::span<const data::ClassId> seen_truths,
                  std::span<const data::ClassId> seen_classes, std::span<const data::ClassId> unseen_predictions,
                  std::span<const data::ClassId> unseen_truths, std::span<const data::ClassId> unseen_classes);

struct PredictionReport {
  std::map<data::ClassId, double> per_class_accuracy;
  double t1 = 0.0;
  double s = 0.0;
  double u = 0.0;
  double h = 0.0;
};

/// The `T1=`, `S=`, `U=`, `H=` lines, six decimals each.
std::string format_metrics_block(const PredictionReport& report);

}  // namespace zslcraft::metrics
