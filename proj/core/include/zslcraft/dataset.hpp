#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "zslcraft/matrix.hpp"

namespace zslcraft::data {

using ClassId = std::int32_t;

/// Seen/unseen partition plus the train/test sample split, as stored on disk.
struct SplitSets {
  std::vector<ClassId> seen;
  std::vector<ClassId> unseen;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  friend bool operator==(const SplitSets&, const SplitSets&) = default;
};

/// Labeled feature vectors with the zero-shot partition.
///
/// Training samples only come from seen classes, and every seen class has at
/// least one of them. Unseen classes contribute test samples only.
struct ZslDataset {
  linalg::Matrix features;
  std::vector<ClassId> labels;
  std::vector<ClassId> seen_classes;
  std::vector<ClassId> unseen_classes;
  std::vector<bool> train_mask;
  std::vector<bool> test_mask;

  std::size_t num_samples() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Seen classes followed by unseen classes.
  std::vector<ClassId> class_ids() const;
  bool is_seen(ClassId c) const;
  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> test_indices() const;
  SplitSets split() const;

  /// Throws ValidationError if an invariant is broken.
  void validate() const;

  friend bool operator==(const ZslDataset&, const ZslDataset&) = default;
};

ZslDataset make_dataset(linalg::Matrix features, std::vector<ClassId> labels, const SplitSets& split);

/// One embedding row per class, aligned with class_ids.
struct ClassEmbeddingTable {
  linalg::Matrix embeddings;
  std::vector<ClassId> class_ids;

  std::size_t dim() const noexcept { return embeddings.cols(); }
  /// Row index of a class; throws ValidationError when absent.
  std::size_t row_of(ClassId c) const;
  bool contains(ClassId c) const;
  /// Embedding rows of the requested classes, in request order.
  linalg::Matrix select(std::span<const ClassId> ids) const;

  void validate() const;

  friend bool operator==(const ClassEmbeddingTable&, const ClassEmbeddingTable&) = default;
};

struct LabeledRows {
  linalg::Matrix features;
  std::vector<ClassId> labels;
  std::vector<std::size_t> indices;
};

/// Serves dataset rows to pipeline stages and records every row handed out.
///
/// Training-side stages only call train_rows(), which refuses to return a row
/// with an unseen label. The record lets tests audit that no unseen-labeled
/// sample ever reached a training stage.
class DataServer {
 public:
  explicit DataServer(const ZslDataset& dataset) : dataset_(&dataset) {}

  const ZslDataset& dataset() const noexcept { return *dataset_; }

  LabeledRows train_rows();
  LabeledRows seen_test_rows();
  LabeledRows unseen_test_rows();

  const std::set<std::size_t>& served() const noexcept { return served_; }
  bool served_unseen() const;

 private:
  LabeledRows serve(const std::vector<std::size_t>& indices);

  const ZslDataset* dataset_;
  std::set<std::size_t> served_;
};

}  // namespace zslcraft::data
