#include "zslcraft/dataset.hpp"

#include <algorithm>
#include <string>

#include "zslcraft/errors.hpp"

namespace zslcraft::data {
namespace {

bool contains_id(const std::vector<ClassId>& ids, ClassId c) {
  return std::find(ids.begin(), ids.end(), c) != ids.end();
}

void require_unique(const std::vector<ClassId>& ids, const char* what) {
  std::set<ClassId> seen;
  for (ClassId c : ids) {
    if (!seen.insert(c).second) {
      throw ValidationError(std::string(what) + ": duplicate class id " + std::to_string(c));
    }
  }
}

}  // namespace

std::vector<ClassId> ZslDataset::class_ids() const {
  std::vector<ClassId> ids = seen_classes;
  ids.insert(ids.end(), unseen_classes.begin(), unseen_classes.end());
  return ids;
}

bool ZslDataset::is_seen(ClassId c) const { return contains_id(seen_classes, c); }

std::vector<std::size_t> ZslDataset::train_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < train_mask.size(); ++i)
    if (train_mask[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> ZslDataset::test_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < test_mask.size(); ++i)
    if (test_mask[i]) out.push_back(i);
  return out;
}

SplitSets ZslDataset::split() const {
  return SplitSets{seen_classes, unseen_classes, train_indices(), test_indices()};
}

void ZslDataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n) {
    throw ValidationError("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                          std::to_string(n) + " labels");
  }
  if (train_mask.size() != n || test_mask.size() != n) throw ValidationError("dataset: mask length mismatch");
  require_unique(seen_classes, "seen classes");
  require_unique(unseen_classes, "unseen classes");
  for (ClassId c : seen_classes) {
    if (contains_id(unseen_classes, c)) {
      throw ValidationError("dataset: class " + std::to_string(c) + " is both seen and unseen");
    }
  }
  std::set<ClassId> with_train;
  for (std::size_t i = 0; i < n; ++i) {
    const ClassId c = labels[i];
    const bool seen = contains_id(seen_classes, c);
    if (!seen && !contains_id(unseen_classes, c)) {
      throw ValidationError("dataset: sample " + std::to_string(i) + " has label " + std::to_string(c) +
                            " outside seen/unseen classes");
    }
    if (train_mask[i]) {
      if (!seen) {
        throw ValidationError("dataset: training sample " + std::to_string(i) + " belongs to unseen class " +
                              std::to_string(c));
      }
      with_train.insert(c);
    }
  }
  for (ClassId c : seen_classes) {
    if (!with_train.contains(c)) {
      throw ValidationError("dataset: seen class " + std::to_string(c) + " has no training sample");
    }
  }
}

ZslDataset make_dataset(linalg::Matrix features, std::vector<ClassId> labels, const SplitSets& split) {
  ZslDataset ds;
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.seen_classes = split.seen;
  ds.unseen_classes = split.unseen;
  const std::size_t n = ds.labels.size();
  ds.train_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  for (std::size_t i : split.train) {
    if (i >= n) throw ValidationError("split: train index " + std::to_string(i) + " out of range");
    ds.train_mask[i] = true;
  }
  for (std::size_t i : split.test) {
    if (i >= n) throw ValidationError("split: test index " + std::to_string(i) + " out of range");
    if (ds.train_mask[i]) throw ValidationError("split: sample " + std::to_string(i) + " is both train and test");
    ds.test_mask[i] = true;
  }
  ds.validate();
  return ds;
}

std::size_t ClassEmbeddingTable::row_of(ClassId c) const {
  const auto it = std::find(class_ids.begin(), class_ids.end(), c);
  if (it == class_ids.end()) throw ValidationError("class id " + std::to_string(c) + " not in embedding table");
  return static_cast<std::size_t>(it - class_ids.begin());
}

bool ClassEmbeddingTable::contains(ClassId c) const { return contains_id(class_ids, c); }

linalg::Matrix ClassEmbeddingTable::select(std::span<const ClassId> ids) const {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (ClassId c : ids) rows.push_back(row_of(c));
  return linalg::gather_rows(embeddings, rows);
}

void ClassEmbeddingTable::validate() const {
  if (embeddings.rows() != class_ids.size()) {
    throw ValidationError("embedding table: " + std::to_string(embeddings.rows()) + " rows for " +
                          std::to_string(class_ids.size()) + " class ids");
  }
  require_unique(class_ids, "embedding table");
  for (std::size_t r = 0; r < embeddings.rows(); ++r) {
    const auto row = embeddings.row(r);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      throw ValidationError("embedding table: class " + std::to_string(class_ids[r]) + " has an all-zero row");
    }
  }
}

LabeledRows DataServer::serve(const std::vector<std::size_t>& indices) {
  LabeledRows out;
  out.features = linalg::gather_rows(dataset_->features, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.labels.push_back(dataset_->labels[i]);
    served_.insert(i);
  }
  out.indices = indices;
  return out;
}

LabeledRows DataServer::train_rows() {
  const auto idx = dataset_->train_indices();
  for (std::size_t i : idx) {
    if (!dataset_->is_seen(dataset_->labels[i])) {
      throw ValidationError("refusing to serve unseen-labeled sample " + std::to_string(i) + " for training");
    }
  }
  return serve(idx);
}

LabeledRows DataServer::seen_test_rows() {
  std::vector<std::size_t> idx;
  for (std::size_t i : dataset_->test_indices())
    if (dataset_->is_seen(dataset_->labels[i])) idx.push_back(i);
  return serve(idx);
}

LabeledRows DataServer::unseen_test_rows() {
  std::vector<std::size_t> idx;
  for (std::size_t i : dataset_->test_indices())
    if (!dataset_->is_seen(dataset_->labels[i])) idx.push_back(i);
  return serve(idx);
}

bool DataServer::served_unseen() const {
  return std::any_of(served_.begin(), served_.end(),
                     [this](std::size_t i) { return !dataset_->is_seen(dataset_->labels[i]); });
}

}  // namespace zslcraft::data
