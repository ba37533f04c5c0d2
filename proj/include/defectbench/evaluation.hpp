#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "defectbench/dataset.hpp"
#include "defectbench/models/train.hpp"
#include "defectbench/pipeline.hpp"
#include "defectbench/rng.hpp"

namespace defectbench {

// Stratified k-fold assignment. Within each class the (shuffled) members are
// dealt round-robin, and the dealing start rotates by the remainder between
// classes so no fold systematically collects the leftovers. Fold sizes differ
// by at most one, and so do per-class counts.
inline std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                              std::size_t k,
                                                              RandomSource& rng) {
  if (k < 2) throw InvalidInput("stratified_kfold: k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidInput("stratified_kfold: labels must be 0/1");
    by_class[labels[i]].push_back(i);
  }
  for (const auto& idx : by_class)
    if (!idx.empty() && idx.size() < k)
      throw InvalidInput("stratified_kfold: a class has fewer members than folds");

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t start = 0;
  for (auto& idx : by_class) {
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) folds[(start + i) % k].push_back(idx[i]);
    start = (start + idx.size() % k) % k;
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  void add(int truth, int predicted) {
    if (truth == 1)
      (predicted == 1 ? tp : fn) += 1;
    else
      (predicted == 1 ? fp : tn) += 1;
  }
};

inline Confusion confusion_from_predictions(const std::vector<int>& truth,
                                            const std::vector<int>& predicted) {
  if (truth.size() != predicted.size())
    throw InvalidInput("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) c.add(truth[i], predicted[i]);
  return c;
}

// Accuracy/precision/recall/F1 with explicit degenerate-denominator flags: a
// metric whose denominator is zero reports 0 and sets its flag.
struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

inline ClassificationMetrics classification_metrics(const Confusion& c) {
  if (c.total() == 0) throw InvalidInput("classification_metrics: empty confusion");
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp == 0) {
    m.precision_defined = false;
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall_defined = false;
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (!m.precision_defined || !m.recall_defined || m.precision + m.recall == 0.0) {
    m.f1_defined = false;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

struct FoldDetail {
  std::size_t fold_index = 0;
  std::vector<std::size_t> test_rows;
  Confusion confusion;
  double accuracy = 0.0;
  double train_time_ms = 0.0;
  // FNV-1a over the serialized fitted pipeline + model; two runs with the
  // same seed must agree fold by fold.
  std::uint64_t state_hash = 0;
};

struct MetricsReport {
  Confusion pooled;
  ClassificationMetrics pooled_metrics;
  std::vector<double> per_fold_accuracy;
  double mean_accuracy = 0.0;   // mean of the per-fold accuracies
  double std_accuracy = 0.0;    // sample standard deviation across folds
};

inline MetricsReport summarize_folds(const std::vector<FoldDetail>& folds) {
  if (folds.empty()) throw InvalidInput("summarize_folds: no folds");
  MetricsReport r;
  for (const FoldDetail& f : folds) {
    r.pooled.tp += f.confusion.tp;
    r.pooled.fp += f.confusion.fp;
    r.pooled.tn += f.confusion.tn;
    r.pooled.fn += f.confusion.fn;
    r.per_fold_accuracy.push_back(f.accuracy);
  }
  r.pooled_metrics = classification_metrics(r.pooled);
  double sum = 0.0;
  for (double a : r.per_fold_accuracy) sum += a;
  r.mean_accuracy = sum / static_cast<double>(folds.size());
  if (folds.size() > 1) {
    double ss = 0.0;
    for (double a : r.per_fold_accuracy) ss += (a - r.mean_accuracy) * (a - r.mean_accuracy);
    r.std_accuracy = std::sqrt(ss / static_cast<double>(folds.size() - 1));
  }
  return r;
}

struct CvResult {
  std::vector<FoldDetail> folds;
  MetricsReport report;
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

// Per-fold protocol: fit the preprocessing pipeline on the training split
// only, transform both splits, train, score the held-out fold. Fold layout
// and every model's substream derive from the one seed.
inline CvResult cross_validate(const ModelSpec& spec, const Dataset& d,
                               const PipelineConfig& pipeline_config, std::size_t k,
                               std::uint64_t seed) {
  spec.validate();
  pipeline_config.validate();
  validate_for_training(d);

  RandomSource fold_rng(derive_seed(seed, "cv-folds"));
  const std::vector<std::vector<std::size_t>> folds = stratified_kfold(d.labels, k, fold_rng);

  CvResult result;
  result.k = k;
  result.seed = seed;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(train_rows.begin(), train_rows.end());

    Dataset train_split;
    train_split.name = d.name;
    train_split.feature_names = d.feature_names;
    train_split.features = d.features.take_rows(train_rows);
    Matrix x_test = d.features.take_rows(folds[f]);
    std::vector<int> y_test;
    for (std::size_t r : train_rows) train_split.labels.push_back(d.labels[r]);
    for (std::size_t r : folds[f]) y_test.push_back(d.labels[r]);
    const std::vector<int>& y_train = train_split.labels;

    const auto t0 = std::chrono::steady_clock::now();
    const FittedPipeline pipe = fit_pipeline(train_split, pipeline_config);
    const Matrix x_train_t = apply_pipeline(pipe, train_split.features);
    const Matrix x_test_t = apply_pipeline(pipe, x_test);
    const std::uint64_t model_seed = derive_seed(seed, "cv-model-" + std::to_string(f));
    const std::unique_ptr<TrainedModel> model = train_model(spec, x_train_t, y_train, model_seed);
    const auto t1 = std::chrono::steady_clock::now();

    FoldDetail detail;
    detail.fold_index = f;
    detail.test_rows = folds[f];
    const std::vector<int> predicted = model->predict(x_test_t);
    detail.confusion = confusion_from_predictions(y_test, predicted);
    detail.accuracy = classification_metrics(detail.confusion).accuracy;
    detail.train_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    detail.state_hash =
        fnv1a64(pipeline_to_json(pipe).dump() + "\n" + model->to_json().dump());
    result.folds.push_back(std::move(detail));
  }
  result.report = summarize_folds(result.folds);
  return result;
}

}  // namespace defectbench
