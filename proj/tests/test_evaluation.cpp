#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <numeric>

#include "defectbench/evaluation.hpp"
#include "test_support.hpp"

using namespace defectbench;

namespace {

struct FoldStats {
  std::size_t min_size, max_size, min_pos, max_pos;
};

FoldStats fold_stats(const std::vector<std::vector<std::size_t>>& folds,
                     const std::vector<int>& labels) {
  FoldStats s{labels.size(), 0, labels.size(), 0};
  for (const auto& f : folds) {
    std::size_t pos = 0;
    for (std::size_t r : f) pos += labels[r];
    s.min_size = std::min(s.min_size, f.size());
    s.max_size = std::max(s.max_size, f.size());
    s.min_pos = std::min(s.min_pos, pos);
    s.max_pos = std::max(s.max_pos, pos);
  }
  return s;
}

void check_partition(const std::vector<std::vector<std::size_t>>& folds, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto& f : folds) all.insert(all.end(), f.begin(), f.end());
  REQUIRE(all.size() == n);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == i);
}

}  // namespace

TEST_CASE("balanced data splits into perfectly even folds") {
  std::vector<int> labels(10);
  for (std::size_t i = 0; i < 10; ++i) labels[i] = i % 2;
  RandomSource rng(1);
  const auto folds = stratified_kfold(labels, 5, rng);
  REQUIRE(folds.size() == 5);
  const FoldStats s = fold_stats(folds, labels);
  CHECK(s.min_size == 2);
  CHECK(s.max_size == 2);
  CHECK(s.min_pos == 1);
  CHECK(s.max_pos == 1);
  check_partition(folds, 10);
}

TEST_CASE("defect-rate shaped label vectors stay stratified at k=10") {
  // (instances, faulty) pairs matching the benchmark datasets
  const std::pair<std::size_t, std::size_t> shapes[] = {
      {498, 49}, {10885, 2106}, {2109, 326}, {522, 107}, {1109, 77}, {130, 11}, {145, 65}};
  for (const auto& [n, pos] : shapes) {
    const std::vector<int> labels = testsupport::label_vector(n, pos, 42);
    RandomSource rng(7);
    const auto folds = stratified_kfold(labels, 10, rng);
    const FoldStats s = fold_stats(folds, labels);
    INFO("n=" << n << " pos=" << pos);
    CHECK(s.max_size - s.min_size <= 1);
    CHECK(s.max_pos - s.min_pos <= 1);
    check_partition(folds, n);
  }
}

TEST_CASE("fold layout is a deterministic function of the seed") {
  const std::vector<int> labels = testsupport::label_vector(100, 30, 9);
  RandomSource a(4), b(4), c(5);
  const auto fa = stratified_kfold(labels, 10, a);
  CHECK(fa == stratified_kfold(labels, 10, b));
  CHECK(fa != stratified_kfold(labels, 10, c));
}

TEST_CASE("kfold input validation") {
  RandomSource rng(1);
  CHECK_THROWS_AS(stratified_kfold({0, 1, 0, 1}, 1, rng), InvalidInput);
  CHECK_THROWS_AS(stratified_kfold({0, 0, 1}, 2, rng), InvalidInput);
  CHECK_THROWS_AS(stratified_kfold({0, 2, 1}, 2, rng), InvalidInput);
}

TEST_CASE("confusion counts and metrics hand case") {
  const Confusion c = confusion_from_predictions({1, 1, 0, 0, 0, 0, 0, 0, 0, 1},
                                                 {1, 0, 1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(c.tp == 1);
  CHECK(c.fn == 2);
  CHECK(c.fp == 1);
  CHECK(c.tn == 6);
  CHECK(c.total() == 10);
  CHECK_THROWS_AS(confusion_from_predictions({1}, {1, 0}), InvalidInput);

  const ClassificationMetrics m = classification_metrics(Confusion{1, 1, 7, 1});
  CHECK(m.accuracy == 0.8);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 0.5);
  CHECK(m.f1 == 0.5);
  CHECK(m.precision_defined);
}

TEST_CASE("degenerate denominators are flagged, not poisoned") {
  const ClassificationMetrics m = classification_metrics(Confusion{0, 0, 5, 0});
  CHECK(m.accuracy == 1.0);
  CHECK_FALSE(m.precision_defined);
  CHECK_FALSE(m.recall_defined);
  CHECK_FALSE(m.f1_defined);
  CHECK(m.precision == 0.0);
  CHECK_THROWS_AS(classification_metrics(Confusion{}), InvalidInput);
}

TEST_CASE("an all-negative cm1-shaped predictor scores 449/498") {
  const std::vector<int> labels = testsupport::label_vector(498, 49, 1);
  const std::vector<int> all_negative(498, 0);
  const Confusion c = confusion_from_predictions(labels, all_negative);
  CHECK(c.tn == 449);
  CHECK(c.fn == 49);
  const double acc = classification_metrics(c).accuracy;
  CHECK(acc == 449.0 / 498.0);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * acc);
  CHECK(std::string(buf) == "90.2");
}

TEST_CASE("summarize_folds pools confusions and averages accuracies") {
  FoldDetail a, b;
  a.confusion = Confusion{1, 1, 7, 1};  // accuracy 0.8
  a.accuracy = 0.8;
  b.confusion = Confusion{2, 0, 7, 1};  // accuracy 0.9
  b.accuracy = 0.9;
  const MetricsReport r = summarize_folds({a, b});
  CHECK(r.pooled.total() == 20);
  CHECK(r.pooled.tp == 3);
  CHECK_THAT(r.mean_accuracy, Catch::Matchers::WithinAbs(0.85, 1e-15));
  CHECK_THAT(r.std_accuracy, Catch::Matchers::WithinAbs(0.05 * std::sqrt(2.0), 1e-12));
  CHECK_THROWS_AS(summarize_folds({}), InvalidInput);
}

TEST_CASE("cross_validate scores separable data highly") {
  const Dataset d = testsupport::blob_dataset(100, 3, 6.0, 64);
  for (const ModelKind kind : {ModelKind::logistic_regression, ModelKind::random_forest}) {
    ModelSpec spec;
    spec.kind = kind;
    const CvResult cv = cross_validate(spec, d, PipelineConfig{}, 5, 11);
    REQUIRE(cv.folds.size() == 5);
    CHECK(cv.report.pooled.total() == 100);
    INFO("kind " << to_string(kind));
    CHECK(cv.report.mean_accuracy >= 0.95);
    // the reported mean is exactly the mean of the per-fold accuracies
    const double manual = std::accumulate(cv.report.per_fold_accuracy.begin(),
                                          cv.report.per_fold_accuracy.end(), 0.0) /
                          5.0;
    CHECK(std::abs(cv.report.mean_accuracy - manual) <= 1e-12);
    std::vector<std::vector<std::size_t>> folds;
    for (const auto& f : cv.folds) folds.push_back(f.test_rows);
    check_partition(folds, 100);
  }
}

TEST_CASE("cross_validate is deterministic given the seed") {
  const Dataset d = testsupport::noisy_dataset(60, 3, 15);
  ModelSpec spec;
  spec.kind = ModelKind::random_forest;
  spec.forest.n_trees = 5;
  const CvResult a = cross_validate(spec, d, PipelineConfig{}, 3, 21);
  const CvResult b = cross_validate(spec, d, PipelineConfig{}, 3, 21);
  for (std::size_t f = 0; f < 3; ++f) {
    CHECK(a.folds[f].state_hash == b.folds[f].state_hash);
    CHECK(a.folds[f].state_hash != 0);
    CHECK(a.folds[f].accuracy == b.folds[f].accuracy);
  }
}

TEST_CASE("held-out rows never influence their own fold's fit") {
  // perturbing only fold 0's feature rows must leave fold 0's fitted
  // pipeline+model (trained without those rows) bit-identical, while the
  // other folds, which train on the perturbed rows, shift
  const std::uint64_t seed = 5;
  const Dataset d = testsupport::blob_dataset(60, 2, 6.0, 33);
  RandomSource layout_rng(derive_seed(seed, "cv-folds"));
  const auto folds = stratified_kfold(d.labels, 3, layout_rng);

  Dataset perturbed = d;
  for (std::size_t r : folds[0])
    for (std::size_t j = 0; j < perturbed.features.cols(); ++j)
      perturbed.features(r, j) += 137.5;

  ModelSpec spec;  // logistic regression: fully deterministic fit
  const CvResult base = cross_validate(spec, d, PipelineConfig{}, 3, seed);
  const CvResult moved = cross_validate(spec, perturbed, PipelineConfig{}, 3, seed);

  REQUIRE(base.folds[0].test_rows == folds[0]);
  CHECK(base.folds[0].state_hash == moved.folds[0].state_hash);
  CHECK(base.folds[1].state_hash != moved.folds[1].state_hash);
  CHECK(base.folds[2].state_hash != moved.folds[2].state_hash);
}

TEST_CASE("cross_validate rejects unusable inputs") {
  const Dataset d = testsupport::blob_dataset(20, 2, 6.0, 3);
  ModelSpec spec;
  CHECK_THROWS_AS(cross_validate(spec, d, PipelineConfig{}, 1, 1), InvalidInput);
  CHECK_THROWS_AS(cross_validate(spec, d, PipelineConfig{}, 11, 1), InvalidInput);

  Dataset missing = d;
  missing.features(0, 0) = std::nan("");
  CHECK_THROWS_AS(cross_validate(spec, missing, PipelineConfig{}, 2, 1), InvalidInput);
}
