#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "defectbench/models/ann.hpp"
#include "defectbench/models/serialize.hpp"
#include "defectbench/models/train.hpp"
#include "test_support.hpp"

using namespace defectbench;

TEST_CASE("zero-weight network outputs one half") {
  Mlp net(3, 4);
  CHECK(net.params().size() == 4 * 3 + 4 + 4 + 1);
  const double row[3] = {1.0, -2.0, 3.0};
  CHECK(net.forward(row) == 0.5);
  const Matrix x = Matrix::from_rows({{1.0, -2.0, 3.0}});
  CHECK_THAT(ann_loss(net, x, {1}, {0}),
             Catch::Matchers::WithinAbs(0.6931471805599453, 1e-15));
}

TEST_CASE("parameter layout offsets") {
  const Mlp net(5, 3);
  CHECK(net.w1_off() == 0);
  CHECK(net.b1_off() == 15);
  CHECK(net.w2_off() == 18);
  CHECK(net.b2_off() == 21);
  CHECK(net.params().size() == 22);
  CHECK_THROWS_AS(Mlp(0, 4), InvalidInput);
}

TEST_CASE("glorot init respects layer-wise bounds and zeroes biases") {
  RandomSource rng(5);
  const Mlp net = Mlp::glorot(8, 16, rng);
  const double lim1 = std::sqrt(6.0 / 24.0), lim2 = std::sqrt(6.0 / 17.0);
  const auto& w = net.params();
  for (std::size_t i = 0; i < net.b1_off(); ++i) CHECK(std::abs(w[i]) <= lim1);
  for (std::size_t i = net.b1_off(); i < net.w2_off(); ++i) CHECK(w[i] == 0.0);
  for (std::size_t i = net.w2_off(); i < net.b2_off(); ++i) CHECK(std::abs(w[i]) <= lim2);
  CHECK(w[net.b2_off()] == 0.0);
}

TEST_CASE("backprop gradient matches central finite differences") {
  RandomSource rng(77);
  const std::size_t n = 20, p = 3, h = 4;
  Matrix x(n, p);
  std::vector<int> y(n);
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = i;
    for (std::size_t j = 0; j < p; ++j) x(i, j) = 2.0 * rng.uniform01() - 1.0;
    y[i] = i % 2;
  }
  Mlp net = Mlp::glorot(p, h, rng);
  for (double& v : net.params()) v += 0.1 * (2.0 * rng.uniform01() - 1.0);  // free the biases

  const auto grad = ann_gradient(net, x, y, rows);
  const double step = 1e-6;
  for (std::size_t k = 0; k < net.params().size(); ++k) {
    Mlp plus = net, minus = net;
    plus.params()[k] += step;
    minus.params()[k] -= step;
    const double fd =
        (ann_loss(plus, x, y, rows) - ann_loss(minus, x, y, rows)) / (2.0 * step);
    const double rel = std::abs(grad[k] - fd) / std::max(1e-8, std::abs(fd));
    CHECK(rel <= 1e-4);
  }
}

TEST_CASE("stratified holdout keeps class balance") {
  std::vector<int> labels(100);
  for (std::size_t i = 0; i < 100; ++i) labels[i] = i % 2;
  RandomSource rng(3);
  const HoldoutSplit split = stratified_holdout(labels, 0.1, rng);
  REQUIRE(split.val_rows.size() == 10);
  REQUIRE(split.train_rows.size() == 90);
  std::size_t val_pos = 0;
  for (std::size_t r : split.val_rows) val_pos += labels[r];
  CHECK(val_pos == 5);
  // disjoint partition of all rows
  std::vector<std::size_t> all = split.train_rows;
  all.insert(all.end(), split.val_rows.begin(), split.val_rows.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
}

TEST_CASE("tiny holdout borrows a single row") {
  RandomSource rng(1);
  const HoldoutSplit split = stratified_holdout({0, 0, 1}, 0.1, rng);
  CHECK(split.val_rows.size() == 1);
  CHECK(split.train_rows.size() == 2);
  RandomSource rng2(1);
  CHECK_THROWS_AS(stratified_holdout({0, 1}, 0.1, rng2), InvalidInput);
  RandomSource rng3(1);
  CHECK_THROWS_AS(stratified_holdout({0, 1}, 1.5, rng3), InvalidInput);
}

TEST_CASE("ann learns separated blobs with default parameters") {
  const Dataset d = testsupport::blob_dataset(200, 2, 6.0, 52);
  RandomSource rng(derive_seed(9, "ann-holdout"));
  const HoldoutSplit split = stratified_holdout(d.labels, 0.1, rng);
  const Matrix x_train = d.features.take_rows(split.train_rows);
  const Matrix x_val = d.features.take_rows(split.val_rows);
  std::vector<int> y_train, y_val;
  for (std::size_t r : split.train_rows) y_train.push_back(d.labels[r]);
  for (std::size_t r : split.val_rows) y_val.push_back(d.labels[r]);

  const auto m = train_ann(x_train, y_train, x_val, y_val, AnnParams{}, 9);
  const auto pred_val = m->predict(x_val);
  std::size_t val_hits = 0;
  for (std::size_t i = 0; i < pred_val.size(); ++i) val_hits += pred_val[i] == y_val[i];
  CHECK(static_cast<double>(val_hits) / static_cast<double>(pred_val.size()) >= 0.95);
  const auto pred = m->predict(d.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == d.labels[i];
  CHECK(static_cast<double>(hits) / static_cast<double>(pred.size()) >= 0.9);

  // the restored weights reproduce the reported best validation loss
  const auto& log = m->training_log();
  std::vector<std::size_t> val_rows(x_val.rows());
  for (std::size_t i = 0; i < val_rows.size(); ++i) val_rows[i] = i;
  CHECK(ann_loss(m->network(), x_val, y_val, val_rows) ==
        log.at("best_val_loss").get<double>());
  CHECK(log.at("epochs_run").get<std::size_t>() >= 1);
  REQUIRE(log.at("epochs").is_array());
  CHECK(log.at("epochs").size() == log.at("epochs_run").get<std::size_t>());
}

TEST_CASE("ann training is seed-deterministic") {
  const Dataset d = testsupport::blob_dataset(60, 2, 6.0, 23);
  const Matrix x_val = Matrix::from_rows({{0.0, 0.0}, {6.0, 6.0}});
  const std::vector<int> y_val = {0, 1};
  AnnParams params;
  params.max_epochs = 5;
  const auto a = train_ann(d.features, d.labels, x_val, y_val, params, 9);
  const auto b = train_ann(d.features, d.labels, x_val, y_val, params, 9);
  CHECK(a->network().params() == b->network().params());
}

TEST_CASE("ann input validation") {
  const Dataset d = testsupport::blob_dataset(40, 2, 6.0, 2);
  const Matrix bad_val(2, 3);
  CHECK_THROWS_AS(train_ann(d.features, d.labels, bad_val, {0, 1}, AnnParams{}, 1),
                  InvalidInput);
  const Matrix x = Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(train_ann(x, {1, 1}, x, {0, 1}, AnnParams{}, 1), InvalidInput);
  AnnParams p;
  p.validation_fraction = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("ann JSON round-trip preserves the network exactly") {
  const Dataset d = testsupport::blob_dataset(50, 2, 6.0, 31);
  const Matrix x_val = Matrix::from_rows({{0.0, 0.0}, {6.0, 6.0}});
  AnnParams params;
  params.max_epochs = 3;
  const auto m = train_ann(d.features, d.labels, x_val, {0, 1}, params, 4);
  const auto restored = model_from_json(m->to_json());
  CHECK(restored->kind() == ModelKind::ann);
  CHECK(restored->predict_proba(d.features) == m->predict_proba(d.features));
}

TEST_CASE("train_model dispatches every model kind") {
  const Dataset d = testsupport::blob_dataset(80, 3, 6.0, 47);
  for (const ModelKind kind :
       {ModelKind::logistic_regression, ModelKind::naive_bayes, ModelKind::gradient_boosting,
        ModelKind::svm, ModelKind::random_forest, ModelKind::ann}) {
    ModelSpec spec;
    spec.kind = kind;
    const auto m = train_model(spec, d.features, d.labels, 3);
    REQUIRE(m != nullptr);
    CHECK(m->kind() == kind);
    const auto pred = m->predict(d.features);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == d.labels[i];
    INFO("kind " << to_string(kind));
    CHECK(static_cast<double>(hits) / static_cast<double>(pred.size()) >= 0.9);
    // serialization is closed over all kinds
    const auto restored = model_from_json(m->to_json());
    CHECK(restored->predict_proba(d.features) == m->predict_proba(d.features));
  }
}

TEST_CASE("model specs parse from JSON") {
  const ModelSpec bare = model_spec_from_json(nlohmann::json("svm"));
  CHECK(bare.kind == ModelKind::svm);
  const ModelSpec obj = model_spec_from_json(
      nlohmann::json{{"kind", "random_forest"}, {"params", {{"n_trees", 7}}}});
  CHECK(obj.kind == ModelKind::random_forest);
  CHECK(obj.forest.n_trees == 7);
  CHECK_THROWS_AS(model_spec_from_json(nlohmann::json("frobnicator")), ConfigError);
  CHECK_THROWS_AS(model_spec_from_json(nlohmann::json{{"kind", "svm"},
                                                      {"params", {{"zap", 1}}}}),
                  ConfigError);
  // round-trip through to_json
  const nlohmann::json j = to_json(obj);
  const ModelSpec again = model_spec_from_json(j);
  CHECK(again.forest.n_trees == 7);
}

TEST_CASE("model_from_json rejects malformed payloads") {
  CHECK_THROWS_AS(model_from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(model_from_json(nlohmann::json{{"kind", "zeppelin"}}), ConfigError);
  // a known kind with missing fields surfaces the JSON lookup failure
  CHECK_THROWS(model_from_json(nlohmann::json{{"kind", "naive_bayes"}}));
}
