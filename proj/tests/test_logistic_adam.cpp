#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "defectbench/models/adam.hpp"
#include "defectbench/models/logistic.hpp"
#include "test_support.hpp"

using namespace defectbench;

TEST_CASE("bce_loss frozen values") {
  // uninformative prediction: -log(0.5) = ln 2
  CHECK_THAT(bce_loss({0, 1}, {0.5, 0.5}),
             Catch::Matchers::WithinAbs(0.6931471805599453, 1e-15));
  // -(ln 0.9 + ln 0.8) / 2
  CHECK_THAT(bce_loss({1, 0}, {0.9, 0.2}),
             Catch::Matchers::WithinAbs(0.16425203348601800, 1e-14));
  // clamping keeps a confident miss finite
  CHECK(std::isfinite(bce_loss({1}, {0.0})));
  CHECK_THROWS_AS(bce_loss({}, {}), InvalidInput);
  CHECK_THROWS_AS(bce_loss({1}, {0.5, 0.5}), InvalidInput);
}

TEST_CASE("sigmoid is stable at extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK_THAT(sigmoid(800.0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(sigmoid(-800.0), Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK(std::isfinite(sigmoid(-1e308)));
}

TEST_CASE("adam first step moves by about lr in the gradient direction") {
  // with m_hat = g and v_hat = g^2, the first update is lr * g/(|g|+eps)
  std::vector<double> w = {1.0, -2.0};
  AdamState st(2, 0.05);
  adam_step(w, {0.3, -0.7}, st);
  CHECK_THAT(w[0], Catch::Matchers::WithinAbs(1.0 - 0.05, 1e-6));
  CHECK_THAT(w[1], Catch::Matchers::WithinAbs(-2.0 + 0.05, 1e-6));
  CHECK(st.t == 1);
}

TEST_CASE("adam minimizes w^2 quickly") {
  std::vector<double> w = {1.0};
  AdamState st(1, 0.1);
  for (int i = 0; i < 100; ++i) adam_step(w, {2.0 * w[0]}, st);
  CHECK(w[0] * w[0] < 0.01);
}

TEST_CASE("adam input validation") {
  std::vector<double> w = {1.0};
  AdamState st(1, 0.1);
  CHECK_THROWS_AS(adam_step(w, {1.0, 2.0}, st), InvalidInput);
  CHECK_THROWS_AS(adam_step(w, {std::nan("")}, st), InvalidInput);
}

TEST_CASE("logistic gradient matches central finite differences") {
  RandomSource rng(303);
  const std::size_t n = 20, p = 4;
  Matrix x(n, p);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = 2.0 * rng.uniform01() - 1.0;
    y[i] = rng.uniform01() < 0.5 ? 0 : 1;
  }
  y[0] = 0;
  y[1] = 1;
  std::vector<double> w(p);
  for (auto& v : w) v = rng.uniform01() - 0.5;
  const double b = 0.3, lambda = 1e-3, h = 1e-6;

  std::vector<double> gw;
  double gb;
  logistic_gradient(w, b, x, y, lambda, gw, gb);

  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double fd =
        (logistic_objective(wp, b, x, y, lambda) - logistic_objective(wm, b, x, y, lambda)) /
        (2.0 * h);
    const double rel = std::abs(gw[j] - fd) / std::max(1e-8, std::abs(fd));
    CHECK(rel <= 1e-4);
  }
  const double fdb =
      (logistic_objective(w, b + h, x, y, lambda) - logistic_objective(w, b - h, x, y, lambda)) /
      (2.0 * h);
  CHECK(std::abs(gb - fdb) / std::max(1e-8, std::abs(fdb)) <= 1e-4);
}

TEST_CASE("objective at zero weights is ln 2 plus nothing") {
  const Matrix x = Matrix::from_rows({{1.0}, {-1.0}});
  CHECK_THAT(logistic_objective({0.0}, 0.0, x, {1, 0}, 0.5),
             Catch::Matchers::WithinAbs(0.6931471805599453, 1e-15));
}

TEST_CASE("training separates a margin-separated line") {
  RandomSource rng(7);
  const std::size_t n = 100;
  Matrix x(n, 1);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    x(i, 0) = (pos ? 1.0 : -1.0) * (0.5 + rng.uniform01());
    y[i] = pos ? 1 : 0;
  }
  const auto model = train_logistic_regression(x, y, LogisticRegressionParams{});
  const auto pred = model->predict(x);
  CHECK(pred == y);
  CHECK(model->weights()[0] > 0.0);
  // monotone in the feature
  const auto probs = model->predict_proba(Matrix::from_rows({{-2.0}, {0.0}, {2.0}}));
  CHECK(probs[0] < probs[1]);
  CHECK(probs[1] < probs[2]);
}

TEST_CASE("training objective never increases") {
  const Dataset d = testsupport::noisy_dataset(80, 3, 99);
  const auto model = train_logistic_regression(d.features, d.labels, LogisticRegressionParams{});
  const auto& log = model->training_log();
  REQUIRE(log.is_array());
  REQUIRE(log.size() >= 2);
  for (std::size_t i = 1; i < log.size(); ++i)
    CHECK(log[i].get<double>() <= log[i - 1].get<double>() + 1e-12);
}

TEST_CASE("strong L2 shrinks the weights") {
  const Dataset d = testsupport::noisy_dataset(60, 2, 5);
  LogisticRegressionParams strong;
  strong.lambda = 10.0;
  LogisticRegressionParams weak;
  weak.lambda = 0.0;
  const auto m_strong = train_logistic_regression(d.features, d.labels, strong);
  const auto m_weak = train_logistic_regression(d.features, d.labels, weak);
  double ns = 0.0, nw = 0.0;
  for (double v : m_strong->weights()) ns += v * v;
  for (double v : m_weak->weights()) nw += v * v;
  CHECK(ns < nw);
}

TEST_CASE("training is deterministic") {
  const Dataset d = testsupport::noisy_dataset(50, 2, 12);
  const auto a = train_logistic_regression(d.features, d.labels, LogisticRegressionParams{});
  const auto b = train_logistic_regression(d.features, d.labels, LogisticRegressionParams{});
  CHECK(a->weights() == b->weights());
  CHECK(a->bias() == b->bias());
}

TEST_CASE("logistic parameter validation") {
  LogisticRegressionParams p;
  p.lambda = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  LogisticRegressionParams q;
  q.max_iters = 0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("predict_proba checks dimensions and clamps to [0,1]") {
  const Dataset d = testsupport::noisy_dataset(30, 2, 8);
  const auto model = train_logistic_regression(d.features, d.labels, LogisticRegressionParams{});
  CHECK_THROWS_AS(model->predict_proba(Matrix(3, 5)), InvalidInput);
  for (double p : model->predict_proba(d.features)) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}
