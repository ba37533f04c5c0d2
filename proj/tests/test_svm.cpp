#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "defectbench/models/serialize.hpp"
#include "defectbench/models/svm.hpp"
#include "test_support.hpp"

using namespace defectbench;

TEST_CASE("two opposite points give the analytic maximum margin") {
  // x = +-1: the dual optimum is alpha = (0.5, 0.5), w = 1, b = 0, and the
  // first SMO pair update lands there exactly.
  const Matrix x = Matrix::from_rows({{1.0}, {-1.0}});
  SvmParams params;
  params.kernel = SvmKernel::linear;
  params.C = 100.0;
  SvmDualState dual;
  const auto m = train_svm(x, {1, 0}, params, 1, &dual);

  REQUIRE(dual.alphas.size() == 2);
  CHECK_THAT(dual.alphas[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK_THAT(dual.alphas[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK_THAT(m->linear_weights()[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(m->bias(), Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK(m->converged());
  CHECK(m->n_support() == 2);
  CHECK(m->predict(x) == std::vector<int>{1, 0});
}

TEST_CASE("2D margin lands between the class walls") {
  // class 0 on the x1=0 wall, class 1 on the x1=2 wall: the separator is
  // x1 = 1, i.e. w = (1, 0), b = -1.
  const Matrix x = Matrix::from_rows({{0.0, 0.0}, {0.0, 1.0}, {2.0, 0.0}, {2.0, 1.0}});
  SvmParams params;
  params.kernel = SvmKernel::linear;
  params.C = 100.0;
  const auto m = train_svm(x, {0, 0, 1, 1}, params, 3);
  const auto w = m->linear_weights();
  CHECK_THAT(w[0], Catch::Matchers::WithinAbs(1.0, 0.05));
  CHECK_THAT(w[1], Catch::Matchers::WithinAbs(0.0, 0.05));
  CHECK_THAT(m->bias(), Catch::Matchers::WithinAbs(-1.0, 0.05));
  CHECK(m->predict(x) == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("rbf kernel solves XOR where linear cannot") {
  const Matrix x = Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}});
  const std::vector<int> y = {0, 0, 1, 1};

  SvmParams rbf;
  rbf.kernel = SvmKernel::rbf;
  rbf.gamma = 1.0;
  rbf.C = 10.0;
  CHECK(train_svm(x, y, rbf, 5)->predict(x) == y);

  SvmParams linear;
  linear.kernel = SvmKernel::linear;
  linear.C = 10.0;
  const auto pred = train_svm(x, y, linear, 5)->predict(x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < 4; ++i) hits += pred[i] == y[i];
  CHECK(hits <= 3);
}

TEST_CASE("dual state satisfies the KKT feasibility conditions") {
  for (const SvmKernel kernel : {SvmKernel::linear, SvmKernel::rbf}) {
    const Dataset d = testsupport::noisy_dataset(80, 3, 200 + static_cast<int>(kernel));
    SvmParams params;
    params.kernel = kernel;
    SvmDualState dual;
    train_svm(d.features, d.labels, params, 9, &dual);

    REQUIRE(dual.alphas.size() == 80);
    double sum = 0.0;
    for (std::size_t i = 0; i < dual.alphas.size(); ++i) {
      CHECK(dual.alphas[i] >= 0.0);
      CHECK(dual.alphas[i] <= dual.C + 1e-12);
      sum += dual.alphas[i] * dual.signed_labels[i];
    }
    CHECK(std::abs(sum) <= 1e-6);
  }
}

TEST_CASE("separated blobs are classified nearly perfectly") {
  const Dataset d = testsupport::blob_dataset(120, 2, 6.0, 14);
  const auto m = train_svm(d.features, d.labels, SvmParams{}, 2);
  const auto pred = m->predict(d.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == d.labels[i];
  CHECK(static_cast<double>(hits) / static_cast<double>(pred.size()) >= 0.95);
  CHECK(m->training_log().at("budget_hit").get<bool>() == false);
}

TEST_CASE("coincident opposite-label points do not break training") {
  // eta = 0 for the only candidate pair, so SMO skips it forever and the
  // solver settles on the empty model
  const Matrix x = Matrix::from_rows({{1.0}, {1.0}});
  const auto m = train_svm(x, {0, 1}, SvmParams{}, 1);
  CHECK(m->n_support() == 0);
  CHECK(m->converged());
}

TEST_CASE("svm training is seed-deterministic") {
  const Dataset d = testsupport::noisy_dataset(60, 2, 44);
  const auto a = train_svm(d.features, d.labels, SvmParams{}, 7);
  const auto b = train_svm(d.features, d.labels, SvmParams{}, 7);
  CHECK(a->to_json() == b->to_json());
}

TEST_CASE("default gamma falls back to 1/p") {
  const Dataset d = testsupport::blob_dataset(40, 4, 6.0, 6);
  const auto m = train_svm(d.features, d.labels, SvmParams{}, 1);
  CHECK(m->to_json().at("gamma").get<double>() == 0.25);
}

TEST_CASE("linear_weights refuses rbf models") {
  const Dataset d = testsupport::blob_dataset(40, 2, 6.0, 6);
  const auto m = train_svm(d.features, d.labels, SvmParams{}, 1);
  CHECK_THROWS_AS(m->linear_weights(), InvalidInput);
}

TEST_CASE("svm input and parameter validation") {
  const Matrix x = Matrix::from_rows({{0.0}, {1.0}});
  CHECK_THROWS_AS(train_svm(x, {1, 1}, SvmParams{}, 1), InvalidInput);
  SvmParams p;
  p.C = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  SvmParams q;
  q.tol = 0.0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("svm JSON round-trip preserves the decision function") {
  const Dataset d = testsupport::noisy_dataset(50, 3, 66);
  const auto m = train_svm(d.features, d.labels, SvmParams{}, 4);
  const auto restored = model_from_json(m->to_json());
  CHECK(restored->kind() == ModelKind::svm);
  CHECK(restored->predict_proba(d.features) == m->predict_proba(d.features));
}
