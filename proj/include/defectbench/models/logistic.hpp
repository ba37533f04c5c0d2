#pragma once

#include <cmath>
#include <vector>

#include "defectbench/models/common.hpp"

namespace defectbench {

struct LogisticRegressionParams {
  double lambda = 1e-4;  // L2 penalty weight on w (bias excluded)
  std::size_t max_iters = 5000;
  double grad_tol = 1e-6;  // stop when gradient max-norm drops below this

  void validate() const {
    if (lambda < 0.0) throw ConfigError("logistic_regression: lambda must be >= 0");
    if (max_iters == 0) throw ConfigError("logistic_regression: max_iters must be > 0");
    if (grad_tol <= 0.0) throw ConfigError("logistic_regression: grad_tol must be > 0");
  }
};

// Objective: mean BCE of sigmoid(w.x + b) plus lambda * ||w||^2.
inline double logistic_objective(const std::vector<double>& w, double b, const Matrix& x,
                                 const std::vector<int>& y, double lambda) {
  std::vector<double> p(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double z = b;
    const double* r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) z += w[j] * r[j];
    p[i] = sigmoid(z);
  }
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return bce_loss(y, p) + lambda * penalty;
}

// Analytic gradient of the objective above.
inline void logistic_gradient(const std::vector<double>& w, double b, const Matrix& x,
                              const std::vector<int>& y, double lambda,
                              std::vector<double>& grad_w, double& grad_b) {
  const std::size_t n = x.rows(), p = x.cols();
  grad_w.assign(p, 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    const double* r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) z += w[j] * r[j];
    const double err = sigmoid(z) - static_cast<double>(y[i]);
    for (std::size_t j = 0; j < p; ++j) grad_w[j] += err * r[j];
    grad_b += err;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) grad_w[j] = grad_w[j] * inv_n + 2.0 * lambda * w[j];
  grad_b *= inv_n;
}

class LogisticRegressionModel final : public TrainedModel {
public:
  LogisticRegressionModel(std::vector<double> w, double b, LogisticRegressionParams params,
                          bool converged)
      : w_(std::move(w)), b_(b), params_(params), converged_(converged) {}

  ModelKind kind() const override { return ModelKind::logistic_regression; }
  std::size_t expected_features() const override { return w_.size(); }

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }
  bool converged() const { return converged_; }

  nlohmann::json to_json() const override {
    return {{"schema_version", 1},
            {"kind", to_string(kind())},
            {"w", w_},
            {"b", b_},
            {"converged", converged_}};
  }

  void set_training_log(std::vector<double> log) { training_log_ = std::move(log); }

protected:
  std::vector<double> predict_proba_impl(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double z = b_;
      const double* r = x.row(i);
      for (std::size_t j = 0; j < x.cols(); ++j) z += w_[j] * r[j];
      out[i] = sigmoid(z);
    }
    return out;
  }

private:
  std::vector<double> w_;
  double b_ = 0.0;
  LogisticRegressionParams params_;
  bool converged_ = false;
};

// Full-batch gradient descent from zero weights with a backtracking step:
// the step halves while the objective fails to decrease and grows slowly
// after accepted moves. Runs until the gradient max-norm falls below
// grad_tol or max_iters; non-convergence is reported, not an error.
inline std::unique_ptr<LogisticRegressionModel> train_logistic_regression(
    const Matrix& x, const std::vector<int>& y, const LogisticRegressionParams& params) {
  params.validate();
  validate_training_matrix(x, y);

  const std::size_t p = x.cols();
  std::vector<double> w(p, 0.0);
  double b = 0.0;
  double step = 1.0;
  bool converged = false;
  std::vector<double> log;
  log.reserve(std::min<std::size_t>(params.max_iters, 8192));

  std::vector<double> gw;
  double gb = 0.0;
  double obj = logistic_objective(w, b, x, y, params.lambda);
  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    logistic_gradient(w, b, x, y, params.lambda, gw, gb);
    double gmax = std::abs(gb);
    for (double g : gw) gmax = std::max(gmax, std::abs(g));
    log.push_back(obj);
    if (gmax <= params.grad_tol) {
      converged = true;
      break;
    }
    std::vector<double> w_try(p);
    double b_try, obj_try;
    for (;;) {
      for (std::size_t j = 0; j < p; ++j) w_try[j] = w[j] - step * gw[j];
      b_try = b - step * gb;
      obj_try = logistic_objective(w_try, b_try, x, y, params.lambda);
      if (obj_try <= obj || step < 1e-12) break;
      step *= 0.5;
    }
    w.swap(w_try);
    b = b_try;
    obj = obj_try;
    step = std::min(step * 1.2, 1e3);
  }

  auto model = std::make_unique<LogisticRegressionModel>(std::move(w), b, params, converged);
  model->set_training_log(std::move(log));
  return model;
}

}  // namespace defectbench
