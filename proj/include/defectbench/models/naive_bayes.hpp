#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "defectbench/json_util.hpp"
#include "defectbench/models/common.hpp"

namespace defectbench {

struct NaiveBayesParams {
  double variance_floor = 1e-9;

  void validate() const {
    if (variance_floor <= 0.0) throw ConfigError("naive_bayes: variance_floor must be > 0");
  }
};

// Gaussian naive Bayes: class priors from counts, per-class per-feature mean
// and (population) variance floored for stability. Posterior evaluated in the
// log domain and normalized by log-sum-exp.
class NaiveBayesModel final : public TrainedModel {
public:
  NaiveBayesModel(std::vector<double> priors, Matrix means, Matrix variances)
      : priors_(std::move(priors)), means_(std::move(means)), variances_(std::move(variances)) {}

  ModelKind kind() const override { return ModelKind::naive_bayes; }
  std::size_t expected_features() const override { return means_.cols(); }

  const std::vector<double>& priors() const { return priors_; }
  const Matrix& class_means() const { return means_; }
  const Matrix& class_variances() const { return variances_; }

  nlohmann::json to_json() const override;

protected:
  std::vector<double> predict_proba_impl(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    const std::size_t p = means_.cols();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double log_post[2];
      for (int c = 0; c < 2; ++c) {
        double lp = std::log(priors_[c]);
        for (std::size_t j = 0; j < p; ++j) {
          const double var = variances_(c, j);
          const double d = x(i, j) - means_(c, j);
          lp -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
        }
        log_post[c] = lp;
      }
      const double hi = std::max(log_post[0], log_post[1]);
      const double z0 = std::exp(log_post[0] - hi);
      const double z1 = std::exp(log_post[1] - hi);
      out[i] = z1 / (z0 + z1);
    }
    return out;
  }

private:
  std::vector<double> priors_;  // [P(0), P(1)]
  Matrix means_;                // 2 x p
  Matrix variances_;            // 2 x p, floored
};

inline nlohmann::json NaiveBayesModel::to_json() const {
  return {{"schema_version", 1},
          {"kind", to_string(kind())},
          {"priors", priors_},
          {"means", matrix_to_json(means_)},
          {"variances", matrix_to_json(variances_)}};
}

inline std::unique_ptr<NaiveBayesModel> train_gaussian_naive_bayes(
    const Matrix& x, const std::vector<int>& y, const NaiveBayesParams& params) {
  params.validate();
  validate_training_matrix(x, y);
  require_both_classes(y);

  const std::size_t n = x.rows(), p = x.cols();
  std::size_t count[2] = {0, 0};
  for (int v : y) ++count[v];

  Matrix means(2, p, 0.0), variances(2, p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = y[i];
    for (std::size_t j = 0; j < p; ++j) means(c, j) += x(i, j);
  }
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < p; ++j) means(c, j) /= static_cast<double>(count[c]);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = y[i];
    for (std::size_t j = 0; j < p; ++j) {
      const double d = x(i, j) - means(c, j);
      variances(c, j) += d * d;
    }
  }
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < p; ++j)
      variances(c, j) =
          std::max(params.variance_floor, variances(c, j) / static_cast<double>(count[c]));

  std::vector<double> priors = {static_cast<double>(count[0]) / static_cast<double>(n),
                                static_cast<double>(count[1]) / static_cast<double>(n)};
  return std::make_unique<NaiveBayesModel>(std::move(priors), std::move(means),
                                           std::move(variances));
}

}  // namespace defectbench
