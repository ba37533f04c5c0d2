#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "defectbench/error.hpp"
#include "defectbench/matrix.hpp"

namespace defectbench {

enum class ModelKind {
  logistic_regression,
  naive_bayes,
  gradient_boosting,
  svm,
  random_forest,
  ann,
};

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logistic_regression: return "logistic_regression";
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    case ModelKind::svm: return "svm";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::ann: return "ann";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logistic_regression") return ModelKind::logistic_regression;
  if (s == "naive_bayes") return ModelKind::naive_bayes;
  if (s == "gradient_boosting") return ModelKind::gradient_boosting;
  if (s == "svm") return ModelKind::svm;
  if (s == "random_forest") return ModelKind::random_forest;
  if (s == "ann") return ModelKind::ann;
  throw ConfigError("unknown model kind: " + s);
}

constexpr double kProbClamp = 1e-12;  // clamp before any log

inline double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Mean binary cross-entropy, -(y*log(p) + (1-y)*log(1-p)).
inline double bce_loss(const std::vector<int>& y, const std::vector<double>& y_hat) {
  if (y.empty()) throw InvalidInput("bce_loss: empty input");
  if (y.size() != y_hat.size()) throw InvalidInput("bce_loss: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(y_hat[i]);
    sum -= y[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(y.size());
}

inline void validate_training_matrix(const Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0 || x.cols() == 0)
    throw InvalidInput("training data is empty");
  if (x.rows() != y.size())
    throw InvalidInput("feature rows and label count disagree");
  if (!x.all_finite()) throw InvalidInput("training features contain non-finite values");
  for (int v : y)
    if (v != 0 && v != 1) throw InvalidInput("labels must be 0/1");
}

inline void require_both_classes(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) (v ? pos : neg) = true;
  if (!pos || !neg) throw InvalidInput("training labels contain a single class");
}

// Uniform contract over all six classifier families. Probabilities are in
// [0,1]; predict thresholds them with ties (exactly == threshold) going to
// class 1.
class TrainedModel {
public:
  virtual ~TrainedModel() = default;
  virtual ModelKind kind() const = 0;
  virtual std::size_t expected_features() const = 0;
  virtual nlohmann::json to_json() const = 0;

  std::vector<double> predict_proba(const Matrix& x) const {
    if (x.cols() != expected_features())
      throw InvalidInput(std::string(to_string(kind())) + ": expected " +
                         std::to_string(expected_features()) + " features, got " +
                         std::to_string(x.cols()));
    std::vector<double> p = predict_proba_impl(x);
    for (double& v : p) v = std::min(1.0, std::max(0.0, v));
    return p;
  }

  std::vector<int> predict(const Matrix& x, double threshold = 0.5) const {
    const std::vector<double> p = predict_proba(x);
    std::vector<int> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= threshold ? 1 : 0;
    return out;
  }

  // Whatever the trainer recorded: per-iteration losses for the batch
  // learners, pass/update counters for SMO, per-epoch curves for the net.
  const nlohmann::json& training_log() const { return training_log_; }

protected:
  virtual std::vector<double> predict_proba_impl(const Matrix& x) const = 0;
  nlohmann::json training_log_;
};

}  // namespace defectbench
