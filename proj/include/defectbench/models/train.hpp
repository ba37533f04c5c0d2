#pragma once

#include <memory>
#include <string>

#include "defectbench/models/ann.hpp"
#include "defectbench/models/gradient_boosting.hpp"
#include "defectbench/models/logistic.hpp"
#include "defectbench/models/naive_bayes.hpp"
#include "defectbench/models/random_forest.hpp"
#include "defectbench/models/svm.hpp"

namespace defectbench {

namespace detail {

inline void check_param_keys(const nlohmann::json& j,
                             std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError("unknown model parameter: " + it.key());
  }
}

}  // namespace detail

inline nlohmann::json to_json(const LogisticRegressionParams& p) {
  return {{"lambda", p.lambda}, {"max_iters", p.max_iters}, {"grad_tol", p.grad_tol}};
}

inline LogisticRegressionParams logistic_params_from_json(const nlohmann::json& j) {
  detail::check_param_keys(j, {"lambda", "max_iters", "grad_tol"});
  LogisticRegressionParams p;
  p.lambda = j.value("lambda", p.lambda);
  p.max_iters = j.value("max_iters", p.max_iters);
  p.grad_tol = j.value("grad_tol", p.grad_tol);
  return p;
}

inline nlohmann::json to_json(const NaiveBayesParams& p) {
  return {{"variance_floor", p.variance_floor}};
}

inline NaiveBayesParams naive_bayes_params_from_json(const nlohmann::json& j) {
  detail::check_param_keys(j, {"variance_floor"});
  NaiveBayesParams p;
  p.variance_floor = j.value("variance_floor", p.variance_floor);
  return p;
}

inline nlohmann::json to_json(const GradientBoostingParams& p) {
  return {{"n_rounds", p.n_rounds},
          {"shrinkage", p.shrinkage},
          {"max_depth", p.max_depth},
          {"min_samples_leaf", p.min_samples_leaf}};
}

inline GradientBoostingParams boosting_params_from_json(const nlohmann::json& j) {
  detail::check_param_keys(j, {"n_rounds", "shrinkage", "max_depth", "min_samples_leaf"});
  GradientBoostingParams p;
  p.n_rounds = j.value("n_rounds", p.n_rounds);
  p.shrinkage = j.value("shrinkage", p.shrinkage);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
  return p;
}

inline nlohmann::json to_json(const SvmParams& p) {
  return {{"C", p.C},
          {"kernel", to_string(p.kernel)},
          {"gamma", p.gamma},
          {"tol", p.tol},
          {"max_passes_without_progress", p.max_passes_without_progress},
          {"max_total_passes", p.max_total_passes},
          {"max_alpha_updates_per_row", p.max_alpha_updates_per_row},
          {"max_alpha_updates_cap", p.max_alpha_updates_cap}};
}

inline SvmParams svm_params_from_json(const nlohmann::json& j) {
  detail::check_param_keys(j, {"C", "kernel", "gamma", "tol", "max_passes_without_progress",
                               "max_total_passes", "max_alpha_updates_per_row",
                               "max_alpha_updates_cap"});
  SvmParams p;
  p.C = j.value("C", p.C);
  if (j.contains("kernel")) p.kernel = svm_kernel_from_string(j.at("kernel").get<std::string>());
  p.gamma = j.value("gamma", p.gamma);
  p.tol = j.value("tol", p.tol);
  p.max_passes_without_progress =
      j.value("max_passes_without_progress", p.max_passes_without_progress);
  p.max_total_passes = j.value("max_total_passes", p.max_total_passes);
  p.max_alpha_updates_per_row = j.value("max_alpha_updates_per_row", p.max_alpha_updates_per_row);
  p.max_alpha_updates_cap = j.value("max_alpha_updates_cap", p.max_alpha_updates_cap);
  return p;
}

inline nlohmann::json to_json(const RandomForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"min_samples_split", p.min_samples_split},
          {"feature_subset", p.feature_subset},
          {"bootstrap", p.bootstrap}};
}

inline RandomForestParams forest_params_from_json(const nlohmann::json& j) {
  detail::check_param_keys(
      j, {"n_trees", "max_depth", "min_samples_split", "feature_subset", "bootstrap"});
  RandomForestParams p;
  p.n_trees = j.value("n_trees", p.n_trees);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.min_samples_split = j.value("min_samples_split", p.min_samples_split);
  p.feature_subset = j.value("feature_subset", p.feature_subset);
  p.bootstrap = j.value("bootstrap", p.bootstrap);
  return p;
}

inline nlohmann::json to_json(const AnnParams& p) {
  return {{"hidden_units", p.hidden_units},
          {"batch_size", p.batch_size},
          {"learning_rate", p.learning_rate},
          {"max_epochs", p.max_epochs},
          {"plateau_patience", p.plateau_patience},
          {"early_stop_patience", p.early_stop_patience},
          {"min_improvement", p.min_improvement},
          {"validation_fraction", p.validation_fraction}};
}

inline AnnParams ann_params_from_json(const nlohmann::json& j) {
  detail::check_param_keys(j, {"hidden_units", "batch_size", "learning_rate", "max_epochs",
                               "plateau_patience", "early_stop_patience", "min_improvement",
                               "validation_fraction"});
  AnnParams p;
  p.hidden_units = j.value("hidden_units", p.hidden_units);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.max_epochs = j.value("max_epochs", p.max_epochs);
  p.plateau_patience = j.value("plateau_patience", p.plateau_patience);
  p.early_stop_patience = j.value("early_stop_patience", p.early_stop_patience);
  p.min_improvement = j.value("min_improvement", p.min_improvement);
  p.validation_fraction = j.value("validation_fraction", p.validation_fraction);
  return p;
}

// One model kind plus its hyper-parameters. Only the struct matching `kind`
// is consulted; the rest keep their defaults.
struct ModelSpec {
  ModelKind kind = ModelKind::logistic_regression;
  LogisticRegressionParams logistic;
  NaiveBayesParams naive_bayes;
  GradientBoostingParams boosting;
  SvmParams svm;
  RandomForestParams forest;
  AnnParams ann;

  void validate() const {
    switch (kind) {
      case ModelKind::logistic_regression: logistic.validate(); break;
      case ModelKind::naive_bayes: naive_bayes.validate(); break;
      case ModelKind::gradient_boosting: boosting.validate(); break;
      case ModelKind::svm: svm.validate(); break;
      case ModelKind::random_forest: forest.validate(); break;
      case ModelKind::ann: ann.validate(); break;
    }
  }

  nlohmann::json params_json() const {
    switch (kind) {
      case ModelKind::logistic_regression: return to_json(logistic);
      case ModelKind::naive_bayes: return to_json(naive_bayes);
      case ModelKind::gradient_boosting: return to_json(boosting);
      case ModelKind::svm: return to_json(svm);
      case ModelKind::random_forest: return to_json(forest);
      case ModelKind::ann: return to_json(ann);
    }
    throw ConfigError("model spec has an invalid kind");
  }
};

inline nlohmann::json to_json(const ModelSpec& s) {
  return {{"kind", to_string(s.kind)}, {"params", s.params_json()}};
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  if (j.is_string()) {  // shorthand: a bare kind name means all-default params
    s.kind = model_kind_from_string(j.get<std::string>());
    return s;
  }
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("model spec must be a kind name or an object with \"kind\"");
  s.kind = model_kind_from_string(j.at("kind").get<std::string>());
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  switch (s.kind) {
    case ModelKind::logistic_regression: s.logistic = logistic_params_from_json(params); break;
    case ModelKind::naive_bayes: s.naive_bayes = naive_bayes_params_from_json(params); break;
    case ModelKind::gradient_boosting: s.boosting = boosting_params_from_json(params); break;
    case ModelKind::svm: s.svm = svm_params_from_json(params); break;
    case ModelKind::random_forest: s.forest = forest_params_from_json(params); break;
    case ModelKind::ann: s.ann = ann_params_from_json(params); break;
  }
  s.validate();
  return s;
}

// Trains one model on (x, y). The ANN carves its own stratified validation
// split out of the given rows; everything else trains on all of them.
inline std::unique_ptr<TrainedModel> train_model(const ModelSpec& spec, const Matrix& x,
                                                 const std::vector<int>& y,
                                                 std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case ModelKind::logistic_regression:
      return train_logistic_regression(x, y, spec.logistic);
    case ModelKind::naive_bayes:
      return train_gaussian_naive_bayes(x, y, spec.naive_bayes);
    case ModelKind::gradient_boosting:
      return train_gradient_boosting(x, y, spec.boosting);
    case ModelKind::svm:
      return train_svm(x, y, spec.svm, seed);
    case ModelKind::random_forest:
      return train_random_forest(x, y, spec.forest, seed);
    case ModelKind::ann: {
      RandomSource holdout_rng(derive_seed(seed, "ann-holdout"));
      const HoldoutSplit split = stratified_holdout(y, spec.ann.validation_fraction, holdout_rng);
      Matrix x_tr = x.take_rows(split.train_rows);
      Matrix x_val = x.take_rows(split.val_rows);
      std::vector<int> y_tr, y_val;
      for (std::size_t r : split.train_rows) y_tr.push_back(y[r]);
      for (std::size_t r : split.val_rows) y_val.push_back(y[r]);
      return train_ann(x_tr, y_tr, x_val, y_val, spec.ann, seed);
    }
  }
  throw ConfigError("model spec has an invalid kind");
}

}  // namespace defectbench
