#pragma once

#include <memory>
#include <string>

#include "defectbench/models/train.hpp"

namespace defectbench {

// Rebuilds any trained model from its to_json() output.
inline std::unique_ptr<TrainedModel> model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("model json must be an object with \"kind\"");
  const int version = j.value("schema_version", 1);
  if (version != 1)
    throw ConfigError("unsupported model schema_version " + std::to_string(version));
  const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case ModelKind::logistic_regression:
      return std::make_unique<LogisticRegressionModel>(
          j.at("w").get<std::vector<double>>(), j.at("b").get<double>(),
          LogisticRegressionParams{}, j.value("converged", false));
    case ModelKind::naive_bayes:
      return std::make_unique<NaiveBayesModel>(j.at("priors").get<std::vector<double>>(),
                                               matrix_from_json(j.at("means")),
                                               matrix_from_json(j.at("variances")));
    case ModelKind::gradient_boosting: {
      std::vector<Tree> trees;
      for (const auto& jt : j.at("trees")) trees.push_back(tree_from_json(jt));
      return std::make_unique<GradientBoostingModel>(
          j.at("f0").get<double>(), std::move(trees), j.at("n_features").get<std::size_t>());
    }
    case ModelKind::svm:
      return std::make_unique<SvmModel>(
          matrix_from_json(j.at("support_vectors")), j.at("coeffs").get<std::vector<double>>(),
          j.at("bias").get<double>(), svm_kernel_from_string(j.at("kernel").get<std::string>()),
          j.at("gamma").get<double>(), j.at("n_features").get<std::size_t>(),
          j.value("converged", false));
    case ModelKind::random_forest: {
      std::vector<Tree> trees;
      for (const auto& jt : j.at("trees")) trees.push_back(tree_from_json(jt));
      std::optional<double> oob;
      if (j.contains("oob_accuracy")) oob = j.at("oob_accuracy").get<double>();
      return std::make_unique<RandomForestModel>(std::move(trees),
                                                 j.at("n_features").get<std::size_t>(), oob);
    }
    case ModelKind::ann: {
      Mlp net(j.at("n_inputs").get<std::size_t>(), j.at("hidden_units").get<std::size_t>());
      auto params = j.at("params").get<std::vector<double>>();
      if (params.size() != net.params().size())
        throw ConfigError("ann json has wrong parameter count");
      net.params() = std::move(params);
      return std::make_unique<AnnModel>(std::move(net));
    }
  }
  throw ConfigError("model json has an invalid kind");
}

}  // namespace defectbench
