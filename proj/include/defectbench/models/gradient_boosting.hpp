#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "defectbench/models/common.hpp"
#include "defectbench/models/tree.hpp"

namespace defectbench {

struct GradientBoostingParams {
  std::size_t n_rounds = 100;
  double shrinkage = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 5;

  void validate() const {
    if (shrinkage <= 0.0 || shrinkage > 1.0)
      throw ConfigError("gradient_boosting: shrinkage must be in (0,1]");
    if (max_depth == 0) throw ConfigError("gradient_boosting: max_depth must be > 0");
    if (min_samples_leaf == 0)
      throw ConfigError("gradient_boosting: min_samples_leaf must be > 0");
  }
};

// Additive model in log-odds space: F starts at the prior log-odds, each
// round fits a squared-error tree to the BCE residuals y - sigmoid(F) and
// replaces leaf values with shrinkage-scaled Newton steps
// sum(residual) / sum(sigmoid*(1-sigmoid)) over the leaf.
class GradientBoostingModel final : public TrainedModel {
public:
  GradientBoostingModel(double f0, std::vector<Tree> trees, std::size_t n_features)
      : f0_(f0), trees_(std::move(trees)), n_features_(n_features) {}

  ModelKind kind() const override { return ModelKind::gradient_boosting; }
  std::size_t expected_features() const override { return n_features_; }

  double initial_score() const { return f0_; }
  const std::vector<Tree>& trees() const { return trees_; }

  nlohmann::json to_json() const override {
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& t : trees_) trees.push_back(tree_to_json(t));
    return {{"schema_version", 1},
            {"kind", to_string(kind())},
            {"f0", f0_},
            {"n_features", n_features_},
            {"trees", trees}};
  }

  void set_training_log(std::vector<double> log) { training_log_ = std::move(log); }

protected:
  std::vector<double> predict_proba_impl(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double f = f0_;
      for (const Tree& t : trees_) f += t.predict(x.row(i));
      out[i] = sigmoid(f);
    }
    return out;
  }

private:
  double f0_ = 0.0;
  std::vector<Tree> trees_;  // leaf values already include shrinkage
  std::size_t n_features_ = 0;
};

inline std::unique_ptr<GradientBoostingModel> train_gradient_boosting(
    const Matrix& x, const std::vector<int>& y, const GradientBoostingParams& params) {
  params.validate();
  validate_training_matrix(x, y);
  require_both_classes(y);

  const std::size_t n = x.rows();
  double pos = 0.0;
  for (int v : y) pos += v;
  const double p_bar = clamp_prob(pos / static_cast<double>(n));
  const double f0 = std::log(p_bar / (1.0 - p_bar));

  std::vector<double> f(n, f0);
  std::vector<double> residual(n), prob(n);
  std::vector<Tree> trees;
  trees.reserve(params.n_rounds);
  std::vector<double> log;
  log.reserve(params.n_rounds);

  RegressionTreeConfig tree_cfg;
  tree_cfg.max_depth = params.max_depth;
  tree_cfg.min_samples_leaf = params.min_samples_leaf;

  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(f[i]);
      residual[i] = static_cast<double>(y[i]) - prob[i];
    }
    std::vector<int> leaf_of_row;
    Tree tree = grow_regression_tree(x, residual, tree_cfg, &leaf_of_row);

    // Newton leaf values, then shrink.
    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const int leaf = leaf_of_row[i];
      num[leaf] += residual[i];
      den[leaf] += prob[i] * (1.0 - prob[i]);
    }
    // Saturated leaves have a vanishing hessian; bound the raw step so one
    // round cannot blow up the scores of mixed leaves.
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
      if (tree.nodes[k].feature < 0) {
        const double step = num[k] / std::max(den[k], 1e-12);
        tree.nodes[k].value = params.shrinkage * std::clamp(step, -4.0, 4.0);
      }

    for (std::size_t i = 0; i < n; ++i) f[i] += tree.nodes[leaf_of_row[i]].value;
    trees.push_back(std::move(tree));

    std::vector<double> proba(n);
    for (std::size_t i = 0; i < n; ++i) proba[i] = sigmoid(f[i]);
    log.push_back(bce_loss(y, proba));
  }

  auto model = std::make_unique<GradientBoostingModel>(f0, std::move(trees), x.cols());
  model->set_training_log(std::move(log));
  return model;
}

}  // namespace defectbench
