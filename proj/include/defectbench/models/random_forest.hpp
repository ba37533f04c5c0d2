#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "defectbench/models/common.hpp"
#include "defectbench/models/tree.hpp"
#include "defectbench/rng.hpp"

namespace defectbench {

struct RandomForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 16;
  std::size_t min_samples_split = 2;
  std::size_t feature_subset = 0;  // 0 = floor(sqrt(p))
  bool bootstrap = true;

  void validate() const {
    if (n_trees == 0) throw ConfigError("random_forest: n_trees must be > 0");
    if (max_depth == 0) throw ConfigError("random_forest: max_depth must be > 0");
    if (min_samples_split < 2)
      throw ConfigError("random_forest: min_samples_split must be >= 2");
  }
};

class RandomForestModel final : public TrainedModel {
public:
  RandomForestModel(std::vector<Tree> trees, std::size_t n_features,
                    std::optional<double> oob_accuracy)
      : trees_(std::move(trees)), n_features_(n_features), oob_accuracy_(oob_accuracy) {}

  ModelKind kind() const override { return ModelKind::random_forest; }
  std::size_t expected_features() const override { return n_features_; }

  const std::vector<Tree>& trees() const { return trees_; }
  std::optional<double> oob_accuracy() const { return oob_accuracy_; }

  nlohmann::json to_json() const override {
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& t : trees_) trees.push_back(tree_to_json(t));
    nlohmann::json j = {{"schema_version", 1},
                        {"kind", to_string(kind())},
                        {"n_features", n_features_},
                        {"trees", trees}};
    if (oob_accuracy_) j["oob_accuracy"] = *oob_accuracy_;
    return j;
  }

protected:
  std::vector<double> predict_proba_impl(const Matrix& x) const override {
    std::vector<double> out(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double sum = 0.0;
      for (const Tree& t : trees_) sum += t.predict(x.row(i));
      out[i] = sum / static_cast<double>(trees_.size());
    }
    return out;
  }

private:
  std::vector<Tree> trees_;
  std::size_t n_features_ = 0;
  std::optional<double> oob_accuracy_;
};

// Bagged Gini trees with per-node random feature subsets (floor(sqrt(p)) by
// default), leaf values are class-1 fractions and the forest probability is
// their mean. Tree t draws from an independent stream seeded seed + t, so
// trees may be built in any order. With bootstrap on, rows left out of a
// tree's resample contribute to an out-of-bag accuracy estimate.
inline std::unique_ptr<RandomForestModel> train_random_forest(
    const Matrix& x, const std::vector<int>& y, const RandomForestParams& params,
    std::uint64_t seed) {
  params.validate();
  validate_training_matrix(x, y);
  require_both_classes(y);

  const std::size_t n = x.rows(), p = x.cols();
  ClassificationTreeConfig tree_cfg;
  tree_cfg.max_depth = params.max_depth;
  tree_cfg.min_samples_split = params.min_samples_split;
  tree_cfg.feature_subset = params.feature_subset == 0
                                ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                                               std::floor(std::sqrt(p))))
                                : params.feature_subset;

  std::vector<Tree> trees;
  trees.reserve(params.n_trees);
  std::vector<double> oob_sum(n, 0.0);
  std::vector<std::size_t> oob_count(n, 0);

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    RandomSource rng(seed + t);
    std::vector<std::size_t> rows;
    std::vector<bool> in_bag(n, false);
    if (params.bootstrap) {
      rows = bootstrap_indices(n, rng);
      for (std::size_t r : rows) in_bag[r] = true;
    } else {
      rows.resize(n);
      for (std::size_t i = 0; i < n; ++i) rows[i] = i;
      in_bag.assign(n, true);
    }
    Tree tree = grow_classification_tree(x, y, rows, tree_cfg, rng);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        if (!in_bag[i]) {
          oob_sum[i] += tree.predict(x.row(i));
          oob_count[i] += 1;
        }
    }
    trees.push_back(std::move(tree));
  }

  std::optional<double> oob;
  if (params.bootstrap) {
    std::size_t covered = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (oob_count[i] == 0) continue;
      ++covered;
      const int pred = oob_sum[i] / static_cast<double>(oob_count[i]) >= 0.5 ? 1 : 0;
      correct += (pred == y[i]);
    }
    if (covered > 0)
      oob = static_cast<double>(correct) / static_cast<double>(covered);
  }

  return std::make_unique<RandomForestModel>(std::move(trees), p, oob);
}

}  // namespace defectbench
