#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <json.hpp>

#include "defectbench/matrix.hpp"
#include "defectbench/rng.hpp"

namespace defectbench {

// Axis-aligned binary decision tree over dense features. Leaves carry a real
// value: a class-1 fraction for classification trees, an additive score for
// boosting regression trees.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  bool empty() const { return nodes.empty(); }

  int leaf_index(const double* row) const {
    int id = 0;
    while (nodes[id].feature >= 0)
      id = row[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return id;
  }

  double predict(const double* row) const { return nodes[leaf_index(row)].value; }
};

inline double gini_impurity(std::size_t n0, std::size_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

namespace detail {

// Split-threshold candidates are midpoints between consecutive distinct
// sorted feature values; sorted_vals holds (value, payload) pairs.
struct GiniSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

inline GiniSplit best_gini_split(const Matrix& x, const std::vector<int>& y,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& features) {
  const std::size_t m = rows.size();
  std::size_t total1 = 0;
  for (std::size_t r : rows) total1 += y[r];
  const std::size_t total0 = m - total1;
  const double parent = gini_impurity(total0, total1);

  GiniSplit best;
  std::vector<std::pair<double, int>> vals(m);
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < m; ++i) vals[i] = {x(rows[i], f), y[rows[i]]};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t left0 = 0, left1 = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      (vals[i].second ? left1 : left0) += 1;
      if (vals[i].first == vals[i + 1].first) continue;
      const std::size_t nl = i + 1, nr = m - nl;
      const double wl = static_cast<double>(nl) / static_cast<double>(m);
      const double wr = static_cast<double>(nr) / static_cast<double>(m);
      const double gain = parent - wl * gini_impurity(left0, left1) -
                          wr * gini_impurity(total0 - left0, total1 - left1);
      if (gain > best.gain + 1e-15) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

struct SseSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum of (sum_t)^2/n over children; higher is better
};

inline SseSplit best_sse_split(const Matrix& x, const std::vector<double>& t,
                               const std::vector<std::size_t>& rows,
                               std::size_t min_samples_leaf) {
  const std::size_t m = rows.size();
  double total = 0.0;
  for (std::size_t r : rows) total += t[r];
  const double baseline = total * total / static_cast<double>(m);

  SseSplit best;
  best.score = baseline;
  std::vector<std::pair<double, double>> vals(m);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    for (std::size_t i = 0; i < m; ++i) vals[i] = {x(rows[i], f), t[rows[i]]};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      left_sum += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const std::size_t nl = i + 1, nr = m - nl;
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / static_cast<double>(nl) +
                           right_sum * right_sum / static_cast<double>(nr);
      if (score > best.score + 1e-12) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        best.score = score;
      }
    }
  }
  return best;
}

}  // namespace detail

struct ClassificationTreeConfig {
  std::size_t max_depth = 16;
  std::size_t min_samples_split = 2;
  std::size_t feature_subset = 0;  // 0 = all features
};

// CART-style Gini tree. When feature_subset is smaller than p, each node
// draws its own random feature subset from the supplied stream.
inline Tree grow_classification_tree(const Matrix& x, const std::vector<int>& y,
                                     const std::vector<std::size_t>& sample_rows,
                                     const ClassificationTreeConfig& cfg,
                                     RandomSource& rng) {
  const std::size_t p = x.cols();
  const std::size_t mtry = cfg.feature_subset == 0 ? p : std::min(cfg.feature_subset, p);

  Tree tree;
  struct Work {
    std::vector<std::size_t> rows;
    std::size_t depth;
    int node;
  };
  tree.nodes.emplace_back();
  std::vector<Work> stack;
  stack.push_back({sample_rows, 0, 0});

  std::vector<std::size_t> all_features(p);
  for (std::size_t j = 0; j < p; ++j) all_features[j] = j;

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();

    std::size_t n1 = 0;
    for (std::size_t r : w.rows) n1 += y[r];
    const std::size_t n = w.rows.size();
    TreeNode& node = tree.nodes[w.node];
    node.value = static_cast<double>(n1) / static_cast<double>(n);

    if (n1 == 0 || n1 == n || n < cfg.min_samples_split || w.depth >= cfg.max_depth)
      continue;

    detail::GiniSplit split;
    if (mtry >= p) {
      split = detail::best_gini_split(x, y, w.rows, all_features);
    } else {
      // Partial Fisher-Yates draw of mtry distinct feature indices.
      std::vector<std::size_t> pool = all_features;
      std::vector<std::size_t> subset(mtry);
      for (std::size_t i = 0; i < mtry; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(p - i));
        std::swap(pool[i], pool[j]);
        subset[i] = pool[i];
      }
      split = detail::best_gini_split(x, y, w.rows, subset);
    }
    if (!split.found) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : w.rows)
      (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) continue;

    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int ri = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[w.node];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = li;
    parent.right = ri;
    stack.push_back({std::move(right_rows), w.depth + 1, ri});
    stack.push_back({std::move(left_rows), w.depth + 1, li});
  }
  return tree;
}

struct RegressionTreeConfig {
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 5;
};

// Squared-error regression tree on real targets; leaves start at the node
// mean (the caller may overwrite them). Also reports each training row's
// leaf for leaf-wise post-processing.
inline Tree grow_regression_tree(const Matrix& x, const std::vector<double>& targets,
                                 const RegressionTreeConfig& cfg,
                                 std::vector<int>* leaf_of_row = nullptr) {
  const std::size_t n = x.rows();
  Tree tree;
  struct Work {
    std::vector<std::size_t> rows;
    std::size_t depth;
    int node;
  };
  tree.nodes.emplace_back();
  std::vector<Work> stack;
  {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    stack.push_back({std::move(all), 0, 0});
  }
  if (leaf_of_row) leaf_of_row->assign(n, 0);

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();

    double sum = 0.0;
    for (std::size_t r : w.rows) sum += targets[r];
    TreeNode& node = tree.nodes[w.node];
    node.value = sum / static_cast<double>(w.rows.size());

    bool split_done = false;
    if (w.depth < cfg.max_depth && w.rows.size() >= 2 * cfg.min_samples_leaf) {
      const detail::SseSplit split =
          detail::best_sse_split(x, targets, w.rows, cfg.min_samples_leaf);
      if (split.found) {
        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : w.rows)
          (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int ri = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& parent = tree.nodes[w.node];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = li;
        parent.right = ri;
        stack.push_back({std::move(right_rows), w.depth + 1, ri});
        stack.push_back({std::move(left_rows), w.depth + 1, li});
        split_done = true;
      }
    }
    if (!split_done && leaf_of_row)
      for (std::size_t r : w.rows) (*leaf_of_row)[r] = w.node;
  }
  return tree;
}

inline nlohmann::json tree_to_json(const Tree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : t.nodes)
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value}});
  return nodes;
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree t;
  for (const auto& jn : j) {
    TreeNode n;
    n.feature = jn.at("feature").get<int>();
    n.threshold = jn.at("threshold").get<double>();
    n.left = jn.at("left").get<int>();
    n.right = jn.at("right").get<int>();
    n.value = jn.at("value").get<double>();
    t.nodes.push_back(n);
  }
  return t;
}

}  // namespace defectbench
