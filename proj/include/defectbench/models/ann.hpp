#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "defectbench/models/adam.hpp"
#include "defectbench/models/common.hpp"
#include "defectbench/rng.hpp"

namespace defectbench {

struct AnnParams {
  std::size_t hidden_units = 16;
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  std::size_t max_epochs = 200;
  std::size_t plateau_patience = 10;   // epochs without improvement before lr /= 10
  std::size_t early_stop_patience = 25;
  double min_improvement = 1e-4;       // required val-loss drop to count as progress
  double validation_fraction = 0.1;

  void validate() const {
    if (hidden_units == 0) throw ConfigError("ann: hidden_units must be > 0");
    if (batch_size == 0) throw ConfigError("ann: batch_size must be > 0");
    if (learning_rate <= 0.0) throw ConfigError("ann: learning_rate must be > 0");
    if (max_epochs == 0) throw ConfigError("ann: max_epochs must be > 0");
    if (plateau_patience == 0) throw ConfigError("ann: plateau_patience must be > 0");
    if (early_stop_patience == 0) throw ConfigError("ann: early_stop_patience must be > 0");
    if (validation_fraction <= 0.0 || validation_fraction >= 1.0)
      throw ConfigError("ann: validation_fraction must be in (0, 1)");
  }
};

// One ReLU hidden layer, sigmoid output. Parameters live in a single flat
// vector (W1, b1, W2, b2 in that order) so the optimizer and the
// finite-difference checks can treat the network as one function.
class Mlp {
public:
  Mlp(std::size_t n_inputs, std::size_t hidden)
      : n_inputs_(n_inputs), hidden_(hidden),
        params_(hidden * n_inputs + hidden + hidden + 1, 0.0) {
    if (n_inputs == 0 || hidden == 0) throw InvalidInput("mlp: empty layer");
  }

  static Mlp glorot(std::size_t n_inputs, std::size_t hidden, RandomSource& rng) {
    Mlp m(n_inputs, hidden);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(n_inputs + hidden));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (std::size_t i = 0; i < hidden * n_inputs; ++i)
      m.params_[i] = (2.0 * rng.uniform01() - 1.0) * lim1;
    for (std::size_t i = 0; i < hidden; ++i)
      m.params_[m.w2_off() + i] = (2.0 * rng.uniform01() - 1.0) * lim2;
    return m;
  }

  std::size_t n_inputs() const { return n_inputs_; }
  std::size_t hidden() const { return hidden_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::size_t w1_off() const { return 0; }
  std::size_t b1_off() const { return hidden_ * n_inputs_; }
  std::size_t w2_off() const { return b1_off() + hidden_; }
  std::size_t b2_off() const { return w2_off() + hidden_; }

  double forward(const double* row) const {
    double z2 = params_[b2_off()];
    for (std::size_t h = 0; h < hidden_; ++h) {
      double z1 = params_[b1_off() + h];
      const double* w1 = params_.data() + h * n_inputs_;
      for (std::size_t j = 0; j < n_inputs_; ++j) z1 += w1[j] * row[j];
      if (z1 > 0.0) z2 += params_[w2_off() + h] * z1;
    }
    return sigmoid(z2);
  }

private:
  std::size_t n_inputs_, hidden_;
  std::vector<double> params_;
};

// Mean BCE over the given rows.
inline double ann_loss(const Mlp& net, const Matrix& x, const std::vector<int>& y,
                       const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw InvalidInput("ann_loss: no rows");
  double total = 0.0;
  for (const std::size_t r : rows) {
    const double p = clamp_prob(net.forward(x.row(r)));
    total += y[r] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(rows.size());
}

// Gradient of ann_loss with respect to the flat parameter vector.
inline std::vector<double> ann_gradient(const Mlp& net, const Matrix& x,
                                        const std::vector<int>& y,
                                        const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw InvalidInput("ann_gradient: no rows");
  const std::size_t p = net.n_inputs(), h = net.hidden();
  const std::vector<double>& w = net.params();
  std::vector<double> grad(w.size(), 0.0);
  std::vector<double> a1(h);
  for (const std::size_t r : rows) {
    const double* row = x.row(r);
    double z2 = w[net.b2_off()];
    for (std::size_t k = 0; k < h; ++k) {
      double z1 = w[net.b1_off() + k];
      const double* w1 = w.data() + k * p;
      for (std::size_t j = 0; j < p; ++j) z1 += w1[j] * row[j];
      a1[k] = z1 > 0.0 ? z1 : 0.0;
      z2 += w[net.w2_off() + k] * a1[k];
    }
    const double dz2 = sigmoid(z2) - (y[r] == 1 ? 1.0 : 0.0);
    grad[net.b2_off()] += dz2;
    for (std::size_t k = 0; k < h; ++k) {
      grad[net.w2_off() + k] += dz2 * a1[k];
      if (a1[k] > 0.0) {
        const double dz1 = dz2 * w[net.w2_off() + k];
        grad[net.b1_off() + k] += dz1;
        double* g1 = grad.data() + k * p;
        for (std::size_t j = 0; j < p; ++j) g1[j] += dz1 * row[j];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= inv;
  return grad;
}

class AnnModel final : public TrainedModel {
public:
  explicit AnnModel(Mlp net) : net_(std::move(net)) {}

  ModelKind kind() const override { return ModelKind::ann; }
  std::size_t expected_features() const override { return net_.n_inputs(); }
  const Mlp& network() const { return net_; }
  void set_training_log(nlohmann::json log) { training_log_ = std::move(log); }

  nlohmann::json to_json() const override {
    return {{"schema_version", 1},
            {"kind", to_string(kind())},
            {"n_inputs", net_.n_inputs()},
            {"hidden_units", net_.hidden()},
            {"params", net_.params()}};
  }

protected:
  std::vector<double> predict_proba_impl(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = net_.forward(x.row(i));
    return out;
  }

private:
  Mlp net_;
};

// Splits row indices into train/validation parts, taking
// floor(fraction * n_c) rows per class for validation. If that rounds to an
// empty split, one row is borrowed from the largest class.
struct HoldoutSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
};

inline HoldoutSplit stratified_holdout(const std::vector<int>& labels, double fraction,
                                       RandomSource& rng) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw InvalidInput("stratified_holdout: fraction must be in (0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
  HoldoutSplit out;
  for (auto& idx : by_class) {
    rng.shuffle(idx);
    const std::size_t take =
        static_cast<std::size_t>(fraction * static_cast<double>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < take ? out.val_rows : out.train_rows).push_back(idx[i]);
  }
  if (out.val_rows.empty()) {
    const std::size_t donor = by_class[0].size() >= by_class[1].size() ? 0 : 1;
    if (by_class[donor].size() < 2)
      throw InvalidInput("stratified_holdout: too few rows to carve a validation split");
    out.val_rows.push_back(by_class[donor].front());
    out.train_rows.erase(
        std::find(out.train_rows.begin(), out.train_rows.end(), by_class[donor].front()));
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.val_rows.begin(), out.val_rows.end());
  return out;
}

// Mini-batch Adam with validation-plateau learning-rate decay (lr / 10 after
// plateau_patience flat epochs), early stopping after early_stop_patience
// flat epochs, and best-validation weight restore.
inline std::unique_ptr<AnnModel> train_ann(const Matrix& x_train, const std::vector<int>& y_train,
                                           const Matrix& x_val, const std::vector<int>& y_val,
                                           const AnnParams& params, std::uint64_t seed) {
  params.validate();
  validate_training_matrix(x_train, y_train);
  validate_training_matrix(x_val, y_val);
  require_both_classes(y_train);
  if (x_val.cols() != x_train.cols())
    throw InvalidInput("train_ann: train/validation feature mismatch");

  RandomSource init_rng(derive_seed(seed, "ann-init"));
  RandomSource shuffle_rng(derive_seed(seed, "ann-shuffle"));
  Mlp net = Mlp::glorot(x_train.cols(), params.hidden_units, init_rng);
  AdamState adam(net.params().size(), params.learning_rate);

  std::vector<std::size_t> order(x_train.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::size_t> val_rows(x_val.rows());
  for (std::size_t i = 0; i < val_rows.size(); ++i) val_rows[i] = i;

  std::vector<double> best_params = net.params();
  double best_val = ann_loss(net, x_val, y_val, val_rows);
  std::size_t flat_epochs = 0, epochs_since_decay = 0, epochs_run = 0;
  bool stopped_early = false;
  nlohmann::json epochs = nlohmann::json::array();

  for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t stop = std::min(order.size(), start + params.batch_size);
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
      const std::vector<double> grad = ann_gradient(net, x_train, y_train, batch);
      adam_step(net.params(), grad, adam);
    }
    ++epochs_run;
    const double train_loss = ann_loss(net, x_train, y_train, order);
    const double val_loss = ann_loss(net, x_val, y_val, val_rows);
    epochs.push_back({{"epoch", epoch},
                      {"train_loss", train_loss},
                      {"val_loss", val_loss},
                      {"learning_rate", adam.learning_rate}});
    if (val_loss < best_val - params.min_improvement) {
      best_val = val_loss;
      best_params = net.params();
      flat_epochs = 0;
      epochs_since_decay = 0;
    } else {
      ++flat_epochs;
      ++epochs_since_decay;
      if (flat_epochs >= params.early_stop_patience) {
        stopped_early = true;
        break;
      }
      if (epochs_since_decay >= params.plateau_patience) {
        adam.learning_rate /= 10.0;
        epochs_since_decay = 0;
      }
    }
  }

  net.params() = best_params;
  auto model = std::make_unique<AnnModel>(std::move(net));
  model->set_training_log({{"epochs_run", epochs_run},
                           {"stopped_early", stopped_early},
                           {"best_val_loss", best_val},
                           {"epochs", std::move(epochs)}});
  return model;
}

}  // namespace defectbench
