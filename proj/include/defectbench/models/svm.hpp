#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "defectbench/json_util.hpp"
#include "defectbench/models/common.hpp"
#include "defectbench/rng.hpp"

namespace defectbench {

enum class SvmKernel { linear, rbf };

inline const char* to_string(SvmKernel k) {
  return k == SvmKernel::linear ? "linear" : "rbf";
}

inline SvmKernel svm_kernel_from_string(const std::string& s) {
  if (s == "linear") return SvmKernel::linear;
  if (s == "rbf") return SvmKernel::rbf;
  throw ConfigError("unknown svm kernel: " + s);
}

struct SvmParams {
  double C = 1.0;
  SvmKernel kernel = SvmKernel::rbf;
  double gamma = 0.0;  // 0 = 1/p
  double tol = 1e-3;
  std::size_t max_passes_without_progress = 10;
  std::size_t max_total_passes = 1000;
  // Best-effort budgets on successful pair updates (0 = unlimited). The
  // per-row budget scales with small problems; the absolute cap keeps huge
  // noisy datasets from shuffling bound alphas for minutes. The effective
  // budget is the smaller of the two.
  std::size_t max_alpha_updates_per_row = 25;
  std::size_t max_alpha_updates_cap = 60000;

  void validate() const {
    if (C <= 0.0) throw ConfigError("svm: C must be > 0");
    if (gamma < 0.0) throw ConfigError("svm: gamma must be >= 0");
    if (tol <= 0.0) throw ConfigError("svm: tol must be > 0");
    if (max_passes_without_progress == 0)
      throw ConfigError("svm: max_passes_without_progress must be > 0");
  }
};

namespace detail {

struct KernelFn {
  SvmKernel kind;
  double gamma;

  double operator()(const double* a, const double* b, std::size_t p) const {
    if (kind == SvmKernel::linear) {
      double dot = 0.0;
      for (std::size_t j = 0; j < p; ++j) dot += a[j] * b[j];
      return dot;
    }
    double d2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = a[j] - b[j];
      d2 += d * d;
    }
    return std::exp(-gamma * d2);
  }
};

}  // namespace detail

// Soft-margin SVM; probability output is sigmoid(decision value) and is not
// calibrated.
class SvmModel final : public TrainedModel {
public:
  SvmModel(Matrix support_vectors, std::vector<double> coeffs, double bias,
           SvmKernel kernel, double gamma, std::size_t n_features, bool converged)
      : support_vectors_(std::move(support_vectors)), coeffs_(std::move(coeffs)),
        bias_(bias), kernel_(kernel), gamma_(gamma), n_features_(n_features),
        converged_(converged) {}

  ModelKind kind() const override { return ModelKind::svm; }
  std::size_t expected_features() const override { return n_features_; }

  double decision_value(const double* row) const {
    const detail::KernelFn k{kernel_, gamma_};
    double f = bias_;
    for (std::size_t i = 0; i < support_vectors_.rows(); ++i)
      f += coeffs_[i] * k(support_vectors_.row(i), row, n_features_);
    return f;
  }

  // Primal weights, linear kernel only.
  std::vector<double> linear_weights() const {
    if (kernel_ != SvmKernel::linear)
      throw InvalidInput("linear_weights: model uses a non-linear kernel");
    std::vector<double> w(n_features_, 0.0);
    for (std::size_t i = 0; i < support_vectors_.rows(); ++i)
      for (std::size_t j = 0; j < n_features_; ++j)
        w[j] += coeffs_[i] * support_vectors_(i, j);
    return w;
  }

  double bias() const { return bias_; }
  std::size_t n_support() const { return support_vectors_.rows(); }
  bool converged() const { return converged_; }
  void set_training_log(nlohmann::json log) { training_log_ = std::move(log); }

  nlohmann::json to_json() const override {
    return {{"schema_version", 1},
            {"kind", to_string(kind())},
            {"kernel", to_string(kernel_)},
            {"gamma", gamma_},
            {"n_features", n_features_},
            {"support_vectors", matrix_to_json(support_vectors_)},
            {"coeffs", coeffs_},
            {"bias", bias_},
            {"converged", converged_}};
  }

protected:
  std::vector<double> predict_proba_impl(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = sigmoid(decision_value(x.row(i)));
    return out;
  }

private:
  Matrix support_vectors_;
  std::vector<double> coeffs_;  // alpha_i * s_i, s_i in {-1,+1}
  double bias_ = 0.0;
  SvmKernel kernel_;
  double gamma_ = 0.0;
  std::size_t n_features_ = 0;
  bool converged_ = false;
};

// Dual-side training report, exposed for feasibility checks: the full alpha
// vector (zeros included) and the signed labels.
struct SvmDualState {
  std::vector<double> alphas;
  std::vector<double> signed_labels;
  double C = 0.0;
};

// Simplified SMO: scan rows for KKT violations at tolerance tol, pair each
// violator with a random partner, and solve the two-variable subproblem
// analytically. A full decision-value cache is updated incrementally after
// every accepted pair, so violation checks stay O(1). Training stops after
// max_passes_without_progress changeless sweeps (converged) or when a pass
// or update budget runs out (best effort, flagged on the model).
inline std::unique_ptr<SvmModel> train_svm(const Matrix& x, const std::vector<int>& y,
                                           const SvmParams& params, std::uint64_t seed,
                                           SvmDualState* dual_out = nullptr) {
  params.validate();
  validate_training_matrix(x, y);
  require_both_classes(y);

  const std::size_t n = x.rows(), p = x.cols();
  const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(p);
  const detail::KernelFn kernel{params.kernel, gamma};
  const double C = params.C;

  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = y[i] == 1 ? 1.0 : -1.0;

  std::vector<double> self_k(n);
  for (std::size_t i = 0; i < n; ++i) self_k[i] = kernel(x.row(i), x.row(i), p);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> fcache(n, 0.0);  // sum_j alpha_j s_j K(j, i), bias excluded
  double b = 0.0;

  RandomSource rng(derive_seed(seed, "svm-partner"));
  std::size_t max_updates =
      params.max_alpha_updates_per_row == 0 ? 0 : params.max_alpha_updates_per_row * n;
  if (params.max_alpha_updates_cap != 0 &&
      (max_updates == 0 || params.max_alpha_updates_cap < max_updates))
    max_updates = params.max_alpha_updates_cap;

  std::vector<double> ki(n), kj(n);
  std::size_t quiet_passes = 0, total_passes = 0, total_updates = 0;
  bool converged = false;
  bool budget_hit = false;

  // After every pair update, re-anchor b on the interior-alpha consensus; a
  // pair-local b estimate seesaws the whole error field and keeps
  // re-triggering violations among strongly coupled alphas.
  const auto refresh_b = [&](double b1, double b2, double ai, double aj) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (alpha[k] > 0.0 && alpha[k] < C) {
        sum += s[k] - fcache[k];
        ++cnt;
      }
    if (cnt > 0)
      b = sum / static_cast<double>(cnt);
    else if (ai > 0.0 && ai < C)
      b = b1;
    else if (aj > 0.0 && aj < C)
      b = b2;
    else
      b = 0.5 * (b1 + b2);
  };

  const auto take_step = [&](std::size_t i, std::size_t j) -> bool {
    if (i == j) return false;
    const double ei = fcache[i] + b - s[i];
    const double ej = fcache[j] + b - s[j];
    const double kij = kernel(x.row(i), x.row(j), p);
    const double eta = 2.0 * kij - self_k[i] - self_k[j];
    if (eta >= 0.0) return false;

    double lo, hi;
    if (s[i] != s[j]) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(C, C + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - C);
      hi = std::min(C, alpha[i] + alpha[j]);
    }
    if (lo >= hi) return false;

    double aj_new = alpha[j] - s[j] * (ei - ej) / eta;
    aj_new = std::min(hi, std::max(lo, aj_new));
    const double dj = aj_new - alpha[j];
    if (std::abs(dj) < 1e-5) return false;
    const double di = -s[i] * s[j] * dj;
    // real arithmetic keeps alpha_i inside [0, C]; the clamp only removes
    // rounding spill so the dual stays box-feasible bit-for-bit
    const double ai_new = std::min(C, std::max(0.0, alpha[i] + di));

    const double b1 = b - ei - s[i] * di * self_k[i] - s[j] * dj * kij;
    const double b2 = b - ej - s[i] * di * kij - s[j] * dj * self_k[j];

    for (std::size_t k = 0; k < n; ++k) ki[k] = kernel(x.row(i), x.row(k), p);
    for (std::size_t k = 0; k < n; ++k) kj[k] = kernel(x.row(j), x.row(k), p);
    const double ci = s[i] * di, cj = s[j] * dj;
    for (std::size_t k = 0; k < n; ++k) fcache[k] += ci * ki[k] + cj * kj[k];

    alpha[i] = ai_new;
    alpha[j] = aj_new;
    refresh_b(b1, b2, ai_new, aj_new);
    ++total_updates;
    if (max_updates != 0 && total_updates >= max_updates) budget_hit = true;
    return true;
  };

  const auto examine = [&](std::size_t i) -> bool {
    const double ei = fcache[i] + b - s[i];
    const double r = ei * s[i];
    if (!((r < -params.tol && alpha[i] < C) || (r > params.tol && alpha[i] > 0.0)))
      return false;
    // second choice: largest |e_i - e_j| preferring interior alphas, then one
    // random fallback if that pair cannot move
    std::size_t best = i;
    double best_gap = -1.0;
    bool best_interior = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool interior = alpha[j] > 0.0 && alpha[j] < C;
      if (best_interior && !interior) continue;
      const double gap = std::abs(ei - (fcache[j] + b - s[j]));
      if ((interior && !best_interior) || gap > best_gap) {
        best_gap = gap;
        best = j;
        best_interior = best_interior || interior;
      }
    }
    if (best != i && take_step(i, best)) return true;
    if (budget_hit) return false;
    std::size_t j = static_cast<std::size_t>(rng.next_below(n - 1));
    if (j >= i) ++j;
    return take_step(i, j);
  };

  // Platt-style outer loop: full sweeps alternate with interior-only sweeps
  bool examine_all = true;
  while (!budget_hit) {
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n && !budget_hit; ++i) {
      if (!examine_all && !(alpha[i] > 0.0 && alpha[i] < C)) continue;
      if (examine(i)) ++changed;
    }
    ++total_passes;
    quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
    if (quiet_passes >= params.max_passes_without_progress) {
      converged = true;
      break;
    }
    if (examine_all)
      examine_all = changed == 0;
    else if (changed == 0)
      examine_all = true;
    if (total_passes >= params.max_total_passes) budget_hit = true;
  }

  if (dual_out) {
    dual_out->alphas = alpha;
    dual_out->signed_labels = s;
    dual_out->C = C;
  }

  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < n; ++i)
    if (alpha[i] > 1e-12) sv.push_back(i);
  Matrix support(sv.size(), p);
  std::vector<double> coeffs(sv.size());
  for (std::size_t k = 0; k < sv.size(); ++k) {
    for (std::size_t j = 0; j < p; ++j) support(k, j) = x(sv[k], j);
    coeffs[k] = alpha[sv[k]] * s[sv[k]];
  }
  auto model = std::make_unique<SvmModel>(std::move(support), std::move(coeffs), b,
                                          params.kernel, gamma, p, converged);
  model->set_training_log({{"passes", total_passes},
                           {"updates", total_updates},
                           {"converged", converged},
                           {"budget_hit", budget_hit}});
  return model;
}

}  // namespace defectbench
