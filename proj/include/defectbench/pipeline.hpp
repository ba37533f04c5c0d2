#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "defectbench/dataset.hpp"
#include "defectbench/eigen.hpp"
#include "defectbench/error.hpp"
#include "defectbench/json_util.hpp"
#include "defectbench/matrix.hpp"

namespace defectbench {

namespace detail {

// A feature is constant when its sample std vanishes relative to its scale.
inline bool is_constant_std(double std, double mean) {
  return std <= 1e-12 * std::max(1.0, std::abs(mean));
}

}  // namespace detail

// Pearson correlation matrix. Diagonal is exactly 1, entries are clamped to
// [-1, 1], and rows/columns of constant features are 0 off-diagonal.
inline Matrix pearson_correlation(const Matrix& x) {
  if (x.rows() < 2) throw InvalidInput("pearson_correlation: need at least 2 rows");
  const Matrix c = covariance(x);
  const std::vector<double> mu = column_means(x);
  const std::size_t p = x.cols();
  std::vector<double> stds(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double s = std::sqrt(std::max(0.0, c(j, j)));
    stds[j] = detail::is_constant_std(s, mu[j]) ? 0.0 : s;
  }
  Matrix r(p, p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < p; ++j) {
      if (stds[i] == 0.0 || stds[j] == 0.0) continue;
      double v = c(i, j) / (stds[i] * stds[j]);
      v = std::min(1.0, std::max(-1.0, v));
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

// Greedy scan in feature-index order: for every pair i<j with |r| >= threshold
// and both still kept, j is dropped. Constant features are always dropped.
inline std::vector<bool> correlation_filter(const Matrix& x, double threshold) {
  if (threshold <= 0.0 || threshold > 1.0)
    throw ConfigError("correlation_filter: threshold must be in (0,1]");
  const std::size_t p = x.cols();
  const Matrix r = pearson_correlation(x);
  const Matrix c = covariance(x);
  const std::vector<double> mu = column_means(x);
  std::vector<bool> keep(p, true);
  for (std::size_t j = 0; j < p; ++j) {
    const double s = std::sqrt(std::max(0.0, c(j, j)));
    if (detail::is_constant_std(s, mu[j])) keep[j] = false;
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (!keep[i]) continue;
    for (std::size_t j = i + 1; j < p; ++j)
      if (keep[j] && std::abs(r(i, j)) >= threshold) keep[j] = false;
  }
  if (std::find(keep.begin(), keep.end(), true) == keep.end())
    throw InvalidInput("correlation_filter: all features dropped");
  return keep;
}

struct PcaBasis {
  Matrix components;                               // kept-feature count x n_components
  std::vector<double> explained_variance;          // descending, >= 0
  std::vector<double> cumulative_explained_ratio;  // non-decreasing, ends near 1
  std::size_t n_components = 0;
};

// Eigendecomposition of the covariance of (already centered/standardized)
// data; keeps the smallest leading set of components whose cumulative
// explained-variance ratio reaches the target.
inline PcaBasis fit_pca(const Matrix& x_standardized, double variance_target) {
  if (variance_target <= 0.0 || variance_target > 1.0)
    throw InvalidInput("fit_pca: variance_target must be in (0,1]");
  if (x_standardized.rows() < 2) throw InvalidInput("fit_pca: need at least 2 rows");
  const Matrix c = covariance(x_standardized);
  const EighResult eig = eigh_symmetric(c);
  const std::size_t p = x_standardized.cols();

  PcaBasis basis;
  basis.explained_variance.resize(p);
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    basis.explained_variance[i] = std::max(0.0, eig.eigenvalues[i]);
    total += basis.explained_variance[i];
  }
  if (total <= 0.0) throw InvalidInput("fit_pca: input has no variance");

  basis.cumulative_explained_ratio.resize(p);
  double cum = 0.0;
  std::size_t m = p;
  for (std::size_t i = 0; i < p; ++i) {
    cum += basis.explained_variance[i] / total;
    basis.cumulative_explained_ratio[i] = std::min(cum, 1.0 + 1e-12);
    if (m == p && cum >= variance_target - 1e-12) m = i + 1;
  }
  basis.n_components = m;
  basis.components = Matrix(p, m);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < m; ++j) basis.components(i, j) = eig.eigenvectors(i, j);
  return basis;
}

struct PipelineConfig {
  bool standardize = true;
  double correlation_threshold = 0.90;
  bool use_pca = false;
  double pca_variance_target = 0.95;

  void validate() const {
    if (correlation_threshold <= 0.0 || correlation_threshold > 1.0)
      throw ConfigError("pipeline: correlation_threshold must be in (0,1]");
    if (pca_variance_target <= 0.0 || pca_variance_target > 1.0)
      throw ConfigError("pipeline: pca_variance_target must be in (0,1]");
  }
};

// Frozen preprocessing state. Fit sees training data only; apply replays
// standardize -> column mask -> optional PCA projection.
struct FittedPipeline {
  std::vector<double> means;
  std::vector<double> stds;  // 0 marks a constant feature, treated as 1 at apply
  std::vector<bool> keep_mask;
  std::optional<PcaBasis> pca;
  PipelineConfig config;
  std::vector<std::string> warnings;

  std::size_t input_features() const { return means.size(); }
  std::size_t output_features() const {
    if (pca) return pca->n_components;
    std::size_t kept = 0;
    for (bool k : keep_mask) kept += k;
    return kept;
  }
};

inline FittedPipeline fit_pipeline(const Dataset& train, const PipelineConfig& config) {
  config.validate();
  validate_for_training(train);
  if (train.n_instances() < 2)
    throw InvalidInput("fit_pipeline: need at least 2 training rows");

  const Matrix& x = train.features;
  const std::size_t n = x.rows(), p = x.cols();

  FittedPipeline fp;
  fp.config = config;
  fp.means = column_means(x);
  fp.stds.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x(i, j) - fp.means[j];
      ss += d * d;
    }
    const double s = std::sqrt(ss / static_cast<double>(n - 1));
    if (detail::is_constant_std(s, fp.means[j])) {
      fp.stds[j] = 0.0;
      fp.warnings.push_back("constant feature '" + train.feature_names[j] + "' dropped");
    } else {
      fp.stds[j] = s;
    }
  }

  Matrix z = x;
  if (config.standardize) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double s = fp.stds[j] == 0.0 ? 1.0 : fp.stds[j];
        z(i, j) = (x(i, j) - fp.means[j]) / s;
      }
  }

  fp.keep_mask = correlation_filter(z, config.correlation_threshold);

  if (config.use_pca) {
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < p; ++j)
      if (fp.keep_mask[j]) kept.push_back(j);
    Matrix zk(n, kept.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < kept.size(); ++j) zk(i, j) = z(i, kept[j]);
    fp.pca = fit_pca(zk, config.pca_variance_target);
  }
  return fp;
}

inline Matrix apply_pipeline(const FittedPipeline& fp, const Matrix& x) {
  const std::size_t p = fp.input_features();
  if (x.cols() != p)
    throw InvalidInput("apply_pipeline: expected " + std::to_string(p) +
                       " columns, got " + std::to_string(x.cols()));
  const std::size_t n = x.rows();

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < p; ++j)
    if (fp.keep_mask[j]) kept.push_back(j);

  Matrix z(n, kept.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const std::size_t src = kept[j];
      double v = x(i, src);
      if (fp.config.standardize) {
        const double s = fp.stds[src] == 0.0 ? 1.0 : fp.stds[src];
        v = (v - fp.means[src]) / s;
      }
      z(i, j) = v;
    }
  if (!fp.pca) return z;
  return multiply(z, fp.pca->components);
}

// --- serialization ---------------------------------------------------------

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = {{"standardize", c.standardize},
       {"correlation_threshold", c.correlation_threshold},
       {"use_pca", c.use_pca},
       {"pca_variance_target", c.pca_variance_target}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
  c.standardize = j.value("standardize", true);
  c.correlation_threshold = j.value("correlation_threshold", 0.90);
  c.use_pca = j.value("use_pca", false);
  c.pca_variance_target = j.value("pca_variance_target", 0.95);
}

inline nlohmann::json pipeline_to_json(const FittedPipeline& fp) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = fp.config;
  j["means"] = fp.means;
  j["stds"] = fp.stds;
  j["keep_mask"] = std::vector<int>(fp.keep_mask.begin(), fp.keep_mask.end());
  if (fp.pca) {
    j["pca"] = {{"n_components", fp.pca->n_components},
                {"components", matrix_to_json(fp.pca->components)},
                {"explained_variance", fp.pca->explained_variance},
                {"cumulative_explained_ratio", fp.pca->cumulative_explained_ratio}};
  } else {
    j["pca"] = nullptr;
  }
  j["warnings"] = fp.warnings;
  return j;
}

inline FittedPipeline pipeline_from_json(const nlohmann::json& j) {
  FittedPipeline fp;
  fp.config = j.at("config").get<PipelineConfig>();
  fp.means = j.at("means").get<std::vector<double>>();
  fp.stds = j.at("stds").get<std::vector<double>>();
  for (int v : j.at("keep_mask").get<std::vector<int>>()) fp.keep_mask.push_back(v != 0);
  if (!j.at("pca").is_null()) {
    PcaBasis b;
    b.n_components = j["pca"].at("n_components").get<std::size_t>();
    b.components = matrix_from_json(j["pca"].at("components"));
    b.explained_variance = j["pca"].at("explained_variance").get<std::vector<double>>();
    b.cumulative_explained_ratio =
        j["pca"].at("cumulative_explained_ratio").get<std::vector<double>>();
    fp.pca = std::move(b);
  }
  fp.warnings = j.value("warnings", std::vector<std::string>{});
  return fp;
}

}  // namespace defectbench
