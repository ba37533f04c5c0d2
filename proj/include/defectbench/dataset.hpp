#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "defectbench/error.hpp"
#include "defectbench/matrix.hpp"

namespace defectbench {

// Missing feature entries are stored as quiet NaN until impute_missing runs.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

// Dataset names are report keys: uppercase, whitespace collapsed to '_'.
inline std::string normalize_name(const std::string& raw) {
  std::string out;
  bool pending_sep = false;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!out.empty()) pending_sep = true;
      continue;
    }
    if (pending_sep) {
      out.push_back('_');
      pending_sep = false;
    }
    out.push_back(static_cast<char>(std::toupper(c)));
  }
  return out;
}

struct Dataset {
  std::string name;
  Matrix features;                         // n_instances x n_features, NaN = missing
  std::vector<int> labels;                 // 0/1, 1 = defective
  std::vector<std::string> feature_names;  // unique, declaration order
  std::string source_path;

  std::size_t n_instances() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }

  bool has_missing() const {
    for (double v : features.data())
      if (is_missing(v)) return true;
    return false;
  }

  bool both_classes_present() const {
    bool pos = false, neg = false;
    for (int y : labels) (y ? pos : neg) = true;
    return pos && neg;
  }

  bool operator==(const Dataset& o) const {
    return name == o.name && features == o.features && labels == o.labels &&
           feature_names == o.feature_names;
  }
};

// All invariants required before a dataset may enter training.
inline void validate_for_training(const Dataset& d) {
  if (d.n_instances() == 0) throw InvalidInput(d.name + ": empty dataset");
  if (d.has_missing())
    throw InvalidInput(d.name + ": missing values present; impute first");
  if (!d.features.all_finite())
    throw InvalidInput(d.name + ": non-finite feature values");
  if (!d.both_classes_present())
    throw InvalidInput(d.name + ": both classes must be present");
}

struct FeatureStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample (n-1); 0 when fewer than 2 observed values
  std::size_t missing_count = 0;
};

struct DatasetProfile {
  std::string name;
  std::size_t n_instances = 0;
  std::size_t n_features = 0;
  double faulty_fraction = 0.0;
  std::vector<std::string> feature_names;
  std::vector<FeatureStats> per_feature_stats;
};

// Counts are exact; per-feature stats cover non-missing entries only and
// reflect the pre-imputation state.
inline DatasetProfile profile(const Dataset& d) {
  DatasetProfile out;
  out.name = d.name;
  out.n_instances = d.n_instances();
  out.n_features = d.n_features();
  out.feature_names = d.feature_names;
  std::size_t faulty = 0;
  for (int y : d.labels) faulty += (y == 1);
  out.faulty_fraction =
      d.labels.empty() ? 0.0
                       : static_cast<double>(faulty) / static_cast<double>(d.labels.size());
  out.per_feature_stats.resize(d.n_features());
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    FeatureStats& fs = out.per_feature_stats[j];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < d.n_instances(); ++i) {
      const double v = d.features(i, j);
      if (is_missing(v)) {
        ++fs.missing_count;
        continue;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      ++n;
    }
    if (n == 0) continue;
    fs.min = lo;
    fs.max = hi;
    fs.mean = sum / static_cast<double>(n);
    if (n >= 2) {
      double ss = 0.0;
      for (std::size_t i = 0; i < d.n_instances(); ++i) {
        const double v = d.features(i, j);
        if (!is_missing(v)) ss += (v - fs.mean) * (v - fs.mean);
      }
      fs.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
  }
  return out;
}

enum class ImputeStrategy { median, drop_rows };

inline ImputeStrategy impute_strategy_from_string(const std::string& s) {
  if (s == "median") return ImputeStrategy::median;
  if (s == "drop_rows") return ImputeStrategy::drop_rows;
  throw ConfigError("unknown impute strategy: " + s);
}

inline const char* to_string(ImputeStrategy s) {
  return s == ImputeStrategy::median ? "median" : "drop_rows";
}

// median: each missing entry becomes the median of its feature's observed
// values (mean of the two middle values for even counts). drop_rows: rows
// with any missing entry are removed. Result has no missing entries.
inline Dataset impute_missing(const Dataset& d, ImputeStrategy strategy) {
  if (!d.has_missing()) return d;
  Dataset out = d;
  if (strategy == ImputeStrategy::median) {
    for (std::size_t j = 0; j < d.n_features(); ++j) {
      std::vector<double> observed;
      observed.reserve(d.n_instances());
      for (std::size_t i = 0; i < d.n_instances(); ++i)
        if (!is_missing(d.features(i, j))) observed.push_back(d.features(i, j));
      if (observed.empty())
        throw InvalidInput(d.name + ": feature '" + d.feature_names[j] +
                           "' is entirely missing; median imputation impossible");
      std::sort(observed.begin(), observed.end());
      const std::size_t n = observed.size();
      const double median = (n % 2 == 1)
                                ? observed[n / 2]
                                : 0.5 * (observed[n / 2 - 1] + observed[n / 2]);
      for (std::size_t i = 0; i < d.n_instances(); ++i)
        if (is_missing(out.features(i, j))) out.features(i, j) = median;
    }
    return out;
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.n_instances(); ++i) {
    bool complete = true;
    for (std::size_t j = 0; j < d.n_features(); ++j)
      if (is_missing(d.features(i, j))) {
        complete = false;
        break;
      }
    if (complete) keep.push_back(i);
  }
  if (keep.empty())
    throw InvalidInput(d.name + ": drop_rows would leave zero rows");
  out.features = d.features.take_rows(keep);
  out.labels.clear();
  for (std::size_t i : keep) out.labels.push_back(d.labels[i]);
  if (d.both_classes_present() && !out.both_classes_present())
    throw InvalidInput(d.name + ": drop_rows would leave a single class");
  return out;
}

}  // namespace defectbench
