#pragma once

#include <atomic>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "defectbench/evaluation.hpp"
#include "defectbench/io.hpp"
#include "defectbench/reference_table.hpp"

namespace defectbench {

// PCA defaults on only for the two datasets it is configured for in the
// shipped setup; everything else keeps the raw (standardized, decorrelated)
// feature space unless the config says otherwise.
inline bool default_use_pca(const std::string& dataset_name) {
  return dataset_name == "JM1" || dataset_name == "KC1_CL";
}

struct DatasetEntry {
  std::string name;
  std::string path;
  std::optional<bool> use_pca;  // unset = default_use_pca(name)
  ImputeStrategy impute = ImputeStrategy::median;

  bool resolved_use_pca() const { return use_pca ? *use_pca : default_use_pca(name); }
};

struct BenchmarkConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<ModelSpec> models;
  std::size_t k = 10;
  std::uint64_t master_seed = 42;
  PipelineConfig pipeline;  // use_pca is decided per dataset, not here
  std::string output_dir = "bench_out";

  void validate() const {
    if (datasets.empty()) throw ConfigError("benchmark config lists no datasets");
    if (models.empty()) throw ConfigError("benchmark config lists no models");
    if (k < 2) throw ConfigError("benchmark config: k must be at least 2");
    pipeline.validate();
    for (const ModelSpec& m : models) m.validate();
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      if (datasets[i].name.empty()) throw ConfigError("benchmark config: dataset with empty name");
      if (datasets[i].path.empty()) throw ConfigError("benchmark config: dataset with empty path");
      for (std::size_t j = i + 1; j < datasets.size(); ++j) {
        if (datasets[i].name == datasets[j].name)
          throw ConfigError("benchmark config: duplicate dataset name " + datasets[i].name);
        if (datasets[i].path == datasets[j].path)
          throw ConfigError("benchmark config: duplicate dataset path " + datasets[i].path);
      }
    }
  }
};

inline BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("benchmark config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "datasets" && key != "models" && key != "k" && key != "master_seed" &&
        key != "pipeline" && key != "output_dir")
      throw ConfigError("benchmark config: unknown key " + key);
  }
  BenchmarkConfig c;
  for (const auto& jd : j.value("datasets", nlohmann::json::array())) {
    DatasetEntry e;
    if (!jd.is_object() || !jd.contains("name") || !jd.contains("path"))
      throw ConfigError("benchmark config: each dataset needs name and path");
    e.name = jd.at("name").get<std::string>();
    e.path = jd.at("path").get<std::string>();
    if (jd.contains("use_pca")) e.use_pca = jd.at("use_pca").get<bool>();
    if (jd.contains("impute"))
      e.impute = impute_strategy_from_string(jd.at("impute").get<std::string>());
    c.datasets.push_back(std::move(e));
  }
  for (const auto& jm : j.value("models", nlohmann::json::array()))
    c.models.push_back(model_spec_from_json(jm));
  c.k = j.value("k", c.k);
  c.master_seed = j.value("master_seed", c.master_seed);
  if (j.contains("pipeline")) c.pipeline = j.at("pipeline").get<PipelineConfig>();
  c.output_dir = j.value("output_dir", c.output_dir);
  c.validate();
  return c;
}

// Every default made explicit, so a run can be reproduced from this alone.
inline nlohmann::json benchmark_config_to_json(const BenchmarkConfig& c) {
  nlohmann::json datasets = nlohmann::json::array();
  for (const DatasetEntry& e : c.datasets)
    datasets.push_back({{"name", e.name},
                        {"path", e.path},
                        {"use_pca", e.resolved_use_pca()},
                        {"impute", to_string(e.impute)}});
  nlohmann::json models = nlohmann::json::array();
  for (const ModelSpec& m : c.models) models.push_back(to_json(m));
  return {{"datasets", datasets},
          {"models", models},
          {"k", c.k},
          {"master_seed", c.master_seed},
          {"pipeline", c.pipeline},
          {"output_dir", c.output_dir}};
}

enum class CellStatus { ok, missing, failed };

struct BenchmarkCell {
  CellStatus status = CellStatus::missing;
  CvResult cv;
  std::string error;

  double mean_pct() const { return 100.0 * cv.report.mean_accuracy; }
};

struct DatasetRun {
  DatasetEntry entry;
  CellStatus status = CellStatus::missing;
  std::optional<Dataset> data;
  std::string error;
  double baseline_pct = 0.0;  // majority-class share of all rows, percent
  std::uint64_t file_checksum = 0;
};

struct BenchmarkResult {
  BenchmarkConfig config;
  std::vector<DatasetRun> datasets;
  std::vector<std::vector<BenchmarkCell>> cells;  // [model][dataset]

  bool any_failure() const {
    for (const DatasetRun& d : datasets)
      if (d.status == CellStatus::failed) return true;
    for (const auto& row : cells)
      for (const BenchmarkCell& c : row)
        if (c.status == CellStatus::failed) return true;
    return false;
  }
};

inline double majority_baseline_accuracy(const std::vector<int>& labels) {
  if (labels.empty()) throw InvalidInput("majority_baseline_accuracy: no labels");
  std::size_t pos = 0;
  for (int v : labels) pos += v == 1 ? 1 : 0;
  const std::size_t n = labels.size();
  return static_cast<double>(std::max(pos, n - pos)) / static_cast<double>(n);
}

inline std::uint64_t benchmark_cell_seed(std::uint64_t master_seed, const std::string& dataset) {
  // One substream per dataset: every model sees the same fold layout there.
  return derive_seed(master_seed, "dataset-" + dataset);
}

// Loads what exists, then fills the model x dataset grid. Absent dataset
// files become N/A cells; anything that throws becomes a failed cell with
// the message kept. Cells run on up to `jobs` threads (0 = all cores); each
// cell is a pure function of the config and master seed, so the schedule
// cannot change results.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::size_t jobs = 0) {
  config.validate();
  BenchmarkResult result;
  result.config = config;

  for (const DatasetEntry& entry : config.datasets) {
    DatasetRun run;
    run.entry = entry;
    if (!std::filesystem::exists(entry.path)) {
      run.status = CellStatus::missing;
    } else {
      try {
        const std::string bytes = read_file(entry.path);
        run.file_checksum = fnv1a64(bytes);
        Dataset d = load_dataset(entry.path, entry.name);
        if (d.has_missing()) d = impute_missing(d, entry.impute);
        run.baseline_pct = 100.0 * majority_baseline_accuracy(d.labels);
        run.data = std::move(d);
        run.status = CellStatus::ok;
      } catch (const std::exception& e) {
        run.status = CellStatus::failed;
        run.error = e.what();
      }
    }
    result.datasets.push_back(std::move(run));
  }

  result.cells.assign(config.models.size(),
                      std::vector<BenchmarkCell>(config.datasets.size()));
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t m = 0; m < config.models.size(); ++m)
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
      if (result.datasets[d].status == CellStatus::ok)
        tasks.emplace_back(m, d);
      else
        result.cells[m][d].status = result.datasets[d].status;
    }

  const auto run_cell = [&](std::size_t m, std::size_t d) {
    BenchmarkCell& cell = result.cells[m][d];
    const DatasetRun& ds = result.datasets[d];
    try {
      PipelineConfig pipe = config.pipeline;
      pipe.use_pca = ds.entry.resolved_use_pca();
      cell.cv = cross_validate(config.models[m], *ds.data, pipe, config.k,
                               benchmark_cell_seed(config.master_seed, ds.entry.name));
      cell.status = CellStatus::ok;
    } catch (const std::exception& e) {
      cell.status = CellStatus::failed;
      cell.error = e.what();
    }
  };

  std::size_t n_threads = jobs == 0 ? std::thread::hardware_concurrency() : jobs;
  n_threads = std::max<std::size_t>(1, std::min(n_threads, tasks.size()));
  if (n_threads <= 1) {
    for (const auto& [m, d] : tasks) run_cell(m, d);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
          run_cell(tasks[i].first, tasks[i].second);
      });
    for (std::thread& t : pool) t.join();
  }
  return result;
}

namespace detail {

inline std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", pct);
  return buf;
}

inline std::string cell_text(const BenchmarkCell& c) {
  switch (c.status) {
    case CellStatus::ok: return format_pct(c.mean_pct());
    case CellStatus::missing: return "N/A";
    case CellStatus::failed: return "ERR";
  }
  return "?";
}

}  // namespace detail

inline std::string render_table_csv(const BenchmarkResult& r) {
  std::string out = "model";
  for (const DatasetRun& d : r.datasets) out += "," + d.entry.name;
  out += "\n";
  for (std::size_t m = 0; m < r.config.models.size(); ++m) {
    out += to_string(r.config.models[m].kind);
    for (std::size_t d = 0; d < r.datasets.size(); ++d)
      out += "," + detail::cell_text(r.cells[m][d]);
    out += "\n";
  }
  out += "majority_baseline";
  for (const DatasetRun& d : r.datasets)
    out += "," + (d.status == CellStatus::ok ? detail::format_pct(d.baseline_pct)
                                             : std::string(d.status == CellStatus::missing
                                                               ? "N/A"
                                                               : "ERR"));
  out += "\n";
  return out;
}

inline std::string render_table_markdown(const BenchmarkResult& r) {
  std::string out = "# Benchmark results\n\n";
  out += "- metric: mean " + std::to_string(r.config.k) +
         "-fold cross-validation accuracy, percent, one decimal\n";
  out += "- master seed: " + std::to_string(r.config.master_seed) + "\n";
  out +=
      "- preprocessing is refit on each training fold only; held-out folds "
      "never influence fitted state\n";
  out +=
      "- majority_baseline predicts the majority class everywhere; treat it "
      "as the floor any real model must clear\n\n";
  out += "| model |";
  for (const DatasetRun& d : r.datasets) out += " " + d.entry.name + " |";
  out += "\n|---|";
  for (std::size_t d = 0; d < r.datasets.size(); ++d) out += "---|";
  out += "\n";
  for (std::size_t m = 0; m < r.config.models.size(); ++m) {
    out += "| " + std::string(to_string(r.config.models[m].kind)) + " |";
    for (std::size_t d = 0; d < r.datasets.size(); ++d)
      out += " " + detail::cell_text(r.cells[m][d]) + " |";
    out += "\n";
  }
  out += "| majority_baseline |";
  for (const DatasetRun& d : r.datasets)
    out += " " +
           (d.status == CellStatus::ok
                ? detail::format_pct(d.baseline_pct)
                : std::string(d.status == CellStatus::missing ? "N/A" : "ERR")) +
           " |";
  out += "\n";
  bool any_err = false;
  for (const DatasetRun& d : r.datasets) any_err = any_err || d.status == CellStatus::failed;
  for (const auto& row : r.cells)
    for (const BenchmarkCell& c : row) any_err = any_err || c.status == CellStatus::failed;
  if (any_err) {
    out += "\nErrors:\n";
    for (const DatasetRun& d : r.datasets)
      if (d.status == CellStatus::failed)
        out += "- " + d.entry.name + ": " + d.error + "\n";
    for (std::size_t m = 0; m < r.cells.size(); ++m)
      for (std::size_t d = 0; d < r.datasets.size(); ++d)
        if (r.cells[m][d].status == CellStatus::failed)
          out += "- " + std::string(to_string(r.config.models[m].kind)) + " on " +
                 r.datasets[d].entry.name + ": " + r.cells[m][d].error + "\n";
  }
  return out;
}

inline std::string render_folds_jsonl(const BenchmarkResult& r) {
  std::string out;
  for (std::size_t d = 0; d < r.datasets.size(); ++d)
    for (std::size_t m = 0; m < r.config.models.size(); ++m) {
      const BenchmarkCell& cell = r.cells[m][d];
      if (cell.status != CellStatus::ok) continue;
      for (const FoldDetail& f : cell.cv.folds) {
        const nlohmann::json rec = {
            {"dataset", r.datasets[d].entry.name},
            {"model", to_string(r.config.models[m].kind)},
            {"fold", f.fold_index},
            {"seed", cell.cv.seed},
            {"confusion",
             {{"tp", f.confusion.tp}, {"fp", f.confusion.fp}, {"tn", f.confusion.tn},
              {"fn", f.confusion.fn}}},
            {"accuracy", f.accuracy},
            {"train_time_ms", f.train_time_ms},
            {"state_hash", f.state_hash}};
        out += rec.dump();
        out += "\n";
      }
    }
  return out;
}

inline std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes table.md, table.csv, folds.jsonl, config.resolved.json (all
// deterministic for a given config + seed) plus run_meta.json, which carries
// the timestamp and content checksums and is the only file allowed to differ
// between identical reruns.
inline void write_benchmark_outputs(const BenchmarkResult& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (fs::path(out_dir) / name).string());
    f << content;
  };
  const std::string csv = render_table_csv(r);
  const std::string md = render_table_markdown(r);
  const std::string jsonl = render_folds_jsonl(r);
  const std::string resolved = benchmark_config_to_json(r.config).dump(2) + "\n";
  write("table.csv", csv);
  write("table.md", md);
  write("folds.jsonl", jsonl);
  write("config.resolved.json", resolved);

  nlohmann::json fixtures = nlohmann::json::object();
  for (const DatasetRun& d : r.datasets) {
    if (d.status == CellStatus::missing)
      fixtures[d.entry.name] = nullptr;
    else
      fixtures[d.entry.name] = d.file_checksum;
  }
  const nlohmann::json meta = {{"timestamp", iso8601_utc_now()},
                               {"fixture_checksums", fixtures},
                               {"output_checksums",
                                {{"table.csv", fnv1a64(csv)},
                                 {"table.md", fnv1a64(md)},
                                 {"folds.jsonl", fnv1a64(jsonl)},
                                 {"config.resolved.json", fnv1a64(resolved)}}}};
  write("run_meta.json", meta.dump(2) + "\n");
}

// Optional per-fold state dumps (fitted pipeline + model JSON) for
// reproducibility digging; big, so written only on request.
inline void write_state_dumps(const BenchmarkResult& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(out_dir) / "state";
  fs::create_directories(dir);
  for (std::size_t d = 0; d < r.datasets.size(); ++d)
    for (std::size_t m = 0; m < r.config.models.size(); ++m) {
      const BenchmarkCell& cell = r.cells[m][d];
      if (cell.status != CellStatus::ok) continue;
      nlohmann::json folds = nlohmann::json::array();
      for (const FoldDetail& f : cell.cv.folds)
        folds.push_back({{"fold", f.fold_index}, {"state_hash", f.state_hash}});
      const std::string name = r.datasets[d].entry.name + "_" +
                               to_string(r.config.models[m].kind) + ".json";
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw ConfigError("cannot write state dump " + (dir / name).string());
      f << nlohmann::json({{"dataset", r.datasets[d].entry.name},
                           {"model", to_string(r.config.models[m].kind)},
                           {"seed", cell.cv.seed},
                           {"folds", folds}})
               .dump(2)
        << "\n";
    }
}

// ---- report-side aggregation over folds.jsonl ----

enum class ReportMetric { accuracy, precision, recall, f1 };

inline ReportMetric report_metric_from_string(const std::string& s) {
  if (s == "accuracy") return ReportMetric::accuracy;
  if (s == "precision") return ReportMetric::precision;
  if (s == "recall") return ReportMetric::recall;
  if (s == "f1") return ReportMetric::f1;
  throw ConfigError("unknown metric: " + s);
}

struct FoldRecord {
  std::string dataset;
  std::string model;
  std::size_t fold = 0;
  Confusion confusion;
  double accuracy = 0.0;
};

inline std::vector<FoldRecord> parse_folds_jsonl(const std::string& text) {
  std::vector<FoldRecord> out;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      FoldRecord rec;
      rec.dataset = j.at("dataset").get<std::string>();
      rec.model = j.at("model").get<std::string>();
      rec.fold = j.at("fold").get<std::size_t>();
      const nlohmann::json& c = j.at("confusion");
      rec.confusion.tp = c.at("tp").get<std::size_t>();
      rec.confusion.fp = c.at("fp").get<std::size_t>();
      rec.confusion.tn = c.at("tn").get<std::size_t>();
      rec.confusion.fn = c.at("fn").get<std::size_t>();
      rec.accuracy = j.at("accuracy").get<double>();
      out.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("bad fold record: ") + e.what());
    }
  }
  if (out.empty()) throw InvalidInput("folds file holds no records");
  return out;
}

struct AggregatedCell {
  std::string dataset;
  std::string model;
  std::size_t n_folds = 0;
  double mean_accuracy = 0.0;  // mean of per-fold accuracies
  Confusion pooled;
};

// Regroups per-fold records into (dataset, model) cells, keeping first-seen
// order. mean_accuracy here must agree with the table the run wrote.
inline std::vector<AggregatedCell> aggregate_fold_records(const std::vector<FoldRecord>& records) {
  std::vector<AggregatedCell> cells;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const FoldRecord& rec : records) {
    const auto key = std::make_pair(rec.dataset, rec.model);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, cells.size());
      cells.push_back({rec.dataset, rec.model, 0, 0.0, {}});
      it = index.find(key);
    }
    AggregatedCell& cell = cells[it->second];
    cell.n_folds += 1;
    cell.mean_accuracy += rec.accuracy;
    cell.pooled.tp += rec.confusion.tp;
    cell.pooled.fp += rec.confusion.fp;
    cell.pooled.tn += rec.confusion.tn;
    cell.pooled.fn += rec.confusion.fn;
  }
  for (AggregatedCell& cell : cells)
    cell.mean_accuracy /= static_cast<double>(cell.n_folds);
  return cells;
}

inline double report_metric_value(const AggregatedCell& cell, ReportMetric metric) {
  if (metric == ReportMetric::accuracy) return cell.mean_accuracy;
  const ClassificationMetrics m = classification_metrics(cell.pooled);
  switch (metric) {
    case ReportMetric::precision: return m.precision;
    case ReportMetric::recall: return m.recall;
    case ReportMetric::f1: return m.f1;
    default: return m.accuracy;
  }
}

}  // namespace defectbench
