// defectbench command line: dataset profiling, benchmark runs, report
// rendering. Exit codes: 0 ok, 2 bad input or config, 3 benchmark finished
// but some cells errored.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "defectbench/defectbench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

std::string pct1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_profile(const std::string& path, const std::string& format,
                const std::string& label_column) {
  const defectbench::Dataset d = defectbench::load_dataset(path, "", label_column);
  const defectbench::DatasetProfile p = defectbench::profile(d);
  const std::size_t attributes = p.n_features + 1;  // features plus the class column
  std::size_t missing_total = 0;
  for (const auto& fs : p.per_feature_stats) missing_total += fs.missing_count;

  if (format == "text") {
    std::cout << "dataset=" << p.name << " source=" << path << "\n";
    std::cout << "instances=" << p.n_instances << " attributes=" << attributes
              << " features=" << p.n_features << " faulty=" << pct1(p.faulty_fraction)
              << "% missing_values=" << missing_total << "\n";
    std::cout << "\nfeature stats (observed values only):\n";
    std::printf("%-24s %12s %12s %12s %12s %8s\n", "name", "min", "max", "mean", "std",
                "missing");
    for (std::size_t j = 0; j < p.n_features; ++j) {
      const auto& fs = p.per_feature_stats[j];
      std::printf("%-24s %12g %12g %12g %12g %8zu\n", p.feature_names[j].c_str(), fs.min,
                  fs.max, fs.mean, fs.std, fs.missing_count);
    }
    return kExitOk;
  }
  if (format == "csv") {
    std::cout << "# dataset=" << p.name << " instances=" << p.n_instances
              << " attributes=" << attributes << " faulty=" << pct1(p.faulty_fraction)
              << "%\n";
    std::cout << "name,min,max,mean,std,missing\n";
    for (std::size_t j = 0; j < p.n_features; ++j) {
      const auto& fs = p.per_feature_stats[j];
      std::cout << p.feature_names[j] << "," << num(fs.min) << "," << num(fs.max) << ","
                << num(fs.mean) << "," << num(fs.std) << "," << fs.missing_count << "\n";
    }
    return kExitOk;
  }
  if (format == "json") {
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t j = 0; j < p.n_features; ++j) {
      const auto& fs = p.per_feature_stats[j];
      features.push_back({{"name", p.feature_names[j]},
                          {"min", fs.min},
                          {"max", fs.max},
                          {"mean", fs.mean},
                          {"std", fs.std},
                          {"missing", fs.missing_count}});
    }
    const nlohmann::json out = {{"name", p.name},
                                {"source", path},
                                {"n_instances", p.n_instances},
                                {"n_features", p.n_features},
                                {"attributes", attributes},
                                {"faulty_fraction", p.faulty_fraction},
                                {"features", features}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }
  throw defectbench::ConfigError("unknown format: " + format);
}

int cmd_bench(const std::string& config_path, const std::vector<std::string>& dataset_filter,
              const std::vector<std::string>& model_filter, bool seed_set, std::uint64_t seed,
              std::size_t jobs, const std::string& output_dir_override, bool k_set,
              std::size_t k, bool dump_state) {
  defectbench::BenchmarkConfig config =
      defectbench::benchmark_config_from_json(nlohmann::json::parse(defectbench::read_file(config_path)));
  if (!dataset_filter.empty()) {
    std::vector<defectbench::DatasetEntry> keep;
    for (const std::string& want : dataset_filter) {
      bool found = false;
      for (const auto& e : config.datasets)
        if (e.name == want) {
          keep.push_back(e);
          found = true;
        }
      if (!found)
        throw defectbench::ConfigError("--datasets names '" + want + "', not in the config");
    }
    config.datasets = std::move(keep);
  }
  if (!model_filter.empty()) {
    std::vector<defectbench::ModelSpec> keep;
    for (const std::string& want : model_filter) {
      const defectbench::ModelKind kind = defectbench::model_kind_from_string(want);
      bool found = false;
      for (const auto& m : config.models)
        if (m.kind == kind) {
          keep.push_back(m);
          found = true;
        }
      if (!found)
        throw defectbench::ConfigError("--models names '" + want + "', not in the config");
    }
    config.models = std::move(keep);
  }
  if (seed_set) config.master_seed = seed;
  if (k_set) config.k = k;
  if (!output_dir_override.empty()) config.output_dir = output_dir_override;
  config.validate();

  const defectbench::BenchmarkResult result = defectbench::run_benchmark(config, jobs);
  defectbench::write_benchmark_outputs(result, config.output_dir);
  if (dump_state) defectbench::write_state_dumps(result, config.output_dir);

  std::cout << defectbench::render_table_markdown(result);
  std::cout << "\nartifacts written to " << config.output_dir << "/\n";
  return result.any_failure() ? kExitPartial : kExitOk;
}

int cmd_report(const std::string& folds_path, const std::string& metric_name,
               bool against_paper) {
  const defectbench::ReportMetric metric = defectbench::report_metric_from_string(metric_name);
  const std::vector<defectbench::FoldRecord> records =
      defectbench::parse_folds_jsonl(defectbench::read_file(folds_path));
  const std::vector<defectbench::AggregatedCell> cells =
      defectbench::aggregate_fold_records(records);

  std::vector<std::string> datasets, models;
  for (const auto& c : cells) {
    if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
      datasets.push_back(c.dataset);
    if (std::find(models.begin(), models.end(), c.model) == models.end())
      models.push_back(c.model);
  }
  const auto find_cell = [&](const std::string& m,
                             const std::string& d) -> const defectbench::AggregatedCell* {
    for (const auto& c : cells)
      if (c.model == m && c.dataset == d) return &c;
    return nullptr;
  };

  std::cout << "metric: " << metric_name
            << (metric == defectbench::ReportMetric::accuracy
                    ? " (mean over folds, percent)"
                    : " (pooled over folds, percent)")
            << "\n\n";
  std::printf("%-22s", "model");
  for (const auto& d : datasets) std::printf(" %10s", d.c_str());
  std::printf("\n");
  for (const auto& m : models) {
    std::printf("%-22s", m.c_str());
    for (const auto& d : datasets) {
      const auto* c = find_cell(m, d);
      if (!c) {
        std::printf(" %10s", "N/A");
      } else {
        std::printf(" %10s", pct1(defectbench::report_metric_value(*c, metric)).c_str());
      }
    }
    std::printf("\n");
  }

  if (against_paper) {
    std::cout << "\ncomparison against the published reference table (accuracy, percent):\n";
    std::printf("%-10s %-22s %10s %10s %10s\n", "dataset", "model", "ours", "reference",
                "delta");
    for (const auto& d : datasets)
      for (const auto& m : models) {
        const auto* c = find_cell(m, d);
        if (!c) continue;
        defectbench::ModelKind kind;
        try {
          kind = defectbench::model_kind_from_string(m);
        } catch (const defectbench::ConfigError&) {
          continue;  // rows like a baseline have no reference counterpart
        }
        const auto ref = defectbench::reference_accuracy(kind, d);
        if (!ref) continue;
        const double ours = 100.0 * c->mean_accuracy;
        char refbuf[32], deltabuf[32];
        std::snprintf(refbuf, sizeof(refbuf), "%.1f", *ref);
        std::snprintf(deltabuf, sizeof(deltabuf), "%+.1f", ours - *ref);
        std::printf("%-10s %-22s %10s %10s %10s\n", d.c_str(), m.c_str(),
                    pct1(c->mean_accuracy).c_str(), refbuf, deltabuf);
      }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"software defect prediction benchmark toolkit"};
  app.require_subcommand(1);

  // profile
  auto* profile = app.add_subcommand("profile", "summarize one dataset file");
  std::string profile_path, profile_format = "text", profile_label = "defects";
  profile->add_option("path", profile_path, "dataset file (.arff or .csv)")->required();
  profile->add_option("--format", profile_format, "text, csv, or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  profile->add_option("--label-column", profile_label, "label column name for csv inputs");

  // bench
  auto* bench = app.add_subcommand("bench", "run the benchmark grid from a config file");
  std::string bench_config, bench_datasets, bench_models, bench_output;
  std::uint64_t bench_seed = 0;
  std::size_t bench_jobs = 0, bench_k = 0;
  bool bench_dump_state = false;
  bench->add_option("--config", bench_config, "benchmark config (json)")->required();
  bench->add_option("--datasets", bench_datasets, "comma-separated dataset names to keep");
  bench->add_option("--models", bench_models, "comma-separated model kinds to keep");
  auto* seed_opt = bench->add_option("--seed", bench_seed, "override master seed");
  bench->add_option("--jobs", bench_jobs, "worker threads (default: all cores)");
  bench->add_option("--output-dir", bench_output, "override the config output_dir");
  auto* k_opt = bench->add_option("-k,--folds", bench_k, "override fold count");
  bench->add_flag("--dump-state", bench_dump_state, "also write per-cell state summaries");

  // report
  auto* report = app.add_subcommand("report", "re-aggregate a folds.jsonl without retraining");
  std::string report_path, report_metric = "accuracy";
  bool report_against_paper = false;
  report->add_option("folds", report_path, "path to folds.jsonl")->required();
  report->add_option("--metric", report_metric, "accuracy, precision, recall, or f1")
      ->check(CLI::IsMember({"accuracy", "precision", "recall", "f1"}));
  report->add_flag("--against-paper", report_against_paper,
                   "diff each cell against the embedded published reference accuracies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (profile->parsed()) return cmd_profile(profile_path, profile_format, profile_label);
    if (bench->parsed())
      return cmd_bench(bench_config, split_list(bench_datasets), split_list(bench_models),
                       seed_opt->count() > 0, bench_seed, bench_jobs, bench_output,
                       k_opt->count() > 0, bench_k, bench_dump_state);
    if (report->parsed()) return cmd_report(report_path, report_metric, report_against_paper);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
