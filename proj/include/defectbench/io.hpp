#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "defectbench/arff.hpp"
#include "defectbench/csv.hpp"
#include "defectbench/error.hpp"

namespace defectbench {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads .arff or .csv by extension. The dataset name defaults to the
// normalized file stem; CSV needs a label column (default "defects").
inline Dataset load_dataset(const std::string& path, const std::string& name = "",
                            const std::string& csv_label_column = "defects") {
  const std::filesystem::path p(path);
  const std::string stem = name.empty() ? p.stem().string() : name;
  const std::string ext = detail::lower(p.extension().string());
  const std::string text = read_file(path);
  Dataset d;
  if (ext == ".csv")
    d = parse_csv(text, csv_label_column, stem);
  else if (ext == ".arff")
    d = parse_arff(text, stem);
  else
    throw InvalidInput(path + ": unsupported extension (expected .arff or .csv)");
  d.source_path = path;
  return d;
}

}  // namespace defectbench
