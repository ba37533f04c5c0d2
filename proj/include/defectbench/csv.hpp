#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "defectbench/arff.hpp"
#include "defectbench/dataset.hpp"
#include "defectbench/error.hpp"

namespace defectbench {
namespace detail {

// One CSV record; double-quoted fields accepted, "" unescapes to ".
inline std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = true;
      cur.clear();
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline int parse_csv_label(const std::string& token, int line_no) {
  if (token == "0" || iequals(token, "false") || iequals(token, "no")) return 0;
  if (token == "1" || iequals(token, "true") || iequals(token, "yes")) return 1;
  throw ParseError(line_no, "label value '" + token + "' is not one of 0/1/true/false/yes/no");
}

}  // namespace detail

// Header-first CSV with one label column named by the caller. Empty cells and
// '?' are missing feature values. Produces the same Dataset contract as
// parse_arff.
inline Dataset parse_csv(const std::string& text, const std::string& label_column,
                         const std::string& name = "") {
  using namespace detail;

  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "empty CSV document");

  const std::vector<std::string> header = split_csv_record(lines[0]);
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) {
      label_idx = i;
      break;
    }
  if (label_idx == header.size())
    throw ParseError(1, "unknown label column '" + label_column + "'");

  Dataset d;
  d.name = normalize_name(name);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (i != label_idx) d.feature_names.push_back(header[i]);
  for (std::size_t i = 0; i < d.feature_names.size(); ++i)
    for (std::size_t j = i + 1; j < d.feature_names.size(); ++j)
      if (d.feature_names[i] == d.feature_names[j])
        throw ParseError(1, "duplicate column name '" + d.feature_names[i] + "'");

  const std::size_t n_rows = lines.size() - 1;
  if (n_rows == 0) throw ParseError(1, "CSV has a header but no data rows");
  d.features = Matrix(n_rows, header.size() - 1);
  d.labels.resize(n_rows);

  std::size_t r = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty())
      throw ParseError(line_no, "blank row inside CSV body");
    const std::vector<std::string> tokens = split_csv_record(lines[li]);
    if (tokens.size() != header.size())
      throw ParseError(line_no, "row has " + std::to_string(tokens.size()) +
                                    " values, expected " + std::to_string(header.size()));
    std::size_t fj = 0;
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      const std::string& tok = tokens[c];
      if (c == label_idx) {
        if (tok.empty() || tok == "?") throw ParseError(line_no, "missing label value");
        d.labels[r] = parse_csv_label(tok, line_no);
      } else if (tok.empty() || tok == "?") {
        d.features(r, fj++) = missing_value();
      } else if (auto v = parse_double(tok)) {
        d.features(r, fj++) = *v;
      } else {
        throw ParseError(line_no, "cannot parse numeric cell '" + tok + "' in column '" +
                                      header[c] + "'");
      }
    }
    ++r;
  }
  return d;
}

}  // namespace defectbench
