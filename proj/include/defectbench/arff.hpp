#pragma once

#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defectbench/dataset.hpp"
#include "defectbench/error.hpp"

namespace defectbench {
namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

inline std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"')))
    return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::optional<double> parse_double(const std::string& token) {
  if (token.empty()) return std::nullopt;
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline bool is_truthy_class_value(const std::string& v) {
  return iequals(v, "true") || iequals(v, "yes") || iequals(v, "y") || v == "1";
}

inline bool names_class_attribute(const std::string& name) {
  return iequals(name, "defects") || iequals(name, "label") || iequals(name, "problems");
}

struct ArffAttribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> values;  // nominal only
  int line = 0;
};

}  // namespace detail

// Parser for the ARFF subset the Promise defect datasets use: '%' comments,
// @relation, @attribute <name> numeric|real|integer|{v1,...}, then @data with
// comma-separated rows. Keywords are case-insensitive, '?' marks a missing
// entry, line endings may be LF or CRLF.
//
// The class attribute is the one named defects/label/problems (any case), or
// failing that the last nominal attribute with exactly two values. Its value
// denoting a defect (true/yes/y/1) maps to label 1. All other attributes must
// be numeric.
inline Dataset parse_arff(const std::string& text, const std::string& name_override = "") {
  using namespace detail;

  std::vector<ArffAttribute> attrs;
  std::string relation;
  bool saw_relation = false;
  int data_line = 0;
  std::vector<std::vector<std::string>> raw_rows;
  std::vector<int> row_lines;

  int line_no = 0;
  std::size_t pos = 0;
  bool in_data = false;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '%') {
      if (pos > text.size()) break;
      continue;
    }

    if (!in_data) {
      if (stripped[0] != '@')
        throw ParseError(line_no, "expected @relation/@attribute/@data declaration");
      const std::size_t sp = stripped.find_first_of(" \t");
      const std::string keyword = lower(stripped.substr(0, sp));
      const std::string rest = sp == std::string::npos ? "" : trim(stripped.substr(sp));
      if (keyword == "@relation") {
        if (rest.empty()) throw ParseError(line_no, "@relation requires a name");
        relation = strip_quotes(rest);
        saw_relation = true;
      } else if (keyword == "@attribute") {
        ArffAttribute a;
        a.line = line_no;
        std::string decl = rest;
        if (decl.empty()) throw ParseError(line_no, "@attribute requires a name and a type");
        if (decl[0] == '\'' || decl[0] == '"') {
          const char quote = decl[0];
          const std::size_t close = decl.find(quote, 1);
          if (close == std::string::npos)
            throw ParseError(line_no, "unterminated quoted attribute name");
          a.name = decl.substr(1, close - 1);
          decl = trim(decl.substr(close + 1));
        } else {
          const std::size_t ws = decl.find_first_of(" \t");
          if (ws == std::string::npos)
            throw ParseError(line_no, "@attribute requires a type");
          a.name = decl.substr(0, ws);
          decl = trim(decl.substr(ws));
        }
        if (decl.empty()) throw ParseError(line_no, "@attribute requires a type");
        if (decl[0] == '{') {
          if (decl.back() != '}')
            throw ParseError(line_no, "unterminated nominal value list");
          a.nominal = true;
          for (auto& v : split_commas(std::string_view(decl).substr(1, decl.size() - 2)))
            a.values.push_back(strip_quotes(v));
        } else {
          const std::string type = lower(decl);
          if (type != "numeric" && type != "real" && type != "integer")
            throw ParseError(line_no, "unsupported attribute type '" + decl + "'");
        }
        attrs.push_back(std::move(a));
      } else if (keyword == "@data") {
        if (attrs.empty())
          throw ParseError(line_no, "@data before any @attribute declaration");
        in_data = true;
        data_line = line_no;
      } else {
        throw ParseError(line_no, "unknown declaration '" + keyword + "'");
      }
    } else {
      raw_rows.push_back(split_commas(stripped));
      row_lines.push_back(line_no);
    }
    if (pos > text.size()) break;
  }

  if (!in_data) throw ParseError(line_no, "missing @data section");
  if (!saw_relation) throw ParseError(1, "missing @relation declaration");
  if (raw_rows.empty()) throw ParseError(data_line, "empty @data section");

  // Locate the class attribute.
  std::size_t class_idx = attrs.size();
  for (std::size_t i = 0; i < attrs.size(); ++i)
    if (detail::names_class_attribute(attrs[i].name)) {
      class_idx = i;
      break;
    }
  if (class_idx == attrs.size()) {
    for (std::size_t i = attrs.size(); i-- > 0;)
      if (attrs[i].nominal && attrs[i].values.size() == 2) {
        class_idx = i;
        break;
      }
  }
  if (class_idx == attrs.size())
    throw ParseError(data_line, "no class attribute found (nominal binary or "
                                "named defects/label/problems)");
  const ArffAttribute& cls = attrs[class_idx];
  if (cls.nominal && cls.values.size() != 2)
    throw ParseError(cls.line, "class attribute must have exactly 2 values, has " +
                                   std::to_string(cls.values.size()));

  // Everything else must be numeric.
  for (std::size_t i = 0; i < attrs.size(); ++i)
    if (i != class_idx && attrs[i].nominal)
      throw ParseError(attrs[i].line,
                       "nominal feature '" + attrs[i].name + "' is not supported");

  int truthy_value = -1;  // index into cls.values that maps to label 1
  if (cls.nominal) {
    const bool t0 = detail::is_truthy_class_value(cls.values[0]);
    const bool t1 = detail::is_truthy_class_value(cls.values[1]);
    if (t0 == t1)
      throw ParseError(cls.line,
                       "cannot identify the defective class value among {" +
                           cls.values[0] + "," + cls.values[1] + "}");
    truthy_value = t1 ? 1 : 0;
  }

  Dataset d;
  d.name = !name_override.empty() ? normalize_name(name_override) : normalize_name(relation);
  d.feature_names.reserve(attrs.size() - 1);
  for (std::size_t i = 0; i < attrs.size(); ++i)
    if (i != class_idx) d.feature_names.push_back(attrs[i].name);
  for (std::size_t i = 0; i < d.feature_names.size(); ++i)
    for (std::size_t j = i + 1; j < d.feature_names.size(); ++j)
      if (d.feature_names[i] == d.feature_names[j])
        throw ParseError(data_line, "duplicate attribute name '" + d.feature_names[i] + "'");

  d.features = Matrix(raw_rows.size(), attrs.size() - 1);
  d.labels.resize(raw_rows.size());
  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    const auto& tokens = raw_rows[r];
    const int ln = row_lines[r];
    if (tokens.size() != attrs.size())
      throw ParseError(ln, "row has " + std::to_string(tokens.size()) +
                               " values, expected " + std::to_string(attrs.size()));
    std::size_t fj = 0;
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      const std::string& tok = tokens[c];
      if (c == class_idx) {
        if (tok == "?") throw ParseError(ln, "missing class label");
        if (cls.nominal) {
          const std::string val = detail::strip_quotes(tok);
          if (detail::iequals(val, cls.values[0]))
            d.labels[r] = (truthy_value == 0) ? 1 : 0;
          else if (detail::iequals(val, cls.values[1]))
            d.labels[r] = (truthy_value == 1) ? 1 : 0;
          else
            throw ParseError(ln, "class value '" + tok + "' is not in the declared set");
        } else {
          if (tok == "0")
            d.labels[r] = 0;
          else if (tok == "1")
            d.labels[r] = 1;
          else
            throw ParseError(ln, "numeric class attribute requires 0/1, got '" + tok + "'");
        }
      } else {
        if (tok == "?") {
          d.features(r, fj++) = missing_value();
        } else if (auto v = detail::parse_double(tok)) {
          d.features(r, fj++) = *v;
        } else {
          throw ParseError(ln, "non-numeric value '" + tok + "' for attribute '" +
                                   attrs[c].name + "'");
        }
      }
    }
  }
  return d;
}

}  // namespace defectbench
