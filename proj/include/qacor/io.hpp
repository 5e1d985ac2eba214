#pragma once

// Matrix files and deterministic number formatting.
//
// CSV: each matrix is n lines of n comma-separated decimals; matrices are
// separated by one or more blank lines. Spaces and tabs around a field are
// ignored, as is a trailing '\r'. A field must be a complete decimal or
// scientific literal, optionally signed; it is converted with std::from_chars,
// which rounds correctly, so parsing is bit-exact.
//
// JSON: an array of matrices, each an array of row arrays of numbers. A bare
// matrix (array of rows) is accepted as a one-element list.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "qacor/error.hpp"
#include "qacor/types.hpp"

namespace qacor::io {

enum class MatrixFormat { Csv, Json };

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string where(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double parse_field(std::string_view field, std::size_t line, std::size_t col) {
  std::string_view f = trim(field);
  if (!f.empty() && f.front() == '+') f.remove_prefix(1);
  if (f.empty()) {
    throw Error(Errc::ParseError, where(line, col) + ": empty field");
  }
  double value = 0.0;
  const auto r = std::from_chars(f.data(), f.data() + f.size(), value);
  if (r.ec != std::errc() || r.ptr != f.data() + f.size()) {
    throw Error(Errc::ParseError,
                where(line, col) + ": '" + std::string(trim(field)) + "' is not a number");
  }
  return value;
}

inline Matrix finish_block(const std::vector<std::vector<double>>& rows, std::size_t first_line) {
  const std::size_t n = rows.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(Errc::ParseError, where(first_line + i, std::min(rows[i].size(), n) + 1) +
                                        ": expected " + std::to_string(n) + " fields (square " +
                                        std::to_string(n) + "x" + std::to_string(n) +
                                        " matrix), found " + std::to_string(rows[i].size()));
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace detail

inline std::vector<Matrix> parse_csv(std::string_view text) {
  std::vector<Matrix> out;
  std::vector<std::vector<double>> rows;
  std::size_t block_start = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (detail::trim(line).empty()) {
      if (!rows.empty()) {
        out.push_back(detail::finish_block(rows, block_start));
        rows.clear();
      }
    } else {
      if (rows.empty()) block_start = line_no;
      std::vector<double> row;
      std::size_t fpos = 0;
      std::size_t col = 1;
      while (true) {
        const std::size_t comma = line.find(',', fpos);
        const std::string_view field =
            line.substr(fpos, comma == std::string_view::npos ? std::string_view::npos : comma - fpos);
        row.push_back(detail::parse_field(field, line_no, col));
        if (comma == std::string_view::npos) break;
        fpos = comma + 1;
        ++col;
      }
      rows.push_back(std::move(row));
    }
    pos = end + 1;
  }
  if (!rows.empty()) out.push_back(detail::finish_block(rows, block_start));
  if (out.empty()) {
    throw Error(Errc::ParseError, "no matrix found");
  }
  return out;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw Error(Errc::ParseError, "matrix must be a non-empty array of rows");
  }
  const std::size_t n = j.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != n) {
      throw Error(Errc::ParseError, "row " + std::to_string(i + 1) + " must be an array of " +
                                        std::to_string(n) + " numbers");
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!row[k].is_number()) {
        throw Error(Errc::ParseError, "row " + std::to_string(i + 1) + ", column " +
                                          std::to_string(k + 1) + " is not a number");
      }
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

inline std::vector<Matrix> parse_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw Error(Errc::ParseError, "expected an array of matrices");
  }
  const bool bare = j[0].is_array() && !j[0].empty() && j[0][0].is_number();
  std::vector<Matrix> out;
  if (bare) {
    out.push_back(matrix_from_json(j));
  } else {
    for (const auto& m : j) out.push_back(matrix_from_json(m));
  }
  return out;
}

inline std::vector<Matrix> parse_matrices(std::string_view text, MatrixFormat fmt) {
  return fmt == MatrixFormat::Json ? parse_json(text) : parse_csv(text);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::ParseError, "cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<Matrix> read_matrix_file(const std::string& path, MatrixFormat fmt) {
  try {
    return parse_matrices(read_file(path), fmt);
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) {
      throw Error(Errc::ParseError, path + ": " + std::string(e.what()));
    }
    throw;
  }
}

inline nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string to_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace qacor::io
