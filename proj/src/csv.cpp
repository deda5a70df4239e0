#include "sdlt/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdlt/errors.hpp"

namespace sdlt::csv {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << fmt(m(i, j));
    }
    out << '\n';
  }
}

void write_vector(const std::string& path, const Vec& v) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  for (double x : v) out << fmt(x) << '\n';
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open for reading: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    rows.push_back(std::move(fields));
  }
  return rows;
}

Matrix read_matrix(const std::string& path) {
  const auto rows = read_rows(path);
  if (rows.empty()) throw config_error("empty matrix file: " + path);
  const std::size_t r = rows.size();
  const std::size_t c = rows[0].size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) {
      throw config_error("ragged matrix row in " + path + " at line " + std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rows[i][j], &used);
      } catch (const std::exception&) {
        throw config_error("non-numeric entry in " + path + ": '" + rows[i][j] + "'");
      }
      if (used != rows[i][j].size()) {
        throw config_error("non-numeric entry in " + path + ": '" + rows[i][j] + "'");
      }
      m(i, j) = v;
    }
  }
  return m;
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
}

}  // namespace sdlt::csv
