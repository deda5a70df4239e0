#pragma once

#include <string>
#include <vector>

#include "sdlt/matrix.hpp"

// CSV exchange: matrices are row-major and header-free; report files carry a
// header row. All floating-point output uses round-trip precision.

namespace sdlt::csv {

// full-precision decimal form that parses back to the same double
std::string fmt(double x);

void write_matrix(const std::string& path, const Matrix& m);

// header-free numeric matrix; throws config_error on ragged or
// non-numeric input
Matrix read_matrix(const std::string& path);

void write_vector(const std::string& path, const Vec& v);

// raw comma-split rows (no quoting rules; fields are trimmed of spaces)
std::vector<std::vector<std::string>> read_rows(const std::string& path);

// generic table writer: one header row then the data rows
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

}  // namespace sdlt::csv
