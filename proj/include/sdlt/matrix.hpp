#pragma once

#include <cstddef>
#include <vector>

namespace sdlt {

using Vec = std::vector<double>;

// Dense column-major matrix. Column-major so that the solver, the
// debiasing correction, and the covariance estimator stream whole columns
// through the contiguous vector kernels.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;  // rows*cols entries, column j at data[j*rows]

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }

  double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

}  // namespace sdlt
