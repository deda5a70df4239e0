#include "sdlt/linalg.hpp"

#include <cmath>

#include "sdlt/errors.hpp"
#include "sdlt/kernels.hpp"

namespace sdlt::linalg {

namespace k = sdlt::kernels;

Vec matvec(const Matrix& A, const Vec& x) {
  Vec y(A.rows, 0.0);
  for (std::size_t j = 0; j < A.cols; ++j) {
    if (x[j] != 0.0) k::axpy(x[j], A.col(j), y.data(), A.rows);
  }
  return y;
}

Vec matvec_t(const Matrix& A, const Vec& x) {
  Vec y(A.cols, 0.0);
  for (std::size_t j = 0; j < A.cols; ++j) {
    y[j] = k::dot(A.col(j), x.data(), A.rows);
  }
  return y;
}

Matrix crossprod(const Matrix& X) {
  const std::size_t p = X.cols;
  Matrix G(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = k::dot(X.col(i), X.col(j), X.rows);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

double max_asymmetry(const Matrix& A) {
  double m = 0.0;
  for (std::size_t j = 0; j < A.cols; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      m = std::fmax(m, std::fabs(A(i, j) - A(j, i)));
    }
  }
  return m;
}

bool cholesky_in_place(Matrix& A) {
  const std::size_t n = A.rows;
  for (std::size_t j = 0; j < n; ++j) {
    // subtract the contributions of the previous columns from column j
    for (std::size_t kcol = 0; kcol < j; ++kcol) {
      const double ljk = A(j, kcol);
      if (ljk != 0.0) {
        k::axpy(-ljk, &A(j, kcol), &A(j, j), n - j);
      }
    }
    const double pivot = A(j, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
    const double ljj = std::sqrt(pivot);
    A(j, j) = ljj;
    if (j + 1 < n) k::scal(1.0 / ljj, &A(j + 1, j), n - j - 1);
  }
  return true;
}

void chol_solve_in_place(const Matrix& L, Vec& b) {
  const std::size_t n = L.rows;
  // forward: L z = b (column-oriented so updates hit contiguous memory)
  for (std::size_t j = 0; j < n; ++j) {
    b[j] /= L(j, j);
    if (j + 1 < n) k::axpy(-b[j], L.col(j) + j + 1, b.data() + j + 1, n - j - 1);
  }
  // backward: L^T x = z
  for (std::size_t jj = n; jj-- > 0;) {
    double s = b[jj];
    if (jj + 1 < n) s -= k::dot(L.col(jj) + jj + 1, b.data() + jj + 1, n - jj - 1);
    b[jj] = s / L(jj, jj);
  }
}

Matrix chol_inverse(const Matrix& L) {
  const std::size_t n = L.rows;
  Matrix inv(n, n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    chol_solve_in_place(L, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = e[i];
  }
  // symmetrize: the column solves agree only to rounding
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  }
  return inv;
}

Vec least_squares(const Matrix& X, const Vec& y) {
  Matrix G = crossprod(X);
  if (!cholesky_in_place(G)) {
    throw linalg_error("least_squares: X^T X is not positive definite");
  }
  Vec b = matvec_t(X, y);
  chol_solve_in_place(G, b);
  return b;
}

}  // namespace sdlt::linalg
