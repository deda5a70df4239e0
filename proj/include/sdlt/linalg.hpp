#pragma once

#include "sdlt/matrix.hpp"

// Dense linear algebra on top of the vector kernels: just the pieces the
// estimators need (matrix-vector products, Gram matrices, Cholesky).

namespace sdlt::linalg {

// A*x (column-sweep accumulation)
Vec matvec(const Matrix& A, const Vec& x);

// A^T*x (one dot per column)
Vec matvec_t(const Matrix& A, const Vec& x);

// X^T X, both triangles filled
Matrix crossprod(const Matrix& X);

// max_{i,j} |A(i,j) - A(j,i)|
double max_asymmetry(const Matrix& A);

// In-place lower Cholesky factor of a symmetric positive definite A; only
// the lower triangle of the result is meaningful. Returns false when a
// pivot is non-positive or non-finite (A not positive definite).
bool cholesky_in_place(Matrix& A);

// Solve (L L^T) x = b given the lower factor, overwriting b with x.
void chol_solve_in_place(const Matrix& L, Vec& b);

// Full inverse of A = L L^T from its lower factor.
Matrix chol_inverse(const Matrix& L);

// Solve the least-squares problem min ||y - X b||_2 for X with full column
// rank via the normal equations. Throws linalg_error when X^T X is not
// positive definite.
Vec least_squares(const Matrix& X, const Vec& y);

}  // namespace sdlt::linalg
