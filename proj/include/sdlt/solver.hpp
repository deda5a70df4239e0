#pragma once

#include <cstddef>
#include <vector>

#include "sdlt/matrix.hpp"

namespace sdlt {

// Output of one Lasso solve: minimizer of (1/2n)||y - X theta||^2 + lambda*||theta||_1.
// Coordinates are set to literal zero by soft-thresholding, so support_size counts
// exact zeros and kkt_gap certifies stationarity:
//   |g_j| <= lambda + tol off the support, g_j = lambda*sign(theta_j) +- tol on it,
// where g = (1/n) X^T (y - X theta).
struct LassoFit {
  double lambda = 0.0;
  Vec theta_hat;
  std::size_t support_size = 0;
  std::size_t iterations = 0;  // full coordinate sweeps performed
  double kkt_gap = 0.0;
};

struct LassoOptions {
  double tol = 1e-7;
  std::size_t max_iter = 100000;  // sweeps
  // When non-null, the objective value after each sweep is appended here.
  Vec* objective_trace = nullptr;
};

// Regularization path on a decreasing geometric grid; fits[k] solves at grid[k].
struct LassoPath {
  Vec grid;
  std::vector<LassoFit> fits;
};

// Calibrated regularization level: lambda solving lambda*d(lambda) = kappa*tau(lambda),
// with d the interpolation factor and tau the median-based residual scale of the fit.
struct CalibrationResult {
  double lambda = 0.0;
  LassoFit fit;
  double d = 0.0;
  double tau = 0.0;
};

double soft_threshold(double x, double t);

// y - X theta, exploiting sparsity of theta.
Vec fit_residual(const Matrix& X, const Vec& y, const Vec& theta);

double lasso_objective(const Matrix& X, const Vec& y, const Vec& theta, double lambda);

// Largest lambda with a nonzero solution: ||X^T y||_inf / n.
double lambda_max(const Matrix& X, const Vec& y);

LassoFit fit_lasso(const Matrix& X, const Vec& y, double lambda,
                   const LassoOptions& opts = {}, const Vec* warm_start = nullptr);

LassoPath lasso_path(const Matrix& X, const Vec& y, std::size_t grid_size = 100,
                     double lambda_min_ratio = 1e-3, const LassoOptions& opts = {});

// Bisection on h(lambda) = lambda*d - kappa*tau over the geometric grid bracket.
// rel_tol is relative to kappa*tau at the returned point.
CalibrationResult calibrate_lambda(const Matrix& X, const Vec& y, double kappa,
                                   double rel_tol = 1e-2, const LassoOptions& opts = {});

}  // namespace sdlt
