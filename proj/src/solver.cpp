#include "sdlt/solver.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "sdlt/debias.hpp"
#include "sdlt/errors.hpp"
#include "sdlt/kernels.hpp"
#include "sdlt/linalg.hpp"

namespace sdlt {

namespace k = kernels;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

Vec fit_residual(const Matrix& X, const Vec& y, const Vec& theta) {
  Vec r = y;
  for (std::size_t j = 0; j < X.cols; ++j) {
    if (theta[j] != 0.0) k::axpy(-theta[j], X.col(j), r.data(), X.rows);
  }
  return r;
}

double lasso_objective(const Matrix& X, const Vec& y, const Vec& theta, double lambda) {
  Vec r = fit_residual(X, y, theta);
  const double quad = 0.5 * k::dot(r.data(), r.data(), r.size()) / static_cast<double>(X.rows);
  double l1 = 0.0;
  for (double v : theta) l1 += std::fabs(v);
  return quad + lambda * l1;
}

double lambda_max(const Matrix& X, const Vec& y) {
  Vec g = linalg::matvec_t(X, y);
  return k::max_abs(g.data(), g.size()) / static_cast<double>(X.rows);
}

// Maximum stationarity violation of theta for the maintained residual r:
// gradient g_j = (1/n) x_j^T r must satisfy |g_j| <= lambda off the support
// and g_j = lambda * sign(theta_j) on it.
static double kkt_gap_of(const Matrix& X, const Vec& r, const Vec& theta, double lambda) {
  const std::size_t n = X.rows;
  double gap = 0.0;
  for (std::size_t j = 0; j < X.cols; ++j) {
    const double g = k::dot(X.col(j), r.data(), n) / static_cast<double>(n);
    double viol;
    if (theta[j] != 0.0) {
      viol = std::fabs(g - (theta[j] > 0.0 ? lambda : -lambda));
    } else {
      viol = std::fabs(g) - lambda;
      if (viol < 0.0) viol = 0.0;
    }
    if (viol > gap) gap = viol;
  }
  return gap;
}

LassoFit fit_lasso(const Matrix& X, const Vec& y, double lambda, const LassoOptions& opts,
                   const Vec* warm_start) {
  const std::size_t n = X.rows;
  const std::size_t p = X.cols;
  if (n == 0 || p == 0) throw invalid_parameter_error("design matrix is empty");
  if (y.size() != n) throw invalid_parameter_error("response length does not match design rows");
  if (!(lambda >= 0.0)) throw invalid_parameter_error("lambda must be nonnegative");
  if (!(opts.tol > 0.0)) throw invalid_parameter_error("tolerance must be positive");

  Vec colsq(p);
  bool has_zero_col = false;
  for (std::size_t j = 0; j < p; ++j) {
    colsq[j] = k::dot(X.col(j), X.col(j), n) / static_cast<double>(n);
    if (colsq[j] == 0.0) has_zero_col = true;
  }
  if (lambda == 0.0 && (p > n || has_zero_col)) {
    throw invalid_parameter_error(
        "unpenalized fit requested on a design without a unique least-squares solution");
  }

  Vec theta;
  if (warm_start != nullptr) {
    if (warm_start->size() != p)
      throw invalid_parameter_error("warm start length does not match design columns");
    theta = *warm_start;
  } else {
    theta.assign(p, 0.0);
  }

  Vec r = fit_residual(X, y, theta);

  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t sweep = 0;
  while (sweep < opts.max_iter) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (colsq[j] == 0.0) continue;  // lambda > 0 here, so this coordinate stays at zero
      const double* xj = X.col(j);
      const double old = theta[j];
      const double rho = k::dot(xj, r.data(), n) / static_cast<double>(n) + colsq[j] * old;
      const double next = soft_threshold(rho, lambda) / colsq[j];
      if (next != old) {
        k::axpy(old - next, xj, r.data(), n);
        theta[j] = next;
        const double delta = std::fabs(next - old);
        if (delta > max_delta) max_delta = delta;
      }
    }
    ++sweep;
    if (opts.objective_trace != nullptr) {
      const double quad = 0.5 * k::dot(r.data(), r.data(), n) / static_cast<double>(n);
      double l1 = 0.0;
      for (double v : theta) l1 += std::fabs(v);
      opts.objective_trace->push_back(quad + lambda * l1);
    }
    if (max_delta < opts.tol) {
      // Refresh the residual before certifying, so the certificate is not
      // polluted by drift accumulated through incremental updates.
      r = fit_residual(X, y, theta);
      gap = kkt_gap_of(X, r, theta, lambda);
      if (gap <= opts.tol) {
        converged = true;
        break;
      }
    }
  }

  if (!converged) {
    if (!std::isfinite(gap)) {
      r = fit_residual(X, y, theta);
      gap = kkt_gap_of(X, r, theta, lambda);
    }
    throw convergence_error("coordinate descent hit the iteration cap before meeting tolerance", gap);
  }

  LassoFit fit;
  fit.lambda = lambda;
  fit.theta_hat = std::move(theta);
  fit.support_size = 0;
  for (double v : fit.theta_hat)
    if (v != 0.0) ++fit.support_size;
  fit.iterations = sweep;
  fit.kkt_gap = gap;
  return fit;
}

LassoPath lasso_path(const Matrix& X, const Vec& y, std::size_t grid_size, double lambda_min_ratio,
                     const LassoOptions& opts) {
  if (grid_size < 2) throw invalid_parameter_error("path grid needs at least two points");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
    throw invalid_parameter_error("lambda_min_ratio must lie in (0, 1)");
  const double lmax = lambda_max(X, y);
  if (!(lmax > 0.0)) throw zero_scale_error("X^T y vanishes; the regularization path is degenerate");

  LassoPath path;
  path.grid.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    path.grid[i] =
        lmax * std::pow(lambda_min_ratio, static_cast<double>(i) / static_cast<double>(grid_size - 1));
  }
  path.fits.reserve(grid_size);
  const Vec* warm = nullptr;
  for (std::size_t i = 0; i < grid_size; ++i) {
    path.fits.push_back(fit_lasso(X, y, path.grid[i], opts, warm));
    warm = &path.fits.back().theta_hat;
  }
  return path;
}

namespace {

struct CalEval {
  double lambda = 0.0;
  LassoFit fit;
  double d = 0.0;
  double tau = 0.0;
  double h = 0.0;  // lambda*d - kappa*tau
};

CalEval evaluate_h(const Matrix& X, const Vec& y, double lambda, double kappa,
                   const LassoOptions& opts, const Vec* warm) {
  CalEval e;
  e.lambda = lambda;
  e.fit = fit_lasso(X, y, lambda, opts, warm);
  e.d = scale_factor_d(e.fit.support_size, X.rows);
  Vec resid = fit_residual(X, y, e.fit.theta_hat);
  e.tau = mad_tau(resid, e.d);
  e.h = lambda * e.d - kappa * e.tau;
  return e;
}

}  // namespace

CalibrationResult calibrate_lambda(const Matrix& X, const Vec& y, double kappa, double rel_tol,
                                   const LassoOptions& opts) {
  if (!(kappa > 0.0)) throw invalid_parameter_error("kappa must be positive");
  if (!(rel_tol > 0.0)) throw invalid_parameter_error("calibration tolerance must be positive");

  constexpr std::size_t kGridSize = 100;
  constexpr double kGridRatio = 1e-3;
  const double lmax = lambda_max(X, y);
  if (!(lmax > 0.0)) throw zero_scale_error("X^T y vanishes; cannot calibrate lambda");

  CalEval hi = evaluate_h(X, y, lmax, kappa, opts, nullptr);
  if (hi.h < 0.0) {
    // Above lmax the fit stays empty (d = 1, tau fixed), so lambda = kappa*tau
    // solves the equation exactly.
    CalEval at = evaluate_h(X, y, kappa * hi.tau, kappa, opts, nullptr);
    return {at.lambda, std::move(at.fit), at.d, at.tau};
  }

  const double h_at_high = hi.h;
  CalEval lo;
  bool bracketed = false;
  for (std::size_t i = 1; i < kGridSize; ++i) {
    const double lam =
        lmax * std::pow(kGridRatio, static_cast<double>(i) / static_cast<double>(kGridSize - 1));
    CalEval e;
    try {
      e = evaluate_h(X, y, lam, kappa, opts, &hi.fit.theta_hat);
    } catch (const degenerate_support_error&) {
      throw calibration_error("lambda*d - kappa*tau does not change sign across the bracket", h_at_high, hi.h);
    } catch (const zero_scale_error&) {
      throw calibration_error("lambda*d - kappa*tau does not change sign across the bracket", h_at_high, hi.h);
    }
    if (e.h <= 0.0) {
      lo = std::move(e);
      bracketed = true;
      break;
    }
    hi = std::move(e);
  }
  if (!bracketed) throw calibration_error("lambda*d - kappa*tau does not change sign across the bracket", h_at_high, hi.h);

  CalEval best = (std::fabs(hi.h) < std::fabs(lo.h)) ? hi : lo;
  for (std::size_t iter = 0; iter < 200; ++iter) {
    if (std::fabs(best.h) <= rel_tol * kappa * best.tau) break;
    if (hi.lambda - lo.lambda <= 1e-13 * lmax) break;
    const double mid = 0.5 * (hi.lambda + lo.lambda);
    CalEval m;
    try {
      m = evaluate_h(X, y, mid, kappa, opts, &lo.fit.theta_hat);
    } catch (const degenerate_support_error&) {
      throw calibration_error("bisection bracket collapsed before meeting tolerance", hi.h, lo.h);
    } catch (const zero_scale_error&) {
      throw calibration_error("bisection bracket collapsed before meeting tolerance", hi.h, lo.h);
    }
    if (std::fabs(m.h) < std::fabs(best.h)) best = m;
    if (m.h > 0.0) {
      hi = std::move(m);
    } else {
      lo = std::move(m);
    }
  }
  if (!(std::fabs(best.h) <= rel_tol * kappa * best.tau)) throw calibration_error("bisection bracket collapsed before meeting tolerance", hi.h, lo.h);
  return {best.lambda, std::move(best.fit), best.d, best.tau};
}

}  // namespace sdlt
