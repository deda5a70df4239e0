#include "sdlt/debias.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdlt/csv.hpp"
#include "sdlt/errors.hpp"
#include "sdlt/kernels.hpp"
#include "sdlt/linalg.hpp"
#include "sdlt/stats.hpp"

namespace sdlt {

namespace k = kernels;

double scale_factor_d(std::size_t support_size, std::size_t n) {
  if (n == 0) throw invalid_parameter_error("sample size must be positive");
  if (support_size >= n)
    throw degenerate_support_error(
        "support size reaches the sample size; the interpolation factor is undefined");
  return static_cast<double>(n) / static_cast<double>(n - support_size);
}

double mad_tau(const Vec& residual, double d) {
  const std::size_t n = residual.size();
  if (n < 2) throw invalid_parameter_error("residual scale needs at least two observations");
  if (!(d > 0.0)) throw invalid_parameter_error("interpolation factor must be positive");

  static const double kQuantile75 = stats::normal_quantile(0.75);

  Vec abs(n);
  for (std::size_t i = 0; i < n; ++i) abs[i] = std::fabs(residual[i]);
  const std::size_t ell = (n + 1) / 2;  // index of the ell-th largest, ell = ceil(n/2)
  std::nth_element(abs.begin(), abs.begin() + static_cast<std::ptrdiff_t>(n - ell), abs.end());
  const double order_stat = abs[n - ell];
  if (order_stat == 0.0)
    throw zero_scale_error("residual median absolute value is zero; scale is degenerate");
  return order_stat * d / (std::sqrt(static_cast<double>(n)) * kQuantile75);
}

DebiasedEstimate debias(const LassoFit& fit, const Matrix& X, const Vec& y,
                        const Matrix* precision) {
  const std::size_t n = X.rows;
  const std::size_t p = X.cols;
  if (fit.theta_hat.size() != p)
    throw invalid_parameter_error("fit length does not match design columns");
  if (y.size() != n) throw invalid_parameter_error("response length does not match design rows");
  if (precision != nullptr) {
    if (precision->rows != p || precision->cols != p)
      throw invalid_precision_error("precision matrix dimensions do not match the design");
    if (linalg::max_asymmetry(*precision) > 1e-10)
      throw invalid_precision_error("precision matrix is not symmetric");
  }

  DebiasedEstimate est;
  est.d = scale_factor_d(fit.support_size, n);
  est.used_precision = (precision != nullptr) ? PrecisionKind::supplied : PrecisionKind::identity;

  Vec resid = fit_residual(X, y, fit.theta_hat);

  est.r = resid;
  k::scal(est.d / std::sqrt(static_cast<double>(n)), est.r.data(), n);

  if (k::max_abs(resid.data(), n) == 0.0) {
    // Interpolating fit: the correction vanishes and no scale is estimable.
    est.tau = 0.0;
    est.theta_u = fit.theta_hat;
    return est;
  }

  est.tau = mad_tau(resid, est.d);

  Vec correction = linalg::matvec_t(X, resid);
  k::scal(est.d / static_cast<double>(n), correction.data(), p);

  est.theta_u = fit.theta_hat;
  if (precision != nullptr) {
    Vec adjusted = linalg::matvec(*precision, correction);
    k::axpy(1.0, adjusted.data(), est.theta_u.data(), p);
  } else {
    k::axpy(1.0, correction.data(), est.theta_u.data(), p);
  }
  return est;
}

void write_debias_csv(const std::string& path, const LassoFit& fit, const DebiasedEstimate& est,
                      const Vec& z_scores) {
  const std::size_t p = est.theta_u.size();
  if (fit.theta_hat.size() != p || z_scores.size() != p)
    throw invalid_parameter_error("debias CSV inputs have mismatched lengths");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    rows.push_back({std::to_string(i), csv::fmt(fit.theta_hat[i]), csv::fmt(est.theta_u[i]),
                    csv::fmt(z_scores[i])});
  }
  csv::write_table(path, {"index", "theta_hat", "theta_u", "z_score"}, rows);
}

}  // namespace sdlt
