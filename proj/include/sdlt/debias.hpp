#pragma once

#include <cstddef>
#include <string>

#include "sdlt/matrix.hpp"
#include "sdlt/solver.hpp"

namespace sdlt {

enum class PrecisionKind { identity, supplied };

// Bias-corrected coefficient estimate with its scale diagnostics:
//   d   = (1 - support_size/n)^-1
//   r   = (d/sqrt(n)) * (y - X theta_hat)
//   tau = median-absolute-deviation scale of the residual (0 only when the
//         residual vanishes identically, in which case theta_u == theta_hat)
struct DebiasedEstimate {
  Vec theta_u;
  double d = 1.0;
  double tau = 0.0;
  Vec r;
  PrecisionKind used_precision = PrecisionKind::identity;
};

// Interpolation factor d = (1 - support_size/n)^-1; requires support_size < n.
double scale_factor_d(std::size_t support_size, std::size_t n);

// Noise-scale estimate from the raw residual y - X theta_hat:
//   tau = |v|_(l) * d / (sqrt(n) * quantile(0.75)),  l = ceil(n/2),
// where |v|_(l) is the l-th largest absolute entry.
double mad_tau(const Vec& residual, double d);

// theta_u = theta_hat + (d/n) * P * X^T (y - X theta_hat), with P the supplied
// precision matrix, or the identity when precision == nullptr.
DebiasedEstimate debias(const LassoFit& fit, const Matrix& X, const Vec& y,
                        const Matrix* precision = nullptr);

// CSV with columns index,theta_hat,theta_u,z_score.
void write_debias_csv(const std::string& path, const LassoFit& fit,
                      const DebiasedEstimate& est, const Vec& z_scores);

}  // namespace sdlt
