#pragma once

#include <cstddef>

#include "sdlt/matrix.hpp"

// Covariance recovery by hard-thresholding the empirical covariance
// S = X^T X / n: the spread of the trimmed entry bulk sets the threshold, so
// sampling noise is zeroed while genuine structure survives. Also provides
// the off-diagonal deviation bound consumed by the covariance-free test and
// a ridge-repairing inversion for downstream precision corrections.

namespace sdlt::covest {

struct CovEstimate {
  Matrix sigma_hat;            // p x p thresholded covariance
  double sigma1 = 0.0;         // spread of all p^2 entries of S
  double sigma2 = 0.0;         // spread of the trimmed bulk {|S_ij| <= 3*sigma1}
  double kept_fraction = 0.0;  // fraction of entries surviving the threshold
};

// Threshold pipeline: sigma1 = sample standard deviation of all p^2 entries
// of S about their mean; the bulk keeps entries with |S_ij| <= 3*sigma1;
// sigma2 = sample standard deviation of the bulk about its own mean; the
// estimate zeroes entries with |S_ij| < 3*sigma2. Requires n >= 2, p >= 2.
// Throws degenerate_spread_error when the bulk is empty or has zero spread
// (all entries equal, e.g. an exactly orthonormal design).
CovEstimate estimate_covariance(const Matrix& X);

// row_max + 20*sqrt(log(p)/n): high-probability bound on the largest true
// off-diagonal covariance given the largest estimated one. Meaningful when
// log(p)/n is small; computed regardless.
double offdiag_bound(double sigma_hat_row_max, std::size_t p, std::size_t n);

// 1 - 6*p^(-1/3): probability floor attached to offdiag_bound. May be
// negative for small p, in which case the bound is vacuous.
double offdiag_bound_confidence(std::size_t p);

struct PrecisionEstimate {
  Matrix precision;    // inverse of sigma_hat + ridge * I
  double ridge = 0.0;  // 0 when sigma_hat itself was positive definite
};

// Symmetric inverse with ridge repair: thresholding does not preserve
// positive definiteness, so when factorization fails the smallest ridge
// 10^-k (k = 8 down to 0) restoring it is added and recorded. Throws
// linalg_error when even ridge 1 does not repair the matrix.
PrecisionEstimate invert_covariance(const Matrix& sigma_hat);

}  // namespace sdlt::covest
