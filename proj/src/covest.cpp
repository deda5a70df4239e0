#include "sdlt/covest.hpp"

#include <cmath>
#include <cstddef>

#include "sdlt/errors.hpp"
#include "sdlt/linalg.hpp"

namespace sdlt::covest {

namespace {

struct MeanSpread {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

// two-pass sample mean / standard deviation over the entries selected by keep
template <typename Keep>
MeanSpread spread_of(const Matrix& S, Keep keep) {
  MeanSpread out;
  double sum = 0.0;
  for (std::size_t j = 0; j < S.cols; ++j) {
    for (std::size_t i = 0; i < S.rows; ++i) {
      const double v = S(i, j);
      if (!keep(v)) continue;
      sum += v;
      ++out.count;
    }
  }
  if (out.count < 2) return out;
  out.mean = sum / static_cast<double>(out.count);
  double ss = 0.0;
  for (std::size_t j = 0; j < S.cols; ++j) {
    for (std::size_t i = 0; i < S.rows; ++i) {
      const double v = S(i, j);
      if (!keep(v)) continue;
      const double c = v - out.mean;
      ss += c * c;
    }
  }
  out.sd = std::sqrt(ss / static_cast<double>(out.count - 1));
  return out;
}

}  // namespace

CovEstimate estimate_covariance(const Matrix& X) {
  const std::size_t n = X.rows;
  const std::size_t p = X.cols;
  if (n < 2 || p < 2) {
    throw invalid_parameter_error(
        "covariance estimation needs at least a 2 x 2 design");
  }

  Matrix S = linalg::crossprod(X);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < p; ++i) S(i, j) /= static_cast<double>(n);
  }

  const MeanSpread all = spread_of(S, [](double) { return true; });
  const double cut1 = 3.0 * all.sd;
  const MeanSpread bulk =
      spread_of(S, [cut1](double v) { return std::fabs(v) <= cut1; });
  if (bulk.count < 2 || !(bulk.sd > 0.0)) {
    throw degenerate_spread_error(
        "trimmed covariance entries have no spread to set a threshold");
  }

  CovEstimate out;
  out.sigma1 = all.sd;
  out.sigma2 = bulk.sd;
  out.sigma_hat = Matrix(p, p);
  const double cut2 = 3.0 * bulk.sd;
  std::size_t kept = 0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < p; ++i) {
      const double v = S(i, j);
      if (std::fabs(v) >= cut2) {
        out.sigma_hat(i, j) = v;
        ++kept;
      }
    }
  }
  out.kept_fraction =
      static_cast<double>(kept) / static_cast<double>(p * p);
  return out;
}

double offdiag_bound(double sigma_hat_row_max, std::size_t p, std::size_t n) {
  if (p < 2 || n < 1) {
    throw invalid_parameter_error(
        "off-diagonal bound needs p >= 2 and n >= 1");
  }
  return sigma_hat_row_max +
         20.0 * std::sqrt(std::log(static_cast<double>(p)) /
                          static_cast<double>(n));
}

double offdiag_bound_confidence(std::size_t p) {
  if (p < 1) throw invalid_parameter_error("dimension must be positive");
  return 1.0 - 6.0 * std::pow(static_cast<double>(p), -1.0 / 3.0);
}

PrecisionEstimate invert_covariance(const Matrix& sigma_hat) {
  const std::size_t p = sigma_hat.rows;
  if (p == 0 || sigma_hat.cols != p) {
    throw invalid_parameter_error("covariance to invert must be square");
  }
  PrecisionEstimate out;
  // try the matrix as-is, then ridges 1e-8, 1e-7, ..., 1
  for (int attempt = -1; attempt <= 8; ++attempt) {
    const double ridge =
        attempt < 0 ? 0.0 : std::pow(10.0, static_cast<double>(attempt - 8));
    Matrix L = sigma_hat;
    if (ridge > 0.0) {
      for (std::size_t i = 0; i < p; ++i) L(i, i) += ridge;
    }
    if (linalg::cholesky_in_place(L)) {
      out.precision = linalg::chol_inverse(L);
      out.ridge = ridge;
      return out;
    }
  }
  throw linalg_error(
      "covariance estimate is not positive definite even after ridge repair");
}

}  // namespace sdlt::covest
