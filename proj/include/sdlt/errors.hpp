#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy. config_error covers invalid user input (CLI exit code 1);
// numerical_error covers failures of the numerical machinery (exit code 2).

namespace sdlt {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A supplied covariance model is unusable (asymmetric, not positive definite,
// band too wide, ...). User input problem, hence config-class.
struct invalid_covariance_error : config_error {
  using config_error::config_error;
};

// A caller-supplied parameter is outside its documented domain.
struct invalid_parameter_error : config_error {
  using config_error::config_error;
};

// Iterative solver hit its iteration cap before meeting tolerance.
struct convergence_error : numerical_error {
  double kkt_gap;
  convergence_error(const std::string& msg, double gap)
      : numerical_error(msg), kkt_gap(gap) {}
};

// Bisection on lambda*d = kappa*tau found no sign change over the path.
struct calibration_error : numerical_error {
  double h_at_high;  // lambda*d - kappa*tau at the largest lambda probed
  double h_at_low;   // same at the smallest lambda probed
  calibration_error(const std::string& msg, double high, double low)
      : numerical_error(msg), h_at_high(high), h_at_low(low) {}
};

// Lasso support reached n, so d = (1 - support/n)^-1 is undefined.
struct degenerate_support_error : numerical_error {
  using numerical_error::numerical_error;
};

// All-zero residual: the MAD noise-scale estimate is undefined.
struct zero_scale_error : numerical_error {
  using numerical_error::numerical_error;
};

// Supplied precision matrix is unusable (asymmetric / non-positive diagonal).
struct invalid_precision_error : numerical_error {
  using numerical_error::numerical_error;
};

// Covariance-threshold fit degenerated (spread of the trimmed entries is 0).
struct degenerate_spread_error : numerical_error {
  using numerical_error::numerical_error;
};

// Factorization/solve failed (singular or rank-deficient input).
struct linalg_error : numerical_error {
  using numerical_error::numerical_error;
};

// Fixed-point iteration diverged.
struct fixed_point_error : numerical_error {
  using numerical_error::numerical_error;
};

}  // namespace sdlt
