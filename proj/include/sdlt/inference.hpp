#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdlt/debias.hpp"
#include "sdlt/matrix.hpp"
#include "sdlt/solver.hpp"

// Hypothesis tests on debiased estimates: two-sided z-tests per coordinate,
// empirical error summaries against a known coefficient vector, and a
// covariance-free variant that widens the rejection threshold by an l1 bias
// allowance instead of using the design covariance.

namespace sdlt::inference {

// Per-coordinate two-sided test. decisions[i] = 1 iff p_values[i] <= alpha,
// and p_values[i] = 2*(1 - Phi(|z_scores[i]|)) always hold.
struct TestReport {
  double alpha = 0.0;
  Vec p_values;
  std::vector<int> decisions;
  Vec z_scores;
};

// Empirical error rates of a report against ground truth. A side is absent
// when the corresponding index set is empty (no nulls / no actives).
struct ErrorSummary {
  std::optional<double> type_I;  // mean decision over {i : theta0[i] == 0}
  std::optional<double> power;   // mean decision over {i : theta0[i] != 0}
  std::size_t active_count = 0;  // |{i : theta0[i] != 0}|
  std::size_t null_count = 0;    // |{i : theta0[i] == 0}|
};

// Inputs of the covariance-free test. s0_bound and phi0 are analysis
// quantities the caller must supply: they are not identifiable from data.
//
// WARNING: the defaults produced by covfree_defaults (s0_bound from the fitted
// support, phi0 = 1) are conveniences, not guarantees. phi0 = 1 presumes a
// well-conditioned design; an optimistic value inflates the test's size.
struct CovFreeParams {
  std::size_t s0_bound = 1;  // upper bound on the true support size (>= 1)
  double phi0 = 1.0;         // compatibility constant (> 0)
  double t = 2.0;            // tail parameter of the recommended lambda
  Vec max_offdiag;           // per-row bound on |Sigma_ij|, j != i (length p)
};

// Convenience defaults: s0_bound = max(1, fit.support_size), phi0 = 1, t = 2.
// See the warning on CovFreeParams.
CovFreeParams covfree_defaults(const LassoFit& fit, Vec max_offdiag);

// z_i = theta_u[i] / (tau * sqrt(precision_diag[i])), two-sided p-values,
// decisions at level alpha. precision_diag holds the diagonal of the inverse
// covariance (all ones for an isotropic design). P-values below 1e-300 are
// reported as exactly 0.
TestReport p_values(const DebiasedEstimate& est, const Vec& precision_diag,
                    double alpha);

// Isotropic shortcut: precision_diag = all ones.
TestReport p_values(const DebiasedEstimate& est, double alpha);

// Mean decision over exact zeros (type I error) and over nonzeros (power).
ErrorSummary evaluate(const TestReport& report, const Vec& theta0);

// Covariance-free test: xi_i = theta_u[i] / tau for an estimate formed
// WITHOUT precision correction, shrunk by the bias allowance
//   Delta_i = 4 * lambda * s0_bound * max_offdiag[i] / (tau * phi0^2),
// then P_i = 2*(1 - Phi((|xi_i| - Delta_i)_+)). The stored z-score is
// sign(xi_i) * (|xi_i| - Delta_i)_+ so the TestReport invariants hold.
TestReport covfree_test(const LassoFit& fit, const DebiasedEstimate& est,
                        const CovFreeParams& params, double alpha);

// Recommended regularization for the covariance-free test:
//   lambda = 4 * sigma * sqrt((t^2 + 2*log(p)) / n).
double covfree_lambda(double sigma, double t, std::size_t p, std::size_t n);

// Table export: index, theta0, theta_hat, theta_u, z, p_value, decision.
void write_test_report_csv(const std::string& path, const TestReport& report,
                           const Vec& theta0, const LassoFit& fit,
                           const DebiasedEstimate& est);

// z-score export for normalized-histogram plots: index, z, label, where the
// label is "active" when theta0[i] != 0 and "inactive" otherwise.
void write_zscore_csv(const std::string& path, const Vec& z_scores,
                      const Vec& theta0);

}  // namespace sdlt::inference
