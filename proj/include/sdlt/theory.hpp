#pragma once

#include <cstddef>
#include <vector>

#include "sdlt/matrix.hpp"

// Analytic layer: two-sided power curve G, minimax soft-thresholding risk and
// its threshold, the noise-scale fixed point for the converged estimator, and
// closed-form power bounds for finite designs.

namespace sdlt::theory {

// Power of the two-sided level-alpha z-test against a mean shift u >= 0:
//   G(alpha, u) = 2 - Phi(z + u) - Phi(z - u),  z = Phi^-1(1 - alpha/2).
// Boundary conventions: G(0, u) = 0 and G(1, u) = 1.
double G(double alpha, double u);

// Parametric solution of the sparse soft-thresholding minimax problem:
// xi_star is the unique root of
//   eps(xi) = 2(phi(xi) - xi*Phi(-xi)) / (xi + 2(phi(xi) - xi*Phi(-xi)))
// and M = 2 phi(xi*) / (xi* + 2(phi(xi*) - xi* Phi(-xi*))).
struct MinimaxRisk {
  double xi_star = 0.0;
  double M = 0.0;
};
MinimaxRisk minimax_risk(double epsilon);

// Threshold parameter achieving the minimax risk at sparsity epsilon.
double minimax_threshold_kappa(double epsilon);

// Surrogate sparsity level 0.25 * delta / log(2/delta) used to tune kappa
// when the true sparsity is treated as unknown; requires 0 < delta < 2.
double eps_bar(double delta);

// Asymptotic worst-case noise inflation: sqrt(1/(1 - M(eps)/delta)) when
// delta > M(eps), +infinity otherwise.
double tau_star(double epsilon, double delta);

struct TheoryPoint {
  double epsilon = 0.0;
  double delta = 0.0;
  double xi_star = 0.0;
  double M = 0.0;
  double tau_star = 0.0;  // +infinity when delta <= M
  bool tau_finite = false;
};
TheoryPoint theory_point(double epsilon, double delta);

struct FixedPointResult {
  double tau = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Fixed point of tau^2 = sigma0^2 + (1/delta) E[(eta(T + tau Z; kappa tau) - T)^2]
// where T = mu0*sigma0 with probability epsilon and 0 otherwise, Z standard
// normal, and eta the soft-thresholding map. Stops when successive tau values
// agree to 1e-10; iteration escaping 1e6*sigma0 or failing to settle raises a
// fixed-point error.
FixedPointResult state_evolution_tau(double epsilon, double mu0, double sigma0, double delta,
                                     double kappa);

// Mean squared error of soft thresholding at threshold t applied to m + Z,
// Z ~ N(0,1), in closed form (building block of the fixed-point map).
double soft_threshold_mse(double m, double t);

// Survival function of a chi-squared variable with k degrees of freedom.
double chi2_survival(int k, double x);

// Power ceiling for testing coordinate i when a size-(s0-1) subset S of the
// remaining support is conditioned on:
//   G(alpha, mu / sigma_eff(ell)) + F_{n-s0+1}(n - s0 + ell),
// sigma_eff(ell) = sigma / sqrt(cond * (n - s0 + ell)) with cond the Schur
// complement Sigma_ii - Sigma_iS Sigma_SS^-1 Sigma_Si. Clamped to [0,1].
double minimax_upper_bound(double alpha, double mu, double sigma, const Matrix& Sigma,
                           std::size_t i, const std::vector<std::size_t>& S, std::size_t s0,
                           std::size_t n, double ell);

// Minimum of minimax_upper_bound over the grid ell in {0, r, 2r, ..., 10r},
// r = sqrt(n - s0).
double minimax_upper_bound_min(double alpha, double mu, double sigma, const Matrix& Sigma,
                               std::size_t i, const std::vector<std::size_t>& S, std::size_t s0,
                               std::size_t n);

// Standard-design power ceiling G(alpha, mu(sqrt(n-s0+1)+xi)/sigma) + e^{-xi^2/8},
// valid for 0 <= xi <= 1.5*sqrt(n-s0+1). Clamped to [0,1].
double standard_design_bound(double alpha, double mu, double sigma, std::size_t n, std::size_t s0,
                        double xi);

// Minimum of standard_design_bound over a dense xi grid spanning its domain.
double standard_design_bound_min(double alpha, double mu, double sigma, std::size_t n, std::size_t s0);

// Exact power of the oracle z-test for coordinate i given knowledge of a
// support set S (i not in S): G(alpha, mu * ||P_S_perp x_i||_2 / sigma).
double oracle_power(const Matrix& X, std::size_t i, const std::vector<std::size_t>& S, double mu,
                    double sigma, double alpha);

}  // namespace sdlt::theory
