#include "sdlt/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdlt/errors.hpp"
#include "sdlt/kernels.hpp"
#include "sdlt/linalg.hpp"
#include "sdlt/stats.hpp"

namespace sdlt::theory {

namespace st = sdlt::stats;

double G(double alpha, double u) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw invalid_parameter_error("alpha must lie in [0, 1]");
  if (!(u >= 0.0)) throw invalid_parameter_error("shift u must be nonnegative");
  if (alpha == 0.0) return 0.0;
  if (alpha == 1.0) return 1.0;
  const double z = st::normal_quantile(1.0 - alpha / 2.0);
  // survival form avoids cancellation: 2 - Phi(z+u) - Phi(z-u) = Q(z+u) + Q(z-u)
  return st::normal_sf(z + u) + st::normal_sf(z - u);
}

namespace {

// T(xi) = phi(xi) - xi * Q(xi): the Gaussian excess mass beyond xi
double excess_mass(double xi) { return st::normal_pdf(xi) - xi * st::normal_sf(xi); }

// sparsity level for which xi is the optimal threshold
double eps_of_xi(double xi) {
  const double t = excess_mass(xi);
  return 2.0 * t / (xi + 2.0 * t);
}

}  // namespace

MinimaxRisk minimax_risk(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw invalid_parameter_error("sparsity level must lie strictly inside (0, 1)");
  // eps_of_xi decreases from 1 at xi = 0 toward 0; bracket then bisect.
  double lo = 0.0;
  double hi = 1.0;
  while (eps_of_xi(hi) > epsilon) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) break;  // eps_of_xi(1e3) is far below any representable epsilon
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-13 * (1.0 + hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (eps_of_xi(mid) > epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  MinimaxRisk out;
  out.xi_star = 0.5 * (lo + hi);
  out.M = 2.0 * st::normal_pdf(out.xi_star) / (out.xi_star + 2.0 * excess_mass(out.xi_star));
  return out;
}

double minimax_threshold_kappa(double epsilon) { return minimax_risk(epsilon).xi_star; }

double eps_bar(double delta) {
  if (!(delta > 0.0 && delta < 2.0))
    throw invalid_parameter_error("undersampling ratio must lie in (0, 2)");
  return 0.25 * delta / std::log(2.0 / delta);
}

double tau_star(double epsilon, double delta) {
  if (!(delta > 0.0)) throw invalid_parameter_error("undersampling ratio must be positive");
  const double m = minimax_risk(epsilon).M;
  if (delta <= m) return std::numeric_limits<double>::infinity();
  return std::sqrt(1.0 / (1.0 - m / delta));
}

TheoryPoint theory_point(double epsilon, double delta) {
  if (!(delta > 0.0)) throw invalid_parameter_error("undersampling ratio must be positive");
  const MinimaxRisk risk = minimax_risk(epsilon);
  TheoryPoint pt;
  pt.epsilon = epsilon;
  pt.delta = delta;
  pt.xi_star = risk.xi_star;
  pt.M = risk.M;
  pt.tau_finite = delta > risk.M;
  pt.tau_star =
      pt.tau_finite ? std::sqrt(1.0 / (1.0 - risk.M / delta)) : std::numeric_limits<double>::infinity();
  return pt;
}

double soft_threshold_mse(double m, double t) {
  // E[(eta(m + Z; t) - m)^2] split over the three soft-thresholding regions
  const double a = t - m;
  const double b = t + m;
  const double one_t2 = 1.0 + t * t;
  double v = one_t2 * (st::normal_sf(a) + st::normal_sf(b));
  v -= b * st::normal_pdf(a);
  v += (m - t) * st::normal_pdf(b);
  v += m * m * (st::normal_cdf(a) - st::normal_cdf(-b));
  return v;
}

FixedPointResult state_evolution_tau(double epsilon, double mu0, double sigma0, double delta,
                                     double kappa) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw invalid_parameter_error("sparsity level must lie in [0, 1)");
  if (!(mu0 >= 0.0)) throw invalid_parameter_error("scaled signal strength must be nonnegative");
  if (!(sigma0 > 0.0)) throw invalid_parameter_error("noise scale must be positive");
  if (!(delta > 0.0)) throw invalid_parameter_error("undersampling ratio must be positive");
  if (!(kappa > 0.0)) throw invalid_parameter_error("threshold multiplier must be positive");

  const double signal = mu0 * sigma0;
  const double s2 = sigma0 * sigma0;
  double tau2 = s2 + epsilon * signal * signal / delta;
  const double escape = 1e6 * sigma0;

  FixedPointResult out;
  const std::size_t cap = 10000;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < cap; ++it) {
    const double tau = std::sqrt(tau2);
    if (tau > escape)
      throw fixed_point_error("noise-scale iteration escaped; no finite fixed point");
    const double mse_null = soft_threshold_mse(0.0, kappa);
    const double mse_sig = (epsilon > 0.0) ? soft_threshold_mse(signal / tau, kappa) : 0.0;
    const double next2 = s2 + tau2 / delta * ((1.0 - epsilon) * mse_null + epsilon * mse_sig);
    const double next = std::sqrt(next2);
    residual = std::fabs(next - tau);
    tau2 = next2;
    if (residual <= 1e-10) {
      ++it;
      break;
    }
  }
  if (residual > 1e-10) {
    if (std::sqrt(tau2) > escape)
      throw fixed_point_error("noise-scale iteration escaped; no finite fixed point");
    throw fixed_point_error("noise-scale iteration failed to settle within the iteration cap");
  }
  out.tau = std::sqrt(tau2);
  out.iterations = it;
  out.residual = residual;
  return out;
}

double chi2_survival(int k, double x) { return st::chi2_survival(k, x); }

namespace {

double clamp01(double v) {
  if (v < 0.0) return 0.0;
  if (v > 1.0) return 1.0;
  return v;
}

}  // namespace

double minimax_upper_bound(double alpha, double mu, double sigma, const Matrix& Sigma,
                           std::size_t i, const std::vector<std::size_t>& S, std::size_t s0,
                           std::size_t n, double ell) {
  const std::size_t p = Sigma.rows;
  if (Sigma.cols != p) throw invalid_parameter_error("covariance matrix must be square");
  if (i >= p) throw invalid_parameter_error("coordinate index out of range");
  if (!(S.size() < s0)) throw invalid_parameter_error("conditioning set must have fewer than s0 entries");
  if (s0 > n) throw invalid_parameter_error("support size exceeds the sample size");
  if (!(mu >= 0.0) || !(sigma > 0.0)) throw invalid_parameter_error("signal/noise levels out of range");
  if (!(ell >= 0.0)) throw invalid_parameter_error("ell must be nonnegative");
  for (std::size_t s : S) {
    if (s >= p) throw invalid_parameter_error("conditioning index out of range");
    if (s == i) throw invalid_parameter_error("conditioning set must not contain the tested index");
  }

  double cond = Sigma(i, i);
  if (!S.empty()) {
    const std::size_t m = S.size();
    Matrix sub(m, m);
    Vec cross(m);
    for (std::size_t a = 0; a < m; ++a) {
      cross[a] = Sigma(S[a], i);
      for (std::size_t b = 0; b < m; ++b) sub(a, b) = Sigma(S[a], S[b]);
    }
    if (!linalg::cholesky_in_place(sub))
      throw linalg_error("conditioning block of the covariance is singular");
    Vec solved = cross;
    linalg::chol_solve_in_place(sub, solved);
    cond -= kernels::dot(cross.data(), solved.data(), m);
  }
  if (!(cond > 0.0)) throw linalg_error("conditional variance is not positive");

  const double dof = static_cast<double>(n - s0);
  const double sigma_eff = sigma / std::sqrt(cond * (dof + ell));
  const double bound = G(alpha, mu / sigma_eff) + chi2_survival(static_cast<int>(n - s0 + 1), dof + ell);
  return clamp01(bound);
}

double minimax_upper_bound_min(double alpha, double mu, double sigma, const Matrix& Sigma,
                               std::size_t i, const std::vector<std::size_t>& S, std::size_t s0,
                               std::size_t n) {
  const double step = std::sqrt(static_cast<double>(n - s0));
  double best = 1.0;
  for (int k = 0; k <= 10; ++k) {
    const double b = minimax_upper_bound(alpha, mu, sigma, Sigma, i, S, s0, n, k * step);
    if (b < best) best = b;
  }
  return best;
}

double standard_design_bound(double alpha, double mu, double sigma, std::size_t n, std::size_t s0,
                        double xi) {
  if (s0 > n) throw invalid_parameter_error("support size exceeds the sample size");
  if (!(mu >= 0.0) || !(sigma > 0.0)) throw invalid_parameter_error("signal/noise levels out of range");
  const double root = std::sqrt(static_cast<double>(n - s0 + 1));
  if (!(xi >= 0.0 && xi <= 1.5 * root))
    throw std::domain_error("xi outside [0, 1.5*sqrt(n - s0 + 1)]");
  const double bound = G(alpha, mu * (root + xi) / sigma) + std::exp(-xi * xi / 8.0);
  return clamp01(bound);
}

double standard_design_bound_min(double alpha, double mu, double sigma, std::size_t n, std::size_t s0) {
  const double top = 1.5 * std::sqrt(static_cast<double>(n - s0 + 1));
  double best = 1.0;
  const int grid = 400;
  for (int k = 0; k <= grid; ++k) {
    const double xi = top * static_cast<double>(k) / static_cast<double>(grid);
    const double b = standard_design_bound(alpha, mu, sigma, n, s0, xi);
    if (b < best) best = b;
  }
  return best;
}

double oracle_power(const Matrix& X, std::size_t i, const std::vector<std::size_t>& S, double mu,
                    double sigma, double alpha) {
  const std::size_t n = X.rows;
  if (i >= X.cols) throw invalid_parameter_error("coordinate index out of range");
  if (!(mu >= 0.0) || !(sigma > 0.0)) throw invalid_parameter_error("signal/noise levels out of range");
  for (std::size_t s : S) {
    if (s >= X.cols) throw invalid_parameter_error("conditioning index out of range");
    if (s == i) throw invalid_parameter_error("conditioning set must not contain the tested index");
  }

  Vec v(X.col(i), X.col(i) + n);
  if (!S.empty()) {
    // modified Gram-Schmidt with a second pass for numerical orthogonality
    std::vector<Vec> qs;
    qs.reserve(S.size());
    for (std::size_t s : S) {
      Vec q(X.col(s), X.col(s) + n);
      const double orig = std::sqrt(kernels::dot(q.data(), q.data(), n));
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vec& prev : qs) {
          const double c = kernels::dot(prev.data(), q.data(), n);
          kernels::axpy(-c, prev.data(), q.data(), n);
        }
      }
      const double nq = std::sqrt(kernels::dot(q.data(), q.data(), n));
      if (!(nq > 1e-10 * (orig > 0.0 ? orig : 1.0)))
        throw linalg_error("conditioning columns are linearly dependent");
      kernels::scal(1.0 / nq, q.data(), n);
      qs.push_back(std::move(q));
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& q : qs) {
        const double c = kernels::dot(q.data(), v.data(), n);
        kernels::axpy(-c, q.data(), v.data(), n);
      }
    }
  }
  const double norm = std::sqrt(kernels::dot(v.data(), v.data(), n));
  return G(alpha, mu * norm / sigma);
}

}  // namespace sdlt::theory
