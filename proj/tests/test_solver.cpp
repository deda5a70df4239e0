#include "doctest.h"

#include <cmath>
#include <cstddef>

#include "oracles.hpp"
#include "sdlt/errors.hpp"
#include "sdlt/linalg.hpp"
#include "sdlt/model.hpp"
#include "sdlt/rng.hpp"
#include "sdlt/solver.hpp"

using namespace sdlt;

namespace {

Instance small_instance(std::size_t p, std::size_t n, std::size_t s0, double mu, double sigma,
                        std::uint64_t seed) {
  SignalSpec sig{.p = p, .s0 = s0, .mu = mu};
  return sample_instance(CovarianceModel::identity(), sig, n, sigma, seed);
}

// max_j of the stationarity violation computed from scratch
double recomputed_kkt_gap(const Matrix& X, const Vec& y, const Vec& theta, double lambda) {
  Vec r = fit_residual(X, y, theta);
  double gap = 0.0;
  for (std::size_t j = 0; j < X.cols; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) g += X(i, j) * r[i];
    g /= static_cast<double>(X.rows);
    double viol;
    if (theta[j] != 0.0) {
      viol = std::fabs(g - (theta[j] > 0.0 ? lambda : -lambda));
    } else {
      viol = std::max(std::fabs(g) - lambda, 0.0);
    }
    gap = std::max(gap, viol);
  }
  return gap;
}

}  // namespace

TEST_CASE("soft threshold basics") {
  CHECK(soft_threshold(5.0, 2.0) == 3.0);
  CHECK(soft_threshold(-1.0, 2.0) == 0.0);
  CHECK(soft_threshold(0.0, 0.0) == 0.0);
  CHECK(soft_threshold(-5.0, 2.0) == -3.0);
  // odd and 1-Lipschitz over a grid
  for (int i = -40; i <= 40; ++i) {
    const double x = 0.25 * i;
    for (int t = 0; t <= 10; ++t) {
      const double th = 0.3 * t;
      CHECK(soft_threshold(-x, th) == -soft_threshold(x, th));
      const double y = x + 0.1;
      // slack covers rounding of the interior subtractions, not a Lipschitz violation
      CHECK(std::fabs(soft_threshold(y, th) - soft_threshold(x, th)) <= 0.1 + 1e-12);
    }
  }
}

TEST_CASE("lambda at or above the critical level yields the zero fit") {
  Instance inst = small_instance(30, 40, 4, 0.8, 0.5, 21);
  const double lmax = lambda_max(inst.X, inst.y);
  for (double lam : {lmax, 1.5 * lmax}) {
    LassoFit fit = fit_lasso(inst.X, inst.y, lam);
    CHECK(fit.support_size == 0);
    for (double v : fit.theta_hat) CHECK(v == 0.0);
    CHECK(fit.kkt_gap <= 1e-7);
  }
}

TEST_CASE("orthogonal design reduces to coordinatewise soft thresholding") {
  // Sign-flip construction: 8x4 matrix with mutually orthogonal +-1 columns.
  const std::size_t n = 8, p = 4;
  Matrix X(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = (i % 2 == 0) ? 1.0 : -1.0;
    X(i, 2) = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
    X(i, 3) = X(i, 1) * X(i, 2);
  }
  Matrix gram = linalg::crossprod(X);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      CHECK(gram(a, b) / static_cast<double>(n) == (a == b ? 1.0 : 0.0));

  Rng rng(99);
  Vec y(n);
  for (double& v : y) v = rng.normal();
  for (double lam : {0.05, 0.2, 0.6}) {
    LassoFit fit = fit_lasso(X, y, lam, {.tol = 1e-10, .max_iter = 1000});
    for (std::size_t j = 0; j < p; ++j) {
      double corr = 0.0;
      for (std::size_t i = 0; i < n; ++i) corr += X(i, j) * y[i];
      corr /= static_cast<double>(n);
      CHECK(std::fabs(fit.theta_hat[j] - soft_threshold(corr, lam)) <= 1e-8);
    }
  }
}

TEST_CASE("unpenalized fit on a tall full-rank design matches least squares") {
  Instance inst = small_instance(6, 40, 2, 1.0, 0.3, 5);
  Vec ls = linalg::least_squares(inst.X, inst.y);
  LassoFit fit = fit_lasso(inst.X, inst.y, 0.0, {.tol = 1e-10, .max_iter = 50000});
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::fabs(fit.theta_hat[j] - ls[j]) <= 1e-6);
}

TEST_CASE("unpenalized fit refused when not unique") {
  Instance inst = small_instance(20, 10, 2, 1.0, 0.3, 5);
  CHECK_THROWS_AS(fit_lasso(inst.X, inst.y, 0.0), invalid_parameter_error);
}

TEST_CASE("solution matches the exact enumeration oracle on small problems") {
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    Instance inst = small_instance(6, 12, 2, 0.9, 0.4, seed);
    const double lmax = lambda_max(inst.X, inst.y);
    for (double frac : {0.7, 0.3, 0.1}) {
      const double lam = frac * lmax;
      LassoFit fit = fit_lasso(inst.X, inst.y, lam, {.tol = 1e-10, .max_iter = 20000});
      Vec exact = oracle::enumerate_lasso_minimizer(inst.X, inst.y, lam);
      const double f_fit = oracle::lasso_objective(inst.X, inst.y, fit.theta_hat, lam);
      const double f_exact = oracle::lasso_objective(inst.X, inst.y, exact, lam);
      CHECK(f_fit <= f_exact + 1e-8);
      CHECK(f_fit >= f_exact - 1e-8);
      for (std::size_t j = 0; j < 6; ++j) CHECK(std::fabs(fit.theta_hat[j] - exact[j]) <= 1e-5);
    }
  }
}

TEST_CASE("objective matches a proximal-gradient solve run to high accuracy") {
  Instance inst = small_instance(15, 25, 3, 0.8, 0.5, 404);
  const double lam = 0.3 * lambda_max(inst.X, inst.y);
  LassoFit fit = fit_lasso(inst.X, inst.y, lam, {.tol = 1e-10, .max_iter = 20000});
  Vec px = oracle::prox_grad_lasso(inst.X, inst.y, lam, 200000);
  const double f_fit = oracle::lasso_objective(inst.X, inst.y, fit.theta_hat, lam);
  const double f_px = oracle::lasso_objective(inst.X, inst.y, px, lam);
  CHECK(std::fabs(f_fit - f_px) <= 1e-8);
}

TEST_CASE("KKT certificate holds for every returned fit") {
  Instance inst = small_instance(80, 50, 8, 0.6, 1.0, 7);
  LassoPath path = lasso_path(inst.X, inst.y, 12, 0.01);
  for (std::size_t i = 0; i < path.fits.size(); ++i) {
    const LassoFit& fit = path.fits[i];
    CHECK(fit.kkt_gap <= 1e-7);
    const double gap = recomputed_kkt_gap(inst.X, inst.y, fit.theta_hat, fit.lambda);
    CHECK(gap <= 1e-6);
    // gradient bound form: |g_j| <= lambda + tol everywhere
    Vec r = fit_residual(inst.X, inst.y, fit.theta_hat);
    Vec g = linalg::matvec_t(inst.X, r);
    for (double& v : g) v = std::fabs(v) / static_cast<double>(inst.n());
    for (double v : g) CHECK(v <= fit.lambda + 1e-6);
  }
}

TEST_CASE("objective trace is non-increasing") {
  Instance inst = small_instance(60, 40, 6, 0.7, 0.8, 77);
  Vec trace;
  LassoOptions opts;
  opts.tol = 1e-9;
  opts.max_iter = 20000;
  opts.objective_trace = &trace;
  fit_lasso(inst.X, inst.y, 0.2 * lambda_max(inst.X, inst.y), opts);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
}

TEST_CASE("path mechanics: grid shape, zero head, warm equals cold") {
  Instance inst = small_instance(50, 35, 5, 0.8, 0.7, 13);
  {
    LassoPath two = lasso_path(inst.X, inst.y, 2, 0.5);
    REQUIRE(two.grid.size() == 2);
    CHECK(two.grid[0] == doctest::Approx(lambda_max(inst.X, inst.y)).epsilon(1e-14));
    CHECK(two.grid[1] == doctest::Approx(0.5 * two.grid[0]).epsilon(1e-14));
    CHECK(two.fits[0].support_size == 0);
  }
  LassoOptions tight;
  tight.tol = 1e-9;
  LassoPath path = lasso_path(inst.X, inst.y, 10, 0.1, tight);
  for (std::size_t i = 1; i < path.grid.size(); ++i) CHECK(path.grid[i] < path.grid[i - 1]);
  for (std::size_t i = 0; i < path.fits.size(); ++i) {
    LassoFit cold = fit_lasso(inst.X, inst.y, path.grid[i], tight);
    for (std::size_t j = 0; j < inst.p(); ++j) {
      CHECK(std::fabs(cold.theta_hat[j] - path.fits[i].theta_hat[j]) <= 1e-6);
    }
  }
  CHECK_THROWS_AS(lasso_path(inst.X, inst.y, 1, 0.5), invalid_parameter_error);
  CHECK_THROWS_AS(lasso_path(inst.X, inst.y, 5, 1.5), invalid_parameter_error);
}

TEST_CASE("support grows monotonically along the path for an orthogonal design") {
  const std::size_t n = 16, p = 8;
  Matrix X(n, p);
  // columns: products of sign patterns with disjoint frequencies -> orthogonal
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      unsigned bits = static_cast<unsigned>(i) & static_cast<unsigned>(j + 1);
      int parity = __builtin_popcount(bits) % 2;
      X(i, j) = parity == 0 ? 1.0 : -1.0;
    }
  }
  Matrix gram = linalg::crossprod(X);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      REQUIRE(gram(a, b) / static_cast<double>(n) == (a == b ? 1.0 : 0.0));
  Rng rng(3);
  Vec y(n);
  for (double& v : y) v = rng.normal() + 0.5;
  LassoPath path = lasso_path(X, y, 20, 0.01);
  for (std::size_t i = 1; i < path.fits.size(); ++i) {
    CHECK(path.fits[i].support_size >= path.fits[i - 1].support_size);
  }
}

TEST_CASE("iteration cap raises a non-convergence error carrying the gap") {
  Instance inst = small_instance(40, 30, 4, 0.9, 0.6, 55);
  LassoOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 1;
  try {
    fit_lasso(inst.X, inst.y, 0.05 * lambda_max(inst.X, inst.y), opts);
    FAIL("expected convergence_error");
  } catch (const convergence_error& e) {
    CHECK(e.kkt_gap > 0.0);
    CHECK(std::isfinite(e.kkt_gap));
  }
}

TEST_CASE("calibration solves lambda*d = kappa*tau and scales with kappa") {
  SignalSpec sig{.p = 200, .s0 = 10, .mu = 0.5};
  Instance inst = sample_instance(CovarianceModel::identity(), sig, 120, 1.0, 2024);
  const double kappa = 1.054;
  CalibrationResult cal = calibrate_lambda(inst.X, inst.y, kappa);
  CHECK(cal.lambda > 0.0);
  CHECK(cal.fit.lambda == cal.lambda);
  CHECK(cal.d >= 1.0);
  CHECK(cal.tau > 0.0);
  CHECK(std::fabs(cal.lambda * cal.d - kappa * cal.tau) <= 1e-2 * kappa * cal.tau);
  // the reported d and tau are reproducible from the fit itself
  CHECK(cal.d == doctest::Approx(1.0 / (1.0 - static_cast<double>(cal.fit.support_size) / 120.0))
                     .epsilon(1e-12));

  CalibrationResult cal2 = calibrate_lambda(inst.X, inst.y, 2.0 * kappa);
  CHECK(cal2.lambda > cal.lambda);
}

TEST_CASE("calibration failure reports the bracket endpoint values") {
  // kappa so small that lambda*d - kappa*tau never changes sign on the grid
  Instance inst = small_instance(30, 60, 3, 0.8, 0.5, 8);
  try {
    calibrate_lambda(inst.X, inst.y, 1e-12);
    FAIL("expected calibration_error");
  } catch (const calibration_error& e) {
    CHECK(e.h_at_high > 0.0);
    CHECK(e.h_at_low > 0.0);
  }
}

TEST_CASE("huge kappa lands on the exact empty-fit solution") {
  Instance inst = small_instance(25, 50, 3, 0.7, 0.5, 88);
  const double kappa = 1e4;
  CalibrationResult cal = calibrate_lambda(inst.X, inst.y, kappa);
  CHECK(cal.fit.support_size == 0);
  CHECK(cal.d == 1.0);
  CHECK(std::fabs(cal.lambda - kappa * cal.tau) <= 1e-9 * cal.lambda);
}
