#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "sdlt/stats.hpp"

namespace st = sdlt::stats;

TEST_CASE("normal_cdf basics and symmetry") {
  CHECK(st::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double x : {0.1, 0.5, 1.0, 1.96, 3.0, 7.5, 12.0, 37.0}) {
    CHECK(std::fabs(st::normal_cdf(x) + st::normal_cdf(-x) - 1.0) < 1e-14);
    CHECK(std::fabs(st::normal_cdf(x) - oracle::erf_cdf(x)) < 1e-14);
  }
  CHECK(st::normal_cdf(40.0) == 1.0);
  CHECK(st::normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("normal_quantile inverts the CDF to 1e-12") {
  const double qs[] = {1e-12, 1e-8,  1e-4, 0.01,  0.02425, 0.1,  0.25, 0.5,
                       0.75,  0.975, 0.99, 0.999, 1 - 1e-6, 1 - 1e-10};
  for (double q : qs) {
    const double x = st::normal_quantile(q);
    CHECK(std::fabs(st::normal_cdf(x) - q) <= 1e-12);
  }
}

TEST_CASE("normal_quantile known values from an independent root solve") {
  CHECK(st::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
  CHECK(st::normal_quantile(0.75) == doctest::Approx(0.674489750196).epsilon(1e-11));
  for (double q : {0.001, 0.3, 0.6, 0.9, 0.9999}) {
    CHECK(st::normal_quantile(q) == doctest::Approx(oracle::bisect_quantile(q)).epsilon(1e-10));
  }
}

TEST_CASE("normal_quantile rejects the boundary") {
  CHECK_THROWS_AS(st::normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(st::normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(st::normal_quantile(-0.5), std::domain_error);
  CHECK_THROWS_AS(st::normal_quantile(1.5), std::domain_error);
}

TEST_CASE("chi2_survival closed forms") {
  CHECK(st::chi2_survival(1, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st::chi2_survival(7, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  // two degrees of freedom: exp(-x/2)
  for (double x = 0.1; x <= 20.0; x += 0.3) {
    CHECK(std::fabs(st::chi2_survival(2, x) - std::exp(-0.5 * x)) < 1e-10);
  }
  // one degree of freedom: 2(1 - Phi(sqrt(x)))
  CHECK(st::chi2_survival(1, 1.0) == doctest::Approx(2.0 * (1.0 - st::normal_cdf(1.0))).epsilon(1e-12));
  CHECK(st::chi2_survival(2, 2.0) == doctest::Approx(0.367879441).epsilon(1e-9));
}

TEST_CASE("chi2_survival is decreasing in x") {
  double prev = 1.1;
  for (double x = 0.0; x <= 30.0; x += 0.5) {
    const double v = st::chi2_survival(5, x);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("chi2_survival at even degrees matches the finite Poisson sum") {
  // for k = 2m, Q(m, x/2) = exp(-x/2) * sum_{i<m} (x/2)^i / i!
  for (int m : {1, 2, 3, 5, 8}) {
    for (double x : {0.5, 2.0, 7.0, 19.0}) {
      double term = 1.0, sum = 1.0;
      for (int i = 1; i < m; ++i) {
        term *= (0.5 * x) / i;
        sum += term;
      }
      const double ref = std::exp(-0.5 * x) * sum;
      CHECK(st::chi2_survival(2 * m, x) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("gamma_q domain errors") {
  CHECK_THROWS_AS(st::gamma_q(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(st::gamma_q(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(st::chi2_survival(0, 1.0), std::domain_error);
}

TEST_CASE("ks_distance on a hand-checked sample") {
  // sample {0.1, 0.2, 0.9} against U(0,1): steps at 1/3 and 2/3
  std::vector<double> s{0.1, 0.9, 0.2};
  const double d = st::ks_distance(s, [](double x) { return x; });
  // sup gap: at x=0.2 the empirical jumps to 2/3 while F=0.2 -> 7/15
  CHECK(d == doctest::Approx(2.0 / 3.0 - 0.2).epsilon(1e-12));
}

TEST_CASE("mean_std matches direct arithmetic") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto ms = st::mean_std(v);
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(st::mean_std({}).mean == 0.0);
  CHECK(st::mean_std({7.0}).std == 0.0);
}
