#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

// Scalar statistical functions shared across the testing and theory layers.

namespace sdlt::stats {

// standard normal density
double normal_pdf(double x);

// standard normal CDF via the complementary error function (absolute
// accuracy at the 1e-15 level)
double normal_cdf(double x);

// upper tail 1 - normal_cdf(x), evaluated without cancellation so the
// relative accuracy survives deep into the tail
double normal_sf(double x);

// inverse of normal_cdf on (0,1); |normal_cdf(normal_quantile(q)) - q| stays
// within 1e-12. Throws std::domain_error at or outside {0,1}.
double normal_quantile(double q);

// survival function of a chi-squared variable with k degrees of freedom:
// the regularized upper incomplete gamma Q(k/2, x/2)
double chi2_survival(int k, double x);

// regularized upper incomplete gamma Q(a, x), a > 0, x >= 0
double gamma_q(double a, double x);

// Kolmogorov-Smirnov distance between a sample and a reference CDF
template <typename Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sample[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(f - lo, hi - f));
  }
  return d;
}

// mean and sample standard deviation (n-1 denominator; std is 0 for n < 2)
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& v);

}  // namespace sdlt::stats
