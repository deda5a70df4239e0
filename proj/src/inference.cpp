#include "sdlt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "sdlt/errors.hpp"
#include "sdlt/csv.hpp"
#include "sdlt/stats.hpp"

namespace sdlt::inference {

namespace {

constexpr double kPValueFloor = 1e-300;

// two-sided p-value from a z-score; survival form avoids cancellation in the
// far tail, and values below the floor collapse to exactly 0
double two_sided_p(double z) {
  double p = 2.0 * stats::normal_sf(std::fabs(z));
  if (p < kPValueFloor) return 0.0;
  return std::min(p, 1.0);
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw invalid_parameter_error("significance level must lie in (0, 1)");
  }
}

TestReport report_from_z(Vec z, double alpha) {
  TestReport report;
  report.alpha = alpha;
  report.z_scores = std::move(z);
  const std::size_t p = report.z_scores.size();
  report.p_values.resize(p);
  report.decisions.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    report.p_values[i] = two_sided_p(report.z_scores[i]);
    report.decisions[i] = report.p_values[i] <= alpha ? 1 : 0;
  }
  return report;
}

}  // namespace

CovFreeParams covfree_defaults(const LassoFit& fit, Vec max_offdiag) {
  CovFreeParams params;
  params.s0_bound = std::max<std::size_t>(1, fit.support_size);
  params.phi0 = 1.0;
  params.t = 2.0;
  params.max_offdiag = std::move(max_offdiag);
  return params;
}

TestReport p_values(const DebiasedEstimate& est, const Vec& precision_diag,
                    double alpha) {
  require_alpha(alpha);
  if (!(est.tau > 0.0)) {
    throw invalid_parameter_error("noise scale of the estimate must be positive");
  }
  const std::size_t p = est.theta_u.size();
  if (precision_diag.size() != p) {
    throw invalid_parameter_error(
        "precision diagonal length does not match the estimate");
  }
  Vec z(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (!(precision_diag[i] > 0.0)) {
      throw invalid_precision_error("precision diagonal must be positive");
    }
    z[i] = est.theta_u[i] / (est.tau * std::sqrt(precision_diag[i]));
  }
  return report_from_z(std::move(z), alpha);
}

TestReport p_values(const DebiasedEstimate& est, double alpha) {
  return p_values(est, Vec(est.theta_u.size(), 1.0), alpha);
}

ErrorSummary evaluate(const TestReport& report, const Vec& theta0) {
  const std::size_t p = report.decisions.size();
  if (theta0.size() != p) {
    throw invalid_parameter_error(
        "ground-truth coefficient length does not match the report");
  }
  std::size_t active = 0, nulls = 0, active_hits = 0, null_hits = 0;
  for (std::size_t i = 0; i < p; ++i) {
    if (theta0[i] != 0.0) {
      ++active;
      active_hits += static_cast<std::size_t>(report.decisions[i]);
    } else {
      ++nulls;
      null_hits += static_cast<std::size_t>(report.decisions[i]);
    }
  }
  ErrorSummary out;
  out.active_count = active;
  out.null_count = nulls;
  if (nulls > 0) {
    out.type_I = static_cast<double>(null_hits) / static_cast<double>(nulls);
  }
  if (active > 0) {
    out.power = static_cast<double>(active_hits) / static_cast<double>(active);
  }
  return out;
}

TestReport covfree_test(const LassoFit& fit, const DebiasedEstimate& est,
                        const CovFreeParams& params, double alpha) {
  require_alpha(alpha);
  if (!(params.phi0 > 0.0)) {
    throw invalid_parameter_error("compatibility constant must be positive");
  }
  if (params.s0_bound < 1) {
    throw invalid_parameter_error("support-size bound must be at least 1");
  }
  if (!(est.tau > 0.0)) {
    throw invalid_parameter_error("noise scale of the estimate must be positive");
  }
  if (est.used_precision != PrecisionKind::identity) {
    throw invalid_parameter_error(
        "covariance-free test requires an estimate formed without precision "
        "correction");
  }
  const std::size_t p = est.theta_u.size();
  if (params.max_offdiag.size() != p) {
    throw invalid_parameter_error(
        "off-diagonal bound length does not match the estimate");
  }
  const double bias_scale = 4.0 * fit.lambda *
                            static_cast<double>(params.s0_bound) /
                            (est.tau * params.phi0 * params.phi0);
  Vec z(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (params.max_offdiag[i] < 0.0) {
      throw invalid_parameter_error("off-diagonal bounds must be nonnegative");
    }
    const double xi = est.theta_u[i] / est.tau;
    const double delta = bias_scale * params.max_offdiag[i];
    const double shrunk = std::max(std::fabs(xi) - delta, 0.0);
    z[i] = std::copysign(shrunk, xi);
  }
  return report_from_z(std::move(z), alpha);
}

double covfree_lambda(double sigma, double t, std::size_t p, std::size_t n) {
  if (!(sigma > 0.0) || !(t > 0.0) || p < 1 || n < 1) {
    throw invalid_parameter_error(
        "recommended lambda needs sigma > 0, t > 0, and positive dimensions");
  }
  const double top = t * t + 2.0 * std::log(static_cast<double>(p));
  return 4.0 * sigma * std::sqrt(top / static_cast<double>(n));
}

void write_test_report_csv(const std::string& path, const TestReport& report,
                           const Vec& theta0, const LassoFit& fit,
                           const DebiasedEstimate& est) {
  const std::size_t p = report.z_scores.size();
  if (theta0.size() != p || fit.theta_hat.size() != p ||
      est.theta_u.size() != p) {
    throw invalid_parameter_error("report export inputs disagree on length");
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    rows.push_back({std::to_string(i), csv::fmt(theta0[i]),
                    csv::fmt(fit.theta_hat[i]), csv::fmt(est.theta_u[i]),
                    csv::fmt(report.z_scores[i]), csv::fmt(report.p_values[i]),
                    std::to_string(report.decisions[i])});
  }
  csv::write_table(path,
                   {"index", "theta0", "theta_hat", "theta_u", "z", "p_value",
                    "decision"},
                   rows);
}

void write_zscore_csv(const std::string& path, const Vec& z_scores,
                      const Vec& theta0) {
  const std::size_t p = z_scores.size();
  if (theta0.size() != p) {
    throw invalid_parameter_error("z-score export inputs disagree on length");
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    rows.push_back({std::to_string(i), csv::fmt(z_scores[i]),
                    theta0[i] != 0.0 ? "active" : "inactive"});
  }
  csv::write_table(path, {"index", "z", "label"}, rows);
}

}  // namespace sdlt::inference
