#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdlt/inference.hpp"
#include "sdlt/matrix.hpp"
#include "sdlt/model.hpp"

// Experiment orchestration: seeded synthetic replicates (sample -> fit ->
// debias -> test -> score), the real-data subsampling pipeline, theory-curve
// emission, and CSV/JSON reporting. Replicates are independent and
// deterministic given (config, base_seed): worker count never changes output.

namespace sdlt::harness {

enum class LambdaMode {
  calibrated_true_eps,  // kappa from the actual sparsity s0/p
  calibrated_eps_bar,   // kappa from the surrogate sparsity eps_bar(n/p)
  fixed,                // constant lambda, no calibration
};

enum class PrecisionMode {
  exact,      // invert the model covariance once, share across replicates
  estimated,  // threshold-estimate the covariance per replicate, then invert
  identity,   // no precision correction
};

struct ExperimentConfig {
  CovarianceModel cov;
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t s0 = 0;
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<double> alpha_levels{0.05};
  std::size_t replicates = 1;
  LambdaMode lambda_mode = LambdaMode::calibrated_eps_bar;
  double fixed_lambda = 0.0;  // used only when lambda_mode == fixed
  PrecisionMode precision_mode = PrecisionMode::identity;
  std::uint64_t base_seed = 0;
};

// Throws config_error when dimensions, levels, or mode parameters are out of
// domain (replicates >= 1, alpha levels in (0,1), positive sizes, ...).
void validate(const ExperimentConfig& config);

// key = value file, '#' comments, unknown keys rejected. Keys: p, n, s0, mu,
// sigma, cov (identity|circulant), band, off, alpha (comma-separated),
// replicates, lambda_mode (calibrated-true-eps|calibrated-eps-bar|fixed),
// lambda, precision (exact|estimated|identity), seed.
ExperimentConfig parse_config_file(const std::string& path);

struct AlphaResult {
  double alpha = 0.0;
  inference::ErrorSummary summary;
  // reference power: the analytic asymptote for the isotropic design, or the
  // realized per-replicate lower bound G(alpha, mu0 / tau) otherwise
  double theory = 0.0;
};

struct ReplicateRow {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;  // failure message; empty on success
  double lambda = 0.0;
  double tau = 0.0;
  double d = 0.0;
  double precision_ridge = 0.0;  // ridge added to invert an estimated covariance
  std::vector<AlphaResult> per_alpha;
};

struct AlphaAggregate {
  double alpha = 0.0;
  std::size_t successes = 0;  // replicates contributing to the means
  std::optional<double> type_I_mean;  // absent when no replicate had nulls
  std::optional<double> type_I_std;
  std::optional<double> power_mean;  // absent when no replicate had actives
  std::optional<double> power_std;
  double theory_mean = 0.0;
  std::optional<double> theory_std;  // absent when the reference is analytic
};

struct ExperimentReport {
  std::vector<ReplicateRow> rows;  // replicate order, failures included
  std::vector<AlphaAggregate> aggregates;
  std::size_t failed_count = 0;
  // scaling context echoed into reports
  double delta = 0.0;
  double epsilon = 0.0;  // s0/p
  double kappa = 0.0;    // 0 in fixed-lambda mode
  std::optional<double> mu0;
  // one realization kept for histogram export (first successful replicate)
  Vec sample_z;
  Vec sample_theta0;
};

ExperimentReport run_synthetic(const ExperimentConfig& config,
                               std::size_t workers = 1);

struct RealDataConfig {
  std::string data_path;
  std::size_t subsample_n = 84;
  double active_threshold = 0.04;
  std::vector<double> alpha_levels{0.05};
  std::size_t replicates = 20;
  std::uint64_t base_seed = 0;
  // fixed lambda instead of the calibrated one (full-sample oracle checks)
  std::optional<double> lambda_override;
};

// Cleaned design: leading non-predictive columns removed, missing cells
// imputed with column means, columns centered, dependent columns dropped by
// greedy pivoted orthogonalization, survivors scaled to l2 norm sqrt(n_tot).
struct RealDataSet {
  Matrix X;   // n_tot x p_kept
  Vec y;      // raw response (last column of the file)
  Vec theta0; // full-data least-squares coefficients
  std::vector<std::size_t> kept_columns;     // original attribute indices
  std::vector<std::size_t> dropped_columns;  // original attribute indices
  std::size_t imputed_cells = 0;
};

// Number of leading non-predictive columns in the expected file schema.
inline constexpr std::size_t kRealDataSkipColumns = 5;

RealDataSet load_realdata(const std::string& path);

// Subsample rows, run the test with an estimated covariance, score against
// the active set {|theta0_i| > active_threshold}.
ExperimentReport run_realdata(const RealDataConfig& config,
                              std::size_t workers = 1);

struct PowerCurve {
  bool tau_star_infinite = false;  // every row degenerates to (alpha, alpha)
  std::vector<std::pair<double, double>> rows;  // (alpha, power)
};

PowerCurve emit_power_curve(double epsilon, double delta, double mu0,
                            const std::vector<double>& alpha_grid);

// Fixed-width histogram of z-scores split by activity: bins of width 0.25
// covering [-6, 6], plus one underflow and one overflow row. Densities are
// normalized within each label group.
struct HistogramRow {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t active = 0;
  std::size_t inactive = 0;
  double active_density = 0.0;
  double inactive_density = 0.0;
};

std::vector<HistogramRow> zscore_histogram(const Vec& z, const Vec& theta0);

void write_power_curve_csv(const std::string& path, const PowerCurve& curve);
void write_histogram_csv(const std::string& path,
                         const std::vector<HistogramRow>& rows);

// Write report.csv, replicates.csv, zscores.csv, histogram.csv, config.json
// into out_dir (created if missing).
void write_outputs(const std::string& out_dir, const ExperimentConfig& config,
                   const ExperimentReport& report, std::size_t workers);
void write_outputs(const std::string& out_dir, const RealDataConfig& config,
                   const ExperimentReport& report, std::size_t workers);

}  // namespace sdlt::harness
