#include "sdlt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "sdlt/covest.hpp"
#include "sdlt/csv.hpp"
#include "sdlt/debias.hpp"
#include "sdlt/errors.hpp"
#include "sdlt/kernels.hpp"
#include "sdlt/linalg.hpp"
#include "sdlt/rng.hpp"
#include "sdlt/solver.hpp"
#include "sdlt/theory.hpp"

namespace sdlt::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw config_error("value for '" + key + "' is not a number: " + value);
  }
  return x;
}

std::uint64_t parse_count(const std::string& value, const std::string& key) {
  const double x = parse_double(value, key);
  if (x < 0 || x != std::floor(x) || x > 1e18) {
    throw config_error("value for '" + key +
                       "' is not a nonnegative integer: " + value);
  }
  return static_cast<std::uint64_t>(x);
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, key));
  }
  if (out.empty()) {
    throw config_error("value for '" + key + "' lists no numbers");
  }
  return out;
}

// replicates.csv cells must not introduce extra separators
std::string sanitize_cell(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v.has_value() ? csv::fmt(*v) : std::string{};
}

// sample mean/std over the values selected from successful rows
struct Welford {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

Welford mean_std(const std::vector<double>& xs) {
  Welford w;
  w.count = xs.size();
  if (xs.empty()) return w;
  w.mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
  if (xs.size() < 2) return w;  // single observation: spread reported as 0
  double ss = 0.0;
  for (const double x : xs) ss += (x - w.mean) * (x - w.mean);
  w.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return w;
}

// Aggregates in replicate order; theory_varies controls whether the theory
// column gets a spread (per-replicate bound) or not (analytic constant).
std::vector<AlphaAggregate> aggregate_rows(const std::vector<ReplicateRow>& rows,
                                           const std::vector<double>& alphas,
                                           bool theory_varies) {
  std::vector<AlphaAggregate> out;
  out.reserve(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    AlphaAggregate agg;
    agg.alpha = alphas[a];
    std::vector<double> t1, pw, th;
    for (const ReplicateRow& row : rows) {
      if (row.failed) continue;
      ++agg.successes;
      const AlphaResult& res = row.per_alpha[a];
      if (res.summary.type_I.has_value()) t1.push_back(*res.summary.type_I);
      if (res.summary.power.has_value()) pw.push_back(*res.summary.power);
      th.push_back(res.theory);
    }
    if (!t1.empty()) {
      const Welford w = mean_std(t1);
      agg.type_I_mean = w.mean;
      agg.type_I_std = w.sd;
    }
    if (!pw.empty()) {
      const Welford w = mean_std(pw);
      agg.power_mean = w.mean;
      agg.power_std = w.sd;
    }
    if (!th.empty()) {
      const Welford w = mean_std(th);
      agg.theory_mean = w.mean;
      if (theory_varies) agg.theory_std = w.sd;
    }
    out.push_back(agg);
  }
  return out;
}

// Run fn(r) for r in [0, total) across the requested number of threads.
// Each index is claimed once; results land in caller-owned slots, so the
// schedule cannot affect the output.
template <typename Fn>
void parallel_for(std::size_t total, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, total));
  if (workers == 1) {
    for (std::size_t r = 0; r < total; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t r = next.fetch_add(1);
        if (r >= total) break;
        fn(r);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

// Shift floor of the realized power bound: the smallest standardized effect
// among active coordinates, min_i |theta0_i| / (tau * sqrt(diag_i)).
double min_active_shift(const Vec& theta0, const Vec& diag, double tau,
                        const std::vector<std::size_t>& active) {
  double u = kInf;
  for (const std::size_t i : active) {
    u = std::min(u, std::fabs(theta0[i]) / (tau * std::sqrt(diag[i])));
  }
  return std::isfinite(u) ? u : 0.0;
}

void collect_sample(ExperimentReport& report, std::vector<Vec>& zs,
                    std::vector<Vec>& t0s) {
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    if (!report.rows[r].failed) {
      report.sample_z = std::move(zs[r]);
      report.sample_theta0 = std::move(t0s[r]);
      return;
    }
  }
}

const char* lambda_mode_name(LambdaMode m) {
  switch (m) {
    case LambdaMode::calibrated_true_eps: return "calibrated-true-eps";
    case LambdaMode::calibrated_eps_bar: return "calibrated-eps-bar";
    case LambdaMode::fixed: return "fixed";
  }
  return "?";
}

const char* precision_mode_name(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::exact: return "exact";
    case PrecisionMode::estimated: return "estimated";
    case PrecisionMode::identity: return "identity";
  }
  return "?";
}

const char* cov_kind_name(CovarianceModel::Kind k) {
  switch (k) {
    case CovarianceModel::Kind::identity: return "identity";
    case CovarianceModel::Kind::circulant: return "circulant";
    case CovarianceModel::Kind::dense: return "dense";
  }
  return "?";
}

void write_report_csv(const std::string& path,
                      const std::vector<AlphaAggregate>& aggs,
                      std::size_t failed_count) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(aggs.size());
  for (const AlphaAggregate& a : aggs) {
    rows.push_back({csv::fmt(a.alpha), std::to_string(a.successes),
                    std::to_string(failed_count), fmt_opt(a.type_I_mean),
                    fmt_opt(a.type_I_std), fmt_opt(a.power_mean),
                    fmt_opt(a.power_std), csv::fmt(a.theory_mean),
                    fmt_opt(a.theory_std)});
  }
  csv::write_table(path,
                   {"alpha", "successes", "failures", "type_I_mean",
                    "type_I_std", "power_mean", "power_std", "theory_mean",
                    "theory_std"},
                   rows);
}

void write_replicates_csv(const std::string& path,
                          const std::vector<ReplicateRow>& reps) {
  std::vector<std::vector<std::string>> rows;
  for (const ReplicateRow& r : reps) {
    if (r.failed) {
      rows.push_back({std::to_string(r.index), std::to_string(r.seed), "1",
                      sanitize_cell(r.error), "", "", "", "", "", "", "", ""});
      continue;
    }
    for (const AlphaResult& res : r.per_alpha) {
      rows.push_back({std::to_string(r.index), std::to_string(r.seed), "0", "",
                      csv::fmt(r.lambda), csv::fmt(r.tau), csv::fmt(r.d),
                      csv::fmt(r.precision_ridge), csv::fmt(res.alpha),
                      fmt_opt(res.summary.type_I), fmt_opt(res.summary.power),
                      csv::fmt(res.theory)});
    }
  }
  csv::write_table(
      path,
      {"replicate", "seed", "failed", "error", "lambda", "tau", "d", "ridge",
       "alpha", "type_I", "power", "theory"},
      rows);
}

void write_common_outputs(const std::filesystem::path& dir,
                          const ExperimentReport& report) {
  write_report_csv((dir / "report.csv").string(), report.aggregates,
                   report.failed_count);
  write_replicates_csv((dir / "replicates.csv").string(), report.rows);
  if (!report.sample_z.empty()) {
    inference::write_zscore_csv((dir / "zscores.csv").string(),
                                report.sample_z, report.sample_theta0);
    write_histogram_csv(
        (dir / "histogram.csv").string(),
        zscore_histogram(report.sample_z, report.sample_theta0));
  } else {
    csv::write_table((dir / "zscores.csv").string(), {"index", "z", "label"},
                     {});
    csv::write_table((dir / "histogram.csv").string(),
                     {"lo", "hi", "active", "inactive", "active_density",
                      "inactive_density"},
                     {});
  }
}

nlohmann::json report_context_json(const ExperimentReport& report,
                                   std::size_t workers) {
  nlohmann::json j;
  j["delta"] = report.delta;
  j["epsilon"] = report.epsilon;
  j["kappa"] = report.kappa;
  if (report.mu0.has_value()) {
    j["mu0"] = *report.mu0;
  } else {
    j["mu0"] = nullptr;
  }
  j["failed_replicates"] = report.failed_count;
  j["workers"] = workers;
  j["kernel_backend"] = kernels::backend_name(kernels::active_backend());
  return j;
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (config.p < 2 || config.n < 2) {
    throw config_error("design needs p >= 2 and n >= 2");
  }
  if (config.s0 > config.p) {
    throw config_error("sparsity s0 cannot exceed p");
  }
  if (config.s0 > 0 && !(config.mu > 0.0)) {
    throw config_error("active coefficients need mu > 0 when s0 > 0");
  }
  if (!(config.sigma >= 0.0)) {
    throw config_error("noise level sigma must be nonnegative");
  }
  if (config.replicates < 1) {
    throw config_error("at least one replicate is required");
  }
  if (config.alpha_levels.empty()) {
    throw config_error("at least one significance level is required");
  }
  for (const double a : config.alpha_levels) {
    if (!(a > 0.0) || !(a < 1.0)) {
      throw config_error("significance levels must lie in (0, 1)");
    }
  }
  if (config.lambda_mode == LambdaMode::fixed && !(config.fixed_lambda > 0.0)) {
    throw config_error("fixed lambda mode needs lambda > 0");
  }
  if (config.lambda_mode == LambdaMode::calibrated_true_eps && config.s0 == 0) {
    throw config_error("true-sparsity calibration needs s0 >= 1");
  }
  if (config.cov.kind == CovarianceModel::Kind::circulant &&
      2 * config.cov.band >= config.p) {
    throw config_error("circulant band must satisfy 2*band < p");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::size_t band = 0;
  double off = 0.0;
  std::string cov_kind = "identity";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(lineno) +
                         " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw config_error("config line " + std::to_string(lineno) +
                         " has an empty key or value");
    }
    if (key == "p") {
      config.p = parse_count(value, key);
    } else if (key == "n") {
      config.n = parse_count(value, key);
    } else if (key == "s0") {
      config.s0 = parse_count(value, key);
    } else if (key == "mu") {
      config.mu = parse_double(value, key);
    } else if (key == "sigma") {
      config.sigma = parse_double(value, key);
    } else if (key == "cov") {
      cov_kind = value;
    } else if (key == "band") {
      band = parse_count(value, key);
    } else if (key == "off") {
      off = parse_double(value, key);
    } else if (key == "alpha") {
      config.alpha_levels = parse_double_list(value, key);
    } else if (key == "replicates") {
      config.replicates = parse_count(value, key);
    } else if (key == "lambda_mode") {
      if (value == "calibrated-true-eps") {
        config.lambda_mode = LambdaMode::calibrated_true_eps;
      } else if (value == "calibrated-eps-bar") {
        config.lambda_mode = LambdaMode::calibrated_eps_bar;
      } else if (value == "fixed") {
        config.lambda_mode = LambdaMode::fixed;
      } else {
        throw config_error("unknown lambda_mode: " + value);
      }
    } else if (key == "lambda") {
      config.fixed_lambda = parse_double(value, key);
    } else if (key == "precision") {
      if (value == "exact") {
        config.precision_mode = PrecisionMode::exact;
      } else if (value == "estimated") {
        config.precision_mode = PrecisionMode::estimated;
      } else if (value == "identity") {
        config.precision_mode = PrecisionMode::identity;
      } else {
        throw config_error("unknown precision mode: " + value);
      }
    } else if (key == "seed") {
      config.base_seed = parse_count(value, key);
    } else {
      throw config_error("unknown configuration key: " + key);
    }
  }
  if (cov_kind == "identity") {
    config.cov = CovarianceModel::identity();
  } else if (cov_kind == "circulant") {
    config.cov = CovarianceModel::circulant(band, off);
  } else {
    throw config_error("unknown covariance kind: " + cov_kind);
  }
  validate(config);
  return config;
}

ExperimentReport run_synthetic(const ExperimentConfig& config,
                               std::size_t workers) {
  validate(config);
  const std::size_t p = config.p, n = config.n, R = config.replicates;
  const double delta = static_cast<double>(n) / static_cast<double>(p);
  const double eps_true =
      static_cast<double>(config.s0) / static_cast<double>(p);

  ExperimentReport report;
  report.delta = delta;
  report.epsilon = eps_true;
  if (config.s0 > 0 && config.sigma > 0.0) {
    report.mu0 = config.mu * std::sqrt(static_cast<double>(n)) / config.sigma;
  }

  double kappa = 0.0;
  if (config.lambda_mode == LambdaMode::calibrated_true_eps) {
    kappa = theory::minimax_threshold_kappa(eps_true);
  } else if (config.lambda_mode == LambdaMode::calibrated_eps_bar) {
    kappa = theory::minimax_threshold_kappa(theory::eps_bar(delta));
  }
  report.kappa = kappa;

  const Design design = make_design(config.cov, p);
  const bool identity_design = design.is_identity;

  // analytic reference for the isotropic design: a single asymptotic value
  double u_star = 0.0;
  if (identity_design && report.mu0.has_value()) {
    const double ts = theory::tau_star(eps_true, delta);
    u_star = std::isinf(ts) ? 0.0 : *report.mu0 / ts;
  }

  // exact-precision machinery shared across replicates (read-only)
  Matrix exact_precision;
  Vec exact_diag;
  const bool use_exact =
      config.precision_mode == PrecisionMode::exact && !identity_design;
  if (use_exact) {
    Matrix chol = design.sigma;
    if (!linalg::cholesky_in_place(chol)) {
      throw invalid_covariance_error(
          "model covariance is not positive definite");
    }
    exact_precision = linalg::chol_inverse(chol);
    exact_diag.resize(p);
    for (std::size_t i = 0; i < p; ++i) exact_diag[i] = exact_precision(i, i);
  }

  const SignalSpec signal{p, config.s0, config.mu};
  report.rows.resize(R);
  std::vector<Vec> zs(R), t0s(R);

  parallel_for(R, workers, [&](std::size_t r) {
    ReplicateRow& row = report.rows[r];
    row.index = r;
    row.seed = config.base_seed + r;
    try {
      const Instance inst =
          sample_instance(design, signal, n, config.sigma, row.seed);

      LassoFit fit;
      if (config.lambda_mode == LambdaMode::fixed) {
        fit = fit_lasso(inst.X, inst.y, config.fixed_lambda);
      } else {
        fit = calibrate_lambda(inst.X, inst.y, kappa).fit;
      }

      const Matrix* precision = nullptr;
      Vec diag(p, 1.0);
      covest::PrecisionEstimate estimated;
      if (use_exact) {
        precision = &exact_precision;
        diag = exact_diag;
      } else if (config.precision_mode == PrecisionMode::estimated) {
        const covest::CovEstimate cov = covest::estimate_covariance(inst.X);
        estimated = covest::invert_covariance(cov.sigma_hat);
        precision = &estimated.precision;
        row.precision_ridge = estimated.ridge;
        for (std::size_t i = 0; i < p; ++i) {
          diag[i] = estimated.precision(i, i);
        }
      }

      const DebiasedEstimate est = debias(fit, inst.X, inst.y, precision);
      row.lambda = fit.lambda;
      row.tau = est.tau;
      row.d = est.d;

      for (const double alpha : config.alpha_levels) {
        AlphaResult res;
        res.alpha = alpha;
        const inference::TestReport test =
            inference::p_values(est, diag, alpha);
        res.summary = inference::evaluate(test, inst.theta0);
        if (identity_design) {
          res.theory = theory::G(alpha, u_star);
        } else {
          res.theory = theory::G(
              alpha, min_active_shift(inst.theta0, diag, est.tau,
                                      inst.support));
        }
        row.per_alpha.push_back(res);
        if (alpha == config.alpha_levels.front()) {
          zs[r] = test.z_scores;
          t0s[r] = inst.theta0;
        }
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.per_alpha.clear();
    }
  });

  for (const ReplicateRow& row : report.rows) {
    if (row.failed) ++report.failed_count;
  }
  collect_sample(report, zs, t0s);
  report.aggregates =
      aggregate_rows(report.rows, config.alpha_levels, !identity_design);
  return report;
}

RealDataSet load_realdata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open data file: " + path);

  std::vector<std::vector<std::string>> raw;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(trim(cell));
    raw.push_back(std::move(fields));
  }
  if (raw.empty()) throw config_error("data file has no rows: " + path);
  const std::size_t ncols = raw.front().size();
  for (const auto& row : raw) {
    if (row.size() != ncols) {
      throw config_error("data file rows have inconsistent column counts");
    }
  }
  if (ncols < kRealDataSkipColumns + 2) {
    throw config_error(
        "data file needs at least one predictor and a response after the "
        "leading non-predictive columns");
  }

  const std::size_t n_tot = raw.size();
  const std::size_t p_raw = ncols - kRealDataSkipColumns - 1;
  constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  RealDataSet ds;
  Matrix cols(n_tot, p_raw);
  ds.y.resize(n_tot);
  auto parse_cell = [&](const std::string& cell) -> double {
    if (cell == "?") return kMissing;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') {
      throw config_error("non-numeric data cell: " + cell);
    }
    return v;
  };
  for (std::size_t i = 0; i < n_tot; ++i) {
    for (std::size_t j = 0; j < p_raw; ++j) {
      cols(i, j) = parse_cell(raw[i][kRealDataSkipColumns + j]);
    }
    ds.y[i] = parse_cell(raw[i][ncols - 1]);
  }

  // impute missing cells with the column mean of the observed ones
  auto impute = [&](double* data, std::size_t len) {
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < len; ++i) {
      if (!std::isnan(data[i])) {
        sum += data[i];
        ++seen;
      }
    }
    const double mean = seen > 0 ? sum / static_cast<double>(seen) : 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (std::isnan(data[i])) {
        data[i] = mean;
        ++ds.imputed_cells;
      }
    }
  };
  for (std::size_t j = 0; j < p_raw; ++j) impute(cols.col(j), n_tot);
  impute(ds.y.data(), n_tot);

  // center the predictors; dependence is judged on the centered columns so
  // the final normalized design is guaranteed full rank
  for (std::size_t j = 0; j < p_raw; ++j) {
    double* c = cols.col(j);
    const double mean =
        kernels::sum(c, n_tot) / static_cast<double>(n_tot);
    for (std::size_t i = 0; i < n_tot; ++i) c[i] -= mean;
  }

  // greedy pivoted orthogonalization: repeatedly absorb the column with the
  // largest remaining relative residual; columns whose residual collapses
  // are linearly dependent on the chosen ones and get dropped
  Matrix work = cols;
  Vec orig2(p_raw), resid2(p_raw);
  for (std::size_t j = 0; j < p_raw; ++j) {
    orig2[j] = kernels::dot(work.col(j), work.col(j), n_tot);
    resid2[j] = orig2[j];
  }
  constexpr double kRankTol = 1e-16;  // squared relative residual cutoff
  std::vector<bool> chosen(p_raw, false);
  std::vector<std::size_t> pivots;
  for (std::size_t step = 0; step < p_raw; ++step) {
    std::size_t best = p_raw;
    double best_score = kRankTol;
    for (std::size_t j = 0; j < p_raw; ++j) {
      if (chosen[j] || orig2[j] <= 0.0) continue;
      const double score = resid2[j] / orig2[j];
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best == p_raw) break;  // all remaining columns are dependent
    chosen[best] = true;
    pivots.push_back(best);
    double* q = work.col(best);
    const double qnorm = std::sqrt(kernels::dot(q, q, n_tot));
    kernels::scal(1.0 / qnorm, q, n_tot);
    for (std::size_t j = 0; j < p_raw; ++j) {
      if (chosen[j] || orig2[j] <= 0.0) continue;
      const double coef = kernels::dot(q, work.col(j), n_tot);
      kernels::axpy(-coef, q, work.col(j), n_tot);
      resid2[j] = kernels::dot(work.col(j), work.col(j), n_tot);
    }
  }
  if (pivots.empty()) {
    throw config_error("no independent predictor columns found in the data");
  }
  std::sort(pivots.begin(), pivots.end());
  for (std::size_t j = 0; j < p_raw; ++j) {
    if (!chosen[j]) ds.dropped_columns.push_back(j);
  }
  ds.kept_columns = pivots;

  // assemble the kept centered columns, scaled to l2 norm sqrt(n_tot)
  const std::size_t p = pivots.size();
  ds.X = Matrix(n_tot, p);
  const double target = std::sqrt(static_cast<double>(n_tot));
  for (std::size_t k = 0; k < p; ++k) {
    const double* src = cols.col(pivots[k]);
    double* dst = ds.X.col(k);
    const double norm = std::sqrt(kernels::dot(src, src, n_tot));
    for (std::size_t i = 0; i < n_tot; ++i) {
      dst[i] = src[i] * (target / norm);
    }
  }

  try {
    ds.theta0 = linalg::least_squares(ds.X, ds.y);
  } catch (const linalg_error& e) {
    throw config_error(std::string("predictors remain dependent after "
                                   "column drops: ") +
                       e.what());
  }
  return ds;
}

ExperimentReport run_realdata(const RealDataConfig& config,
                              std::size_t workers) {
  if (config.replicates < 1) {
    throw config_error("at least one replicate is required");
  }
  if (config.alpha_levels.empty()) {
    throw config_error("at least one significance level is required");
  }
  for (const double a : config.alpha_levels) {
    if (!(a > 0.0) || !(a < 1.0)) {
      throw config_error("significance levels must lie in (0, 1)");
    }
  }
  if (config.lambda_override.has_value() && !(*config.lambda_override >= 0.0)) {
    throw config_error("lambda override must be nonnegative");
  }

  const RealDataSet ds = load_realdata(config.data_path);
  const std::size_t n_tot = ds.X.rows;
  const std::size_t p = ds.X.cols;
  const std::size_t n = config.subsample_n;
  if (n < 2 || n > n_tot) {
    throw config_error("subsample size must lie in [2, rows of the data]");
  }

  // ground truth for scoring: full-data coefficients above the threshold
  Vec truth(p, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < p; ++i) {
    if (std::fabs(ds.theta0[i]) > config.active_threshold) {
      truth[i] = ds.theta0[i];
      active.push_back(i);
    }
  }

  ExperimentReport report;
  const double delta = static_cast<double>(n) / static_cast<double>(p);
  report.delta = delta;
  report.epsilon =
      static_cast<double>(active.size()) / static_cast<double>(p);
  double kappa = 0.0;
  if (!config.lambda_override.has_value()) {
    kappa = theory::minimax_threshold_kappa(theory::eps_bar(delta));
  }
  report.kappa = kappa;

  const std::size_t R = config.replicates;
  report.rows.resize(R);
  std::vector<Vec> zs(R), t0s(R);

  parallel_for(R, workers, [&](std::size_t r) {
    ReplicateRow& row = report.rows[r];
    row.index = r;
    row.seed = config.base_seed + r;
    try {
      // subsample rows without replacement: partial Fisher-Yates over the
      // row indices, driven by the replicate's own generator
      std::vector<std::size_t> idx(n_tot);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      Rng gen(row.seed);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(
                    gen.below(static_cast<std::uint64_t>(n_tot - i)));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(n);
      std::sort(idx.begin(), idx.end());

      Matrix Xs(n, p);
      Vec ys(n);
      for (std::size_t k = 0; k < n; ++k) {
        ys[k] = ds.y[idx[k]];
        for (std::size_t j = 0; j < p; ++j) Xs(k, j) = ds.X(idx[k], j);
      }

      LassoFit fit;
      if (config.lambda_override.has_value()) {
        fit = fit_lasso(Xs, ys, *config.lambda_override);
      } else {
        fit = calibrate_lambda(Xs, ys, kappa).fit;
      }

      const covest::CovEstimate cov = covest::estimate_covariance(Xs);
      const covest::PrecisionEstimate prec =
          covest::invert_covariance(cov.sigma_hat);
      row.precision_ridge = prec.ridge;
      Vec diag(p);
      for (std::size_t i = 0; i < p; ++i) diag[i] = prec.precision(i, i);

      const DebiasedEstimate est = debias(fit, Xs, ys, &prec.precision);
      row.lambda = fit.lambda;
      row.tau = est.tau;
      row.d = est.d;

      for (const double alpha : config.alpha_levels) {
        AlphaResult res;
        res.alpha = alpha;
        const inference::TestReport test =
            inference::p_values(est, diag, alpha);
        res.summary = inference::evaluate(test, truth);
        res.theory =
            theory::G(alpha, min_active_shift(truth, diag, est.tau, active));
        row.per_alpha.push_back(res);
        if (alpha == config.alpha_levels.front()) {
          zs[r] = test.z_scores;
          t0s[r] = truth;
        }
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.per_alpha.clear();
    }
  });

  for (const ReplicateRow& row : report.rows) {
    if (row.failed) ++report.failed_count;
  }
  collect_sample(report, zs, t0s);
  report.aggregates =
      aggregate_rows(report.rows, config.alpha_levels, /*theory_varies=*/true);
  return report;
}

PowerCurve emit_power_curve(double epsilon, double delta, double mu0,
                            const std::vector<double>& alpha_grid) {
  if (!(mu0 >= 0.0)) {
    throw invalid_parameter_error("mu0 must be nonnegative");
  }
  PowerCurve curve;
  const double ts = theory::tau_star(epsilon, delta);
  curve.tau_star_infinite = std::isinf(ts);
  const double u = curve.tau_star_infinite ? 0.0 : mu0 / ts;
  curve.rows.reserve(alpha_grid.size());
  for (const double alpha : alpha_grid) {
    curve.rows.emplace_back(alpha, theory::G(alpha, u));
  }
  return curve;
}

std::vector<HistogramRow> zscore_histogram(const Vec& z, const Vec& theta0) {
  if (z.size() != theta0.size()) {
    throw invalid_parameter_error(
        "histogram inputs disagree on length");
  }
  constexpr double kLo = -6.0, kHi = 6.0, kWidth = 0.25;
  constexpr std::size_t kBins = 48;
  std::vector<HistogramRow> rows(kBins + 2);
  rows.front().lo = -kInf;
  rows.front().hi = kLo;
  rows.back().lo = kHi;
  rows.back().hi = kInf;
  for (std::size_t b = 0; b < kBins; ++b) {
    rows[b + 1].lo = kLo + kWidth * static_cast<double>(b);
    rows[b + 1].hi = rows[b + 1].lo + kWidth;
  }
  std::size_t total_active = 0, total_inactive = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::size_t slot;
    if (z[i] < kLo) {
      slot = 0;
    } else if (z[i] >= kHi) {
      slot = kBins + 1;
    } else {
      slot = 1 + static_cast<std::size_t>((z[i] - kLo) / kWidth);
      slot = std::min(slot, kBins);  // guard the hi edge against rounding
    }
    if (theta0[i] != 0.0) {
      ++rows[slot].active;
      ++total_active;
    } else {
      ++rows[slot].inactive;
      ++total_inactive;
    }
  }
  for (std::size_t b = 1; b <= kBins; ++b) {
    if (total_active > 0) {
      rows[b].active_density = static_cast<double>(rows[b].active) /
                               (static_cast<double>(total_active) * kWidth);
    }
    if (total_inactive > 0) {
      rows[b].inactive_density =
          static_cast<double>(rows[b].inactive) /
          (static_cast<double>(total_inactive) * kWidth);
    }
  }
  return rows;
}

void write_power_curve_csv(const std::string& path, const PowerCurve& curve) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(curve.rows.size());
  for (const auto& [alpha, power] : curve.rows) {
    rows.push_back({csv::fmt(alpha), csv::fmt(power),
                    curve.tau_star_infinite ? "1" : "0"});
  }
  csv::write_table(path, {"alpha", "power", "tau_star_infinite"}, rows);
}

void write_histogram_csv(const std::string& path,
                         const std::vector<HistogramRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const HistogramRow& r : rows) {
    out.push_back({csv::fmt(r.lo), csv::fmt(r.hi), std::to_string(r.active),
                   std::to_string(r.inactive), csv::fmt(r.active_density),
                   csv::fmt(r.inactive_density)});
  }
  csv::write_table(
      path,
      {"lo", "hi", "active", "inactive", "active_density", "inactive_density"},
      out);
}

void write_outputs(const std::string& out_dir, const ExperimentConfig& config,
                   const ExperimentReport& report, std::size_t workers) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_common_outputs(dir, report);

  nlohmann::json j = report_context_json(report, workers);
  j["mode"] = "synthetic";
  j["cov"] = cov_kind_name(config.cov.kind);
  if (config.cov.kind == CovarianceModel::Kind::circulant) {
    j["band"] = config.cov.band;
    j["off"] = config.cov.off;
  }
  j["p"] = config.p;
  j["n"] = config.n;
  j["s0"] = config.s0;
  j["mu"] = config.mu;
  j["sigma"] = config.sigma;
  j["alpha_levels"] = config.alpha_levels;
  j["replicates"] = config.replicates;
  j["lambda_mode"] = lambda_mode_name(config.lambda_mode);
  if (config.lambda_mode == LambdaMode::fixed) {
    j["lambda"] = config.fixed_lambda;
  }
  j["precision_mode"] = precision_mode_name(config.precision_mode);
  j["seed"] = config.base_seed;
  std::ofstream out(dir / "config.json");
  out << j.dump(2) << "\n";
}

void write_outputs(const std::string& out_dir, const RealDataConfig& config,
                   const ExperimentReport& report, std::size_t workers) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_common_outputs(dir, report);

  nlohmann::json j = report_context_json(report, workers);
  j["mode"] = "realdata";
  j["data_path"] = config.data_path;
  j["subsample_n"] = config.subsample_n;
  j["active_threshold"] = config.active_threshold;
  j["alpha_levels"] = config.alpha_levels;
  j["replicates"] = config.replicates;
  j["seed"] = config.base_seed;
  if (config.lambda_override.has_value()) {
    j["lambda_override"] = *config.lambda_override;
  } else {
    j["lambda_override"] = nullptr;
  }
  std::ofstream out(dir / "config.json");
  out << j.dump(2) << "\n";
}

}  // namespace sdlt::harness
