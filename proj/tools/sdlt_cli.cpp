// Command-line front end: synthetic experiments, asymptotic theory curves,
// finite-sample power bounds, covariance estimation, and the tabular-data
// pipeline. Exit codes: 0 success, 1 configuration error, 2 numerical
// failure.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdlt/covest.hpp"
#include "sdlt/csv.hpp"
#include "sdlt/errors.hpp"
#include "sdlt/harness.hpp"
#include "sdlt/model.hpp"
#include "sdlt/theory.hpp"

namespace {

using namespace sdlt;

void print_aggregates(const harness::ExperimentReport& report) {
  std::printf("delta = %.6f\n", report.delta);
  std::printf("epsilon = %.6f\n", report.epsilon);
  if (report.kappa > 0.0) std::printf("kappa = %.6f\n", report.kappa);
  if (report.mu0) std::printf("mu0 = %.6f\n", *report.mu0);
  std::printf("failed replicates = %zu\n", report.failed_count);
  std::printf("%-8s %-20s %-20s %s\n", "alpha", "type_I (sd)", "power (sd)",
              "theory (sd)");
  for (const harness::AlphaAggregate& a : report.aggregates) {
    std::string t1 = "-", pw = "-", th;
    char buf[64];
    if (a.type_I_mean) {
      std::snprintf(buf, sizeof buf, "%.5f (%.5f)", *a.type_I_mean,
                    a.type_I_std.value_or(0.0));
      t1 = buf;
    }
    if (a.power_mean) {
      std::snprintf(buf, sizeof buf, "%.5f (%.5f)", *a.power_mean,
                    a.power_std.value_or(0.0));
      pw = buf;
    }
    if (a.theory_std) {
      std::snprintf(buf, sizeof buf, "%.5f (%.5f)", a.theory_mean,
                    *a.theory_std);
    } else {
      std::snprintf(buf, sizeof buf, "%.5f", a.theory_mean);
    }
    th = buf;
    std::printf("%-8.3f %-20s %-20s %s\n", a.alpha, t1.c_str(), pw.c_str(),
                th.c_str());
  }
  for (const harness::ReplicateRow& row : report.rows) {
    if (row.failed) {
      std::fprintf(stderr, "replicate %zu failed: %s\n", row.index,
                   row.error.c_str());
    }
  }
}

struct SimulateArgs {
  std::string config_path;
  harness::ExperimentConfig config;
  std::string cov_kind = "identity";
  std::size_t band = 0;
  double off = 0.0;
  std::string lambda_mode = "calibrated-eps-bar";
  std::string precision = "identity";
  std::string out_dir;
  std::size_t workers = 1;
};

int run_simulate(const CLI::App& cmd, SimulateArgs& args) {
  harness::ExperimentConfig config;
  if (!args.config_path.empty()) {
    config = harness::parse_config_file(args.config_path);
  }
  // explicitly passed flags override the file (or fill in the defaults)
  auto passed = [&](const std::string& flag) {
    return cmd.count(flag) > 0;
  };
  if (passed("--p")) config.p = args.config.p;
  if (passed("--n")) config.n = args.config.n;
  if (passed("--s0")) config.s0 = args.config.s0;
  if (passed("--mu")) config.mu = args.config.mu;
  if (passed("--sigma")) config.sigma = args.config.sigma;
  if (passed("--alpha")) config.alpha_levels = args.config.alpha_levels;
  if (passed("--replicates")) config.replicates = args.config.replicates;
  if (passed("--seed")) config.base_seed = args.config.base_seed;
  if (passed("--lambda")) config.fixed_lambda = args.config.fixed_lambda;
  if (passed("--cov") || passed("--band") || passed("--off")) {
    if (args.cov_kind == "identity") {
      config.cov = CovarianceModel::identity();
    } else if (args.cov_kind == "circulant") {
      config.cov = CovarianceModel::circulant(args.band, args.off);
    } else {
      throw config_error("unknown covariance kind: " + args.cov_kind);
    }
  }
  if (passed("--lambda-mode")) {
    if (args.lambda_mode == "calibrated-true-eps") {
      config.lambda_mode = harness::LambdaMode::calibrated_true_eps;
    } else if (args.lambda_mode == "calibrated-eps-bar") {
      config.lambda_mode = harness::LambdaMode::calibrated_eps_bar;
    } else if (args.lambda_mode == "fixed") {
      config.lambda_mode = harness::LambdaMode::fixed;
    } else {
      throw config_error("unknown lambda mode: " + args.lambda_mode);
    }
  }
  if (passed("--precision")) {
    if (args.precision == "exact") {
      config.precision_mode = harness::PrecisionMode::exact;
    } else if (args.precision == "estimated") {
      config.precision_mode = harness::PrecisionMode::estimated;
    } else if (args.precision == "identity") {
      config.precision_mode = harness::PrecisionMode::identity;
    } else {
      throw config_error("unknown precision mode: " + args.precision);
    }
  }
  harness::validate(config);

  const harness::ExperimentReport report =
      harness::run_synthetic(config, args.workers);
  print_aggregates(report);
  if (!args.out_dir.empty()) {
    harness::write_outputs(args.out_dir, config, report, args.workers);
    std::printf("outputs written to %s\n", args.out_dir.c_str());
  }
  return report.failed_count == report.rows.size() ? 2 : 0;
}

struct TheoryArgs {
  double epsilon = 0.0;
  double delta = 0.0;
  double mu0 = 0.0;
  std::vector<double> levels;
  std::string out_dir;
};

int run_theory(TheoryArgs& args) {
  const theory::TheoryPoint pt = theory::theory_point(args.epsilon, args.delta);
  std::printf("epsilon = %.6f\n", pt.epsilon);
  std::printf("delta = %.6f\n", pt.delta);
  std::printf("xi_star = %.6f\n", pt.xi_star);
  std::printf("M = %.6f\n", pt.M);
  if (pt.tau_finite) {
    std::printf("tau_star = %.6f\n", pt.tau_star);
  } else {
    std::printf("tau_star = inf\n");
  }

  std::vector<double> grid = args.levels;
  if (grid.empty()) {
    for (int i = 1; i <= 99; ++i) grid.push_back(0.01 * i);
  }
  const harness::PowerCurve curve =
      harness::emit_power_curve(args.epsilon, args.delta, args.mu0, grid);
  if (!args.levels.empty()) {
    for (const auto& [alpha, power] : curve.rows) {
      std::printf("power(alpha=%.4f) = %.6f\n", alpha, power);
    }
  }
  if (curve.tau_star_infinite) {
    std::printf("note: the noise inflation diverges here; the curve "
                "degenerates to power = alpha\n");
  }
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::string path = args.out_dir + "/power_curve.csv";
    harness::write_power_curve_csv(path, curve);
    std::printf("curve written to %s\n", path.c_str());
  }
  return 0;
}

struct BoundArgs {
  std::string kind;
  double alpha = 0.05;
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t n = 0;
  std::size_t s0 = 0;
  std::optional<double> xi;
  std::optional<double> ell;
  // design description for the covariance-aware bound
  std::size_t p = 0;
  std::string cov_kind = "identity";
  std::size_t band = 0;
  double off = 0.0;
  std::size_t index = 0;
  // design file + support for the oracle power
  std::string design_path;
  std::vector<std::size_t> support;
};

int run_bound(BoundArgs& args) {
  if (args.kind == "standard") {
    if (args.xi) {
      const double b = theory::standard_design_bound(
          args.alpha, args.mu, args.sigma, args.n, args.s0, *args.xi);
      std::printf("standard-design power bound (xi=%.4f) = %.6f\n", *args.xi,
                  b);
    } else {
      const double b = theory::standard_design_bound_min(
          args.alpha, args.mu, args.sigma, args.n, args.s0);
      std::printf("standard-design power bound (grid minimum) = %.6f\n", b);
    }
    return 0;
  }
  if (args.kind == "minimax") {
    if (args.p < 2) throw config_error("the minimax bound needs --p >= 2");
    CovarianceModel cov = CovarianceModel::identity();
    if (args.cov_kind == "circulant") {
      cov = CovarianceModel::circulant(args.band, args.off);
    } else if (args.cov_kind != "identity") {
      throw config_error("unknown covariance kind: " + args.cov_kind);
    }
    Design design = make_design(cov, args.p);
    Matrix sigma = design.sigma;
    if (design.is_identity) {
      sigma = Matrix(args.p, args.p);
      for (std::size_t i = 0; i < args.p; ++i) sigma(i, i) = 1.0;
    }
    if (args.index >= args.p) {
      throw config_error("--index must address a coordinate of the design");
    }
    // condition on the lowest-index coordinates other than the tested one
    std::vector<std::size_t> S;
    for (std::size_t j = 0; j < args.p && S.size() + 1 < args.s0; ++j) {
      if (j != args.index) S.push_back(j);
    }
    if (args.ell) {
      const double b = theory::minimax_upper_bound(
          args.alpha, args.mu, args.sigma, sigma, args.index, S, args.s0,
          args.n, *args.ell);
      std::printf("minimax power bound (ell=%.4f) = %.6f\n", *args.ell, b);
    } else {
      const double b = theory::minimax_upper_bound_min(
          args.alpha, args.mu, args.sigma, sigma, args.index, S, args.s0,
          args.n);
      std::printf("minimax power bound (grid minimum) = %.6f\n", b);
    }
    return 0;
  }
  if (args.kind == "oracle") {
    if (args.design_path.empty()) {
      throw config_error("the oracle power needs --design CSV");
    }
    const Matrix X = csv::read_matrix(args.design_path);
    if (args.index >= X.cols) {
      throw config_error("--index must address a column of the design");
    }
    const double b = theory::oracle_power(X, args.index, args.support, args.mu,
                                          args.sigma, args.alpha);
    std::printf("oracle z-test power = %.6f\n", b);
    return 0;
  }
  throw config_error("unknown bound kind: " + args.kind +
                     " (expected standard, minimax, or oracle)");
}

struct CovestArgs {
  std::string design_path;
  std::size_t p = 0;
  std::size_t n = 0;
  std::string cov_kind = "identity";
  std::size_t band = 0;
  double off = 0.0;
  std::uint64_t seed = 0;
  bool invert = false;
  std::string out_dir;
};

int run_covest(CovestArgs& args) {
  Matrix X;
  if (!args.design_path.empty()) {
    X = csv::read_matrix(args.design_path);
  } else {
    if (args.p < 2 || args.n < 2) {
      throw config_error("sampling a design needs --p >= 2 and --n >= 2");
    }
    CovarianceModel cov = CovarianceModel::identity();
    if (args.cov_kind == "circulant") {
      cov = CovarianceModel::circulant(args.band, args.off);
    } else if (args.cov_kind != "identity") {
      throw config_error("unknown covariance kind: " + args.cov_kind);
    }
    const Design design = make_design(cov, args.p);
    const SignalSpec null_signal{args.p, 0, 0.0};
    X = sample_instance(design, null_signal, args.n, 1.0, args.seed).X;
  }

  const covest::CovEstimate est = covest::estimate_covariance(X);
  std::printf("rows = %zu\n", X.rows);
  std::printf("cols = %zu\n", X.cols);
  std::printf("sigma1 = %.6f\n", est.sigma1);
  std::printf("sigma2 = %.6f\n", est.sigma2);
  std::printf("kept_fraction = %.6f\n", est.kept_fraction);

  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    csv::write_matrix(args.out_dir + "/sigma_hat.csv", est.sigma_hat);
  }
  if (args.invert) {
    const covest::PrecisionEstimate prec =
        covest::invert_covariance(est.sigma_hat);
    std::printf("ridge = %.3e\n", prec.ridge);
    if (!args.out_dir.empty()) {
      csv::write_matrix(args.out_dir + "/precision.csv", prec.precision);
    }
  }
  if (!args.out_dir.empty()) {
    std::printf("outputs written to %s\n", args.out_dir.c_str());
  }
  return 0;
}

struct RealdataArgs {
  harness::RealDataConfig config;
  std::optional<double> lambda_override;
  std::string out_dir;
  std::size_t workers = 1;
};

int run_realdata_cmd(RealdataArgs& args) {
  args.config.lambda_override = args.lambda_override;
  const harness::ExperimentReport report =
      harness::run_realdata(args.config, args.workers);
  print_aggregates(report);
  if (!args.out_dir.empty()) {
    harness::write_outputs(args.out_dir, args.config, report, args.workers);
    std::printf("outputs written to %s\n", args.out_dir.c_str());
  }
  return report.failed_count == report.rows.size() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Debiased-sparse-regression testing toolkit: simulation harness, "
      "asymptotic theory, power bounds, covariance estimation, and a "
      "tabular-data pipeline."};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "run a synthetic experiment and report size/power");
  sim_cmd->add_option("--config", sim.config_path,
                      "key=value configuration file");
  sim_cmd->add_option("--p", sim.config.p, "number of coefficients");
  sim_cmd->add_option("--n", sim.config.n, "number of observations");
  sim_cmd->add_option("--s0", sim.config.s0, "number of active coefficients");
  sim_cmd->add_option("--mu", sim.config.mu, "active coefficient magnitude");
  sim_cmd->add_option("--sigma", sim.config.sigma, "noise standard deviation");
  sim_cmd->add_option("--cov", sim.cov_kind,
                      "design covariance: identity or circulant");
  sim_cmd->add_option("--band", sim.band, "circulant band width");
  sim_cmd->add_option("--off", sim.off, "circulant off-diagonal value");
  sim_cmd->add_option("--alpha", sim.config.alpha_levels,
                      "significance levels");
  sim_cmd->add_option("--replicates", sim.config.replicates,
                      "number of replicates");
  sim_cmd->add_option("--lambda-mode", sim.lambda_mode,
                      "calibrated-eps-bar, calibrated-true-eps, or fixed");
  sim_cmd->add_option("--lambda", sim.config.fixed_lambda,
                      "regularization for fixed mode");
  sim_cmd->add_option("--precision", sim.precision,
                      "precision matrix source: identity, exact, estimated");
  sim_cmd->add_option("--seed", sim.config.base_seed, "base seed");
  sim_cmd->add_option("--workers", sim.workers, "parallel replicate workers");
  sim_cmd->add_option("--out", sim.out_dir, "output directory");

  TheoryArgs th;
  CLI::App* th_cmd = app.add_subcommand(
      "theory", "asymptotic noise inflation and the power curve");
  th_cmd->add_option("--epsilon", th.epsilon, "sparsity fraction")->required();
  th_cmd->add_option("--delta", th.delta, "undersampling ratio n/p")
      ->required();
  th_cmd->add_option("--mu0", th.mu0, "standardized effect size")->required();
  th_cmd->add_option("--levels", th.levels,
                     "significance levels for the curve (default dense grid)");
  th_cmd->add_option("--out", th.out_dir, "output directory");

  BoundArgs bd;
  CLI::App* bd_cmd =
      app.add_subcommand("bound", "finite-sample power bound evaluations");
  bd_cmd->add_option("--kind", bd.kind, "standard, minimax, or oracle")
      ->required();
  bd_cmd->add_option("--alpha", bd.alpha, "significance level");
  bd_cmd->add_option("--mu", bd.mu, "coefficient magnitude");
  bd_cmd->add_option("--sigma", bd.sigma, "noise standard deviation");
  bd_cmd->add_option("--n", bd.n, "number of observations");
  bd_cmd->add_option("--s0", bd.s0, "number of active coefficients");
  bd_cmd->add_option("--xi", bd.xi, "deviation parameter (standard kind)");
  bd_cmd->add_option("--ell", bd.ell, "conditioning offset (minimax kind)");
  bd_cmd->add_option("--p", bd.p, "design dimension (minimax kind)");
  bd_cmd->add_option("--cov", bd.cov_kind, "identity or circulant");
  bd_cmd->add_option("--band", bd.band, "circulant band width");
  bd_cmd->add_option("--off", bd.off, "circulant off-diagonal value");
  bd_cmd->add_option("--index", bd.index, "tested coordinate");
  bd_cmd->add_option("--design", bd.design_path,
                     "header-free CSV design matrix (oracle kind)");
  bd_cmd->add_option("--support", bd.support,
                     "conditioned support indices (oracle kind)");

  CovestArgs cv;
  CLI::App* cv_cmd = app.add_subcommand(
      "covest", "threshold an empirical covariance and report its spread");
  cv_cmd->add_option("--design", cv.design_path,
                     "header-free CSV design matrix");
  cv_cmd->add_option("--p", cv.p, "sampled design dimension");
  cv_cmd->add_option("--n", cv.n, "sampled design rows");
  cv_cmd->add_option("--cov", cv.cov_kind, "identity or circulant");
  cv_cmd->add_option("--band", cv.band, "circulant band width");
  cv_cmd->add_option("--off", cv.off, "circulant off-diagonal value");
  cv_cmd->add_option("--seed", cv.seed, "sampling seed");
  cv_cmd->add_flag("--invert", cv.invert,
                   "also invert the estimate (with ridge repair)");
  cv_cmd->add_option("--out", cv.out_dir, "output directory");

  RealdataArgs rd;
  CLI::App* rd_cmd = app.add_subcommand(
      "realdata", "subsampled coefficient testing on a CSV dataset");
  rd_cmd->add_option("--data", rd.config.data_path, "input CSV file")
      ->required();
  rd_cmd->add_option("--subsample", rd.config.subsample_n,
                     "rows per subsample");
  rd_cmd->add_option("--threshold", rd.config.active_threshold,
                     "full-data coefficient magnitude declared active");
  rd_cmd->add_option("--alpha", rd.config.alpha_levels,
                     "significance levels");
  rd_cmd->add_option("--replicates", rd.config.replicates,
                     "number of subsamples");
  rd_cmd->add_option("--seed", rd.config.base_seed, "base seed");
  rd_cmd->add_option("--lambda", rd.lambda_override,
                     "fixed regularization (skips calibration)");
  rd_cmd->add_option("--workers", rd.workers, "parallel replicate workers");
  rd_cmd->add_option("--out", rd.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad invocations are configuration errors
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(*sim_cmd, sim);
    if (th_cmd->parsed()) return run_theory(th);
    if (bd_cmd->parsed()) return run_bound(bd);
    if (cv_cmd->parsed()) return run_covest(cv);
    if (rd_cmd->parsed()) return run_realdata_cmd(rd);
  } catch (const config_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
