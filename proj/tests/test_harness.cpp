// Experiment orchestration: config parsing, deterministic parallel
// replicates, aggregation, the power-curve and histogram exports, and the
// tabular-data pipeline (imputation, rank repair, normalization, subsampled
// testing).
#include "sdlt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "sdlt/covest.hpp"
#include "sdlt/csv.hpp"
#include "sdlt/debias.hpp"
#include "sdlt/errors.hpp"
#include "sdlt/inference.hpp"
#include "sdlt/kernels.hpp"
#include "sdlt/rng.hpp"
#include "sdlt/solver.hpp"
#include "sdlt/stats.hpp"
#include "sdlt/theory.hpp"

using namespace sdlt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(static_cast<bool>(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

harness::ExperimentConfig small_config() {
  harness::ExperimentConfig c;
  c.p = 120;
  c.n = 80;
  c.s0 = 5;
  c.mu = 0.5;
  c.replicates = 6;
  c.alpha_levels = {0.05, 0.1};
  c.base_seed = 11;
  return c;
}

// Deterministic tabular fixture: 60 rows; five leading non-predictive
// columns; 26 numeric columns of which one duplicates another and one is
// constant (both must be dropped); a response driven by columns 0, 5, 9;
// four cells masked as missing.
std::string write_standin(const std::string& path, bool with_signal) {
  const std::size_t rows = 60, pcols = 26;
  Rng gen(4242);
  std::vector<std::vector<double>> c(pcols, std::vector<double>(rows));
  for (std::size_t j = 0; j + 2 < pcols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) c[j][i] = gen.normal();
  }
  for (std::size_t i = 0; i < rows; ++i) c[24][i] = c[3][i];
  for (std::size_t i = 0; i < rows; ++i) c[25][i] = 0.5;
  std::vector<double> y(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double signal =
        with_signal ? 1.2 * c[0][i] - 0.8 * c[5][i] + 0.5 * c[9][i] : 0.0;
    y[i] = signal + 0.3 * gen.normal();
  }
  std::ofstream out(path);
  for (std::size_t i = 0; i < rows; ++i) {
    out << i << ",stateA,cty" << i % 7 << ",name_" << i << "," << i % 5;
    for (std::size_t j = 0; j < pcols; ++j) {
      const bool missing =
          (i == 2 && j == 1) || (i == 7 && j == 4) || (i == 11 && j == 17);
      out << "," << (missing ? "?" : csv::fmt(c[j][i]));
    }
    out << "," << ((i == 5) ? "?" : csv::fmt(y[i])) << "\n";
  }
  return path;
}

}  // namespace

TEST_CASE("config file parsing") {
  SUBCASE("full round trip with comments and spacing") {
    const std::string path = "/tmp/sdlt_harness_config.txt";
    {
      std::ofstream out(path);
      out << "# experiment description\n"
          << "p = 300\n"
          << "n=200   # inline comment\n"
          << "s0 = 12\n"
          << "mu = 0.25\n"
          << "sigma = 1.5\n"
          << "cov = circulant\n"
          << "band = 3\n"
          << "off = 0.1\n"
          << "alpha = 0.05, 0.1,0.25\n"
          << "replicates = 4\n"
          << "lambda_mode = calibrated-true-eps\n"
          << "precision = exact\n"
          << "seed = 99\n";
    }
    const harness::ExperimentConfig c = harness::parse_config_file(path);
    CHECK(c.p == 300);
    CHECK(c.n == 200);
    CHECK(c.s0 == 12);
    CHECK(c.mu == 0.25);
    CHECK(c.sigma == 1.5);
    CHECK(c.cov.kind == CovarianceModel::Kind::circulant);
    CHECK(c.cov.band == 3);
    CHECK(c.cov.off == 0.1);
    REQUIRE(c.alpha_levels.size() == 3);
    CHECK(c.alpha_levels[1] == 0.1);
    CHECK(c.replicates == 4);
    CHECK(c.lambda_mode == harness::LambdaMode::calibrated_true_eps);
    CHECK(c.precision_mode == harness::PrecisionMode::exact);
    CHECK(c.base_seed == 99);
  }
  SUBCASE("fixed lambda mode") {
    const std::string path = "/tmp/sdlt_harness_config_fixed.txt";
    {
      std::ofstream out(path);
      out << "p=50\nn=40\ns0=2\nmu=1\nlambda_mode=fixed\nlambda=0.7\n";
    }
    const harness::ExperimentConfig c = harness::parse_config_file(path);
    CHECK(c.lambda_mode == harness::LambdaMode::fixed);
    CHECK(c.fixed_lambda == 0.7);
  }
  SUBCASE("rejections") {
    auto write_cfg = [](const std::string& body) {
      const std::string path = "/tmp/sdlt_harness_config_bad.txt";
      std::ofstream out(path);
      out << body;
      out.close();
      return path;
    };
    CHECK_THROWS_AS(
        harness::parse_config_file(write_cfg("p=50\nn=40\nbogus_key=1\n")),
        config_error);
    CHECK_THROWS_AS(
        harness::parse_config_file(write_cfg("p=50\nn=forty\n")),
        config_error);
    CHECK_THROWS_AS(harness::parse_config_file(write_cfg("p=50 n=40\n")),
                    config_error);
    // missing p leaves the dimension at zero, caught by validation
    CHECK_THROWS_AS(harness::parse_config_file(write_cfg("n=40\n")),
                    config_error);
    CHECK_THROWS_AS(
        harness::parse_config_file(write_cfg("p=50\nn=40\nlambda_mode=auto\n")),
        config_error);
    CHECK_THROWS_AS(
        harness::parse_config_file(write_cfg("p=50\nn=40\ncov=toeplitz\n")),
        config_error);
    CHECK_THROWS_AS(harness::parse_config_file("/tmp/no_such_config_file.txt"),
                    config_error);
  }
}

TEST_CASE("experiment config validation") {
  harness::ExperimentConfig base = small_config();
  CHECK_NOTHROW(harness::validate(base));

  harness::ExperimentConfig c = base;
  c.s0 = c.p + 1;
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.mu = 0.0;  // active coefficients need a positive magnitude
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.alpha_levels = {};
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.alpha_levels = {0.05, 1.0};
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.replicates = 0;
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.lambda_mode = harness::LambdaMode::fixed;
  c.fixed_lambda = 0.0;
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.lambda_mode = harness::LambdaMode::calibrated_true_eps;
  c.s0 = 0;
  CHECK_THROWS_AS(harness::validate(c), config_error);

  c = base;
  c.cov = CovarianceModel::circulant(60, 0.1);  // 2*band >= p
  CHECK_THROWS_AS(harness::validate(c), config_error);
}

TEST_CASE("synthetic runs are deterministic across worker counts") {
  const harness::ExperimentConfig c = small_config();
  const harness::ExperimentReport r1 = harness::run_synthetic(c, 1);
  const harness::ExperimentReport r4 = harness::run_synthetic(c, 4);

  REQUIRE(r1.rows.size() == c.replicates);
  REQUIRE(r4.rows.size() == c.replicates);
  CHECK(r1.failed_count == 0);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    const harness::ReplicateRow& a = r1.rows[i];
    const harness::ReplicateRow& b = r4.rows[i];
    CHECK(a.index == i);
    CHECK(a.seed == c.base_seed + i);
    CHECK(a.lambda == b.lambda);
    CHECK(a.tau == b.tau);
    CHECK(a.d == b.d);
    REQUIRE(a.per_alpha.size() == c.alpha_levels.size());
    for (std::size_t k = 0; k < a.per_alpha.size(); ++k) {
      CHECK(a.per_alpha[k].summary.type_I == b.per_alpha[k].summary.type_I);
      CHECK(a.per_alpha[k].summary.power == b.per_alpha[k].summary.power);
      CHECK(a.per_alpha[k].theory == b.per_alpha[k].theory);
    }
  }
  REQUIRE(r1.sample_z.size() == c.p);
  for (std::size_t i = 0; i < c.p; ++i) CHECK(r1.sample_z[i] == r4.sample_z[i]);

  // the written reports must match byte for byte
  const std::string d1 = "/tmp/sdlt_harness_out_w1";
  const std::string d4 = "/tmp/sdlt_harness_out_w4";
  harness::write_outputs(d1, c, r1, 1);
  harness::write_outputs(d4, c, r4, 4);
  for (const char* name : {"report.csv", "replicates.csv", "zscores.csv",
                           "histogram.csv"}) {
    CHECK(slurp(d1 + "/" + name) == slurp(d4 + "/" + name));
  }
  for (const char* name : {"report.csv", "replicates.csv", "zscores.csv",
                           "histogram.csv", "config.json"}) {
    CHECK(std::filesystem::exists(std::filesystem::path(d1) / name));
  }
}

TEST_CASE("aggregates are recomputable from the replicate rows") {
  const harness::ExperimentConfig c = small_config();
  const harness::ExperimentReport r = harness::run_synthetic(c, 3);
  REQUIRE(r.aggregates.size() == c.alpha_levels.size());
  for (std::size_t k = 0; k < r.aggregates.size(); ++k) {
    const harness::AlphaAggregate& agg = r.aggregates[k];
    CHECK(agg.alpha == c.alpha_levels[k]);
    std::vector<double> t1, pw, th;
    for (const harness::ReplicateRow& row : r.rows) {
      if (row.failed) continue;
      if (row.per_alpha[k].summary.type_I)
        t1.push_back(*row.per_alpha[k].summary.type_I);
      if (row.per_alpha[k].summary.power)
        pw.push_back(*row.per_alpha[k].summary.power);
      th.push_back(row.per_alpha[k].theory);
    }
    auto mean_of = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) /
             static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v, double m) {
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    REQUIRE(agg.type_I_mean.has_value());
    REQUIRE(agg.power_mean.has_value());
    const double t1m = mean_of(t1), pwm = mean_of(pw), thm = mean_of(th);
    CHECK(std::fabs(*agg.type_I_mean - t1m) <= 1e-12);
    CHECK(std::fabs(*agg.type_I_std - std_of(t1, t1m)) <= 1e-12);
    CHECK(std::fabs(*agg.power_mean - pwm) <= 1e-12);
    CHECK(std::fabs(*agg.power_std - std_of(pw, pwm)) <= 1e-12);
    CHECK(std::fabs(agg.theory_mean - thm) <= 1e-12);
    CHECK(agg.successes == r.rows.size() - r.failed_count);
  }
}

TEST_CASE("null model: no power column, size near the nominal level") {
  harness::ExperimentConfig c;
  c.p = 200;
  c.n = 120;
  c.s0 = 0;
  c.mu = 0.0;
  c.replicates = 5;
  c.alpha_levels = {0.05};
  c.base_seed = 21;
  const harness::ExperimentReport r = harness::run_synthetic(c, 4);
  CHECK(r.failed_count == 0);
  CHECK_FALSE(r.mu0.has_value());
  REQUIRE(r.aggregates.size() == 1);
  const harness::AlphaAggregate& agg = r.aggregates[0];
  CHECK_FALSE(agg.power_mean.has_value());
  CHECK_FALSE(agg.power_std.has_value());
  REQUIRE(agg.type_I_mean.has_value());
  CHECK(std::fabs(*agg.type_I_mean - 0.05) <= 0.05);
  // the isotropic reference with no signal degenerates to the level itself
  CHECK(agg.theory_mean == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_FALSE(agg.theory_std.has_value());
  // the retained diagnostic sample is the all-zero coefficient vector
  REQUIRE(r.sample_theta0.size() == c.p);
  CHECK(kernels::max_abs(r.sample_theta0.data(), c.p) == 0.0);
}

TEST_CASE("fixed regularization is honored verbatim") {
  harness::ExperimentConfig c = small_config();
  c.replicates = 3;
  c.lambda_mode = harness::LambdaMode::fixed;
  c.fixed_lambda = 0.7;
  const harness::ExperimentReport r = harness::run_synthetic(c, 2);
  CHECK(r.kappa == 0.0);
  for (const harness::ReplicateRow& row : r.rows) {
    REQUIRE_FALSE(row.failed);
    CHECK(row.lambda == 0.7);
  }
}

TEST_CASE("correlated design with exact precision reports a spread for the "
          "reference column") {
  harness::ExperimentConfig c;
  c.p = 100;
  c.n = 70;
  c.s0 = 4;
  c.mu = 0.6;
  c.replicates = 4;
  c.cov = CovarianceModel::circulant(2, 0.15);
  c.precision_mode = harness::PrecisionMode::exact;
  c.alpha_levels = {0.05};
  c.base_seed = 31;
  const harness::ExperimentReport r = harness::run_synthetic(c, 4);
  CHECK(r.failed_count == 0);
  REQUIRE(r.aggregates.size() == 1);
  const harness::AlphaAggregate& agg = r.aggregates[0];
  CHECK(agg.theory_std.has_value());  // per-replicate realized bound
  CHECK(agg.theory_mean > 0.05);
  CHECK(agg.theory_mean < 1.0);
  // the realized bound should not wildly exceed the measured power
  REQUIRE(agg.power_mean.has_value());
  CHECK(*agg.power_mean >= agg.theory_mean - 0.25);
}

TEST_CASE("estimated precision tracks exact precision on a correlated "
          "design") {
  harness::ExperimentConfig c;
  c.p = 240;
  c.n = 160;
  c.s0 = 8;
  c.mu = 0.4;
  c.replicates = 4;
  c.cov = CovarianceModel::circulant(3, 0.1);
  c.alpha_levels = {0.05};
  c.base_seed = 41;
  c.precision_mode = harness::PrecisionMode::exact;
  const harness::ExperimentReport exact = harness::run_synthetic(c, 4);
  c.precision_mode = harness::PrecisionMode::estimated;
  const harness::ExperimentReport est = harness::run_synthetic(c, 4);
  CHECK(exact.failed_count == 0);
  CHECK(est.failed_count == 0);
  REQUIRE(exact.aggregates[0].type_I_mean.has_value());
  REQUIRE(est.aggregates[0].type_I_mean.has_value());
  // robustness of the size to plugging in the thresholded estimate; the
  // full-scale band is enforced by the acceptance gate
  CHECK(std::fabs(*exact.aggregates[0].type_I_mean -
                  *est.aggregates[0].type_I_mean) <= 0.08);
}

TEST_CASE("power curve emission") {
  SUBCASE("matches the asymptotic reference at a pinned configuration") {
    const harness::PowerCurve c =
        harness::emit_power_curve(0.025, 0.6, 3.674234614174767, {0.05});
    REQUIRE(c.rows.size() == 1);
    CHECK_FALSE(c.tau_star_infinite);
    CHECK(c.rows[0].first == 0.05);
    CHECK(std::fabs(c.rows[0].second - 0.9057) <= 2e-3);
  }
  SUBCASE("nondecreasing in the level") {
    std::vector<double> grid;
    for (int i = 1; i <= 99; ++i) grid.push_back(0.01 * i);
    const harness::PowerCurve c =
        harness::emit_power_curve(0.025, 0.6, 2.4495, grid);
    for (std::size_t i = 1; i < c.rows.size(); ++i) {
      CHECK(c.rows[i].second >= c.rows[i - 1].second);
    }
  }
  SUBCASE("degenerate noise floor collapses the curve to the diagonal") {
    const harness::PowerCurve c =
        harness::emit_power_curve(0.025, 0.10, 2.0, {0.01, 0.05, 0.2});
    CHECK(c.tau_star_infinite);
    for (const auto& [alpha, power] : c.rows) {
      CHECK(power == doctest::Approx(alpha).epsilon(1e-10));
    }
  }
  SUBCASE("CSV export") {
    const harness::PowerCurve c =
        harness::emit_power_curve(0.025, 0.6, 2.4495, {0.01, 0.05});
    const std::string path = "/tmp/sdlt_harness_curve.csv";
    harness::write_power_curve_csv(path, c);
    const auto rows = csv::read_rows(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "alpha");
    CHECK(rows[0][2] == "tau_star_infinite");
    CHECK(rows[1][2] == "0");
  }
  SUBCASE("negative shift is rejected") {
    CHECK_THROWS_AS(harness::emit_power_curve(0.025, 0.6, -1.0, {0.05}),
                    invalid_parameter_error);
  }
}

TEST_CASE("z-score histogram binning") {
  SUBCASE("edge conventions") {
    const Vec z = {-6.1, -6.0, 0.0, 5.99, 6.0, 7.5};
    const Vec t0 = {0.0, 1.0, 0.0, 0.0, 1.0, 0.0};
    const auto rows = harness::zscore_histogram(z, t0);
    REQUIRE(rows.size() == 50);  // 48 finite bins plus two overflow rows
    CHECK(rows.front().lo == -kInf);
    CHECK(rows.front().hi == -6.0);
    CHECK(rows.back().lo == 6.0);
    CHECK(rows.back().hi == kInf);
    CHECK(rows.front().inactive == 1);           // -6.1
    CHECK(rows[1].active == 1);                  // -6.0 lands in [-6,-5.75)
    CHECK(rows[1].lo == -6.0);
    CHECK(rows[25].inactive == 1);               // 0.0 lands in [0,0.25)
    CHECK(rows[25].lo == 0.0);
    CHECK(rows[48].inactive == 1);               // 5.99 lands in [5.75,6)
    CHECK(rows.back().active == 1);              // 6.0 overflows
    CHECK(rows.back().inactive == 1);            // 7.5 overflows
    // overflow rows never contribute density
    CHECK(rows.front().inactive_density == 0.0);
    CHECK(rows.back().active_density == 0.0);
  }
  SUBCASE("mass conservation and densities") {
    Rng gen(7);
    Vec z(500), t0(500);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = 2.5 * gen.normal();
      t0[i] = (i % 5 == 0) ? 1.0 : 0.0;
    }
    const auto rows = harness::zscore_histogram(z, t0);
    std::size_t act = 0, inact = 0;
    double act_mass = 0.0, inact_mass = 0.0;
    for (const auto& r : rows) {
      act += r.active;
      inact += r.inactive;
      if (std::isfinite(r.lo)) {
        act_mass += r.active_density * 0.25;
        inact_mass += r.inactive_density * 0.25;
      }
    }
    CHECK(act == 100);
    CHECK(inact == 400);
    std::size_t act_finite = 0, inact_finite = 0;
    for (std::size_t b = 1; b + 1 < rows.size(); ++b) {
      act_finite += rows[b].active;
      inact_finite += rows[b].inactive;
    }
    CHECK(act_mass == doctest::Approx(act_finite / 100.0).epsilon(1e-12));
    CHECK(inact_mass == doctest::Approx(inact_finite / 400.0).epsilon(1e-12));
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(harness::zscore_histogram(Vec{1.0}, Vec{}),
                    invalid_parameter_error);
  }
}

TEST_CASE("tabular data loading") {
  const std::string path = write_standin("/tmp/sdlt_standin.csv", true);
  const harness::RealDataSet ds = harness::load_realdata(path);

  CHECK(ds.X.rows == 60);
  CHECK(ds.X.cols == 24);
  CHECK(ds.kept_columns.size() == 24);
  REQUIRE(ds.dropped_columns.size() == 2);
  CHECK(ds.dropped_columns[0] == 24);  // duplicate of column 3
  CHECK(ds.dropped_columns[1] == 25);  // constant column
  CHECK(ds.imputed_cells == 4);        // three predictors and one response

  // columns are centered and scaled to squared norm = row count
  const double n = static_cast<double>(ds.X.rows);
  for (std::size_t j = 0; j < ds.X.cols; ++j) {
    const double* col = ds.X.col(j);
    CHECK(std::fabs(kernels::sum(col, ds.X.rows)) <= 1e-9);
    CHECK(kernels::dot(col, col, ds.X.rows) ==
          doctest::Approx(n).epsilon(1e-12));
  }

  // full-data coefficients recover the generating signal
  REQUIRE(ds.theta0.size() == 24);
  CHECK(ds.theta0[0] == doctest::Approx(1.1217).epsilon(1e-3));
  CHECK(ds.theta0[5] == doctest::Approx(-0.6826).epsilon(1e-3));
  CHECK(ds.theta0[9] == doctest::Approx(0.4678).epsilon(1e-3));
  for (std::size_t i = 0; i < ds.theta0.size(); ++i) {
    if (i == 0 || i == 5 || i == 9) continue;
    CHECK(std::fabs(ds.theta0[i]) < 0.21);
  }

  SUBCASE("rejections") {
    CHECK_THROWS_AS(harness::load_realdata("/tmp/no_such_data.csv"),
                    config_error);
    {
      std::ofstream out("/tmp/sdlt_standin_ragged.csv");
      out << "a,b,c,d,e,1,2,3\n";
      out << "a,b,c,d,e,1,2\n";
    }
    CHECK_THROWS_AS(harness::load_realdata("/tmp/sdlt_standin_ragged.csv"),
                    config_error);
    {
      std::ofstream out("/tmp/sdlt_standin_text.csv");
      out << "a,b,c,d,e,1,oops,3\n";
    }
    CHECK_THROWS_AS(harness::load_realdata("/tmp/sdlt_standin_text.csv"),
                    config_error);
    {
      std::ofstream out("/tmp/sdlt_standin_narrow.csv");
      out << "a,b,c,d,e,1\n";  // no predictor before the response
    }
    CHECK_THROWS_AS(harness::load_realdata("/tmp/sdlt_standin_narrow.csv"),
                    config_error);
  }
}

TEST_CASE("subsampled testing on tabular data") {
  const std::string path = write_standin("/tmp/sdlt_standin.csv", true);
  harness::RealDataConfig cfg;
  cfg.data_path = path;
  cfg.subsample_n = 20;
  cfg.active_threshold = 0.3;  // isolates the three generating columns
  cfg.alpha_levels = {0.05};
  cfg.replicates = 5;
  cfg.base_seed = 700;

  const harness::ExperimentReport r = harness::run_realdata(cfg, 2);
  CHECK(r.failed_count == 0);
  CHECK(r.epsilon == doctest::Approx(3.0 / 24.0).epsilon(1e-12));
  CHECK(r.delta == doctest::Approx(20.0 / 24.0).epsilon(1e-12));
  CHECK(r.kappa > 0.0);
  CHECK_FALSE(r.mu0.has_value());
  REQUIRE(r.aggregates.size() == 1);
  const harness::AlphaAggregate& agg = r.aggregates[0];
  CHECK(agg.successes == 5);
  REQUIRE(agg.type_I_mean.has_value());
  REQUIRE(agg.power_mean.has_value());
  CHECK(*agg.type_I_mean >= 0.0);
  CHECK(*agg.type_I_mean <= 1.0);
  CHECK(*agg.power_mean > 0.0);
  CHECK(agg.theory_std.has_value());

  SUBCASE("deterministic across worker counts including outputs") {
    const harness::ExperimentReport r1 = harness::run_realdata(cfg, 1);
    REQUIRE(r1.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      CHECK(r.rows[i].lambda == r1.rows[i].lambda);
      CHECK(r.rows[i].tau == r1.rows[i].tau);
      CHECK(r.rows[i].d == r1.rows[i].d);
    }
    const std::string d1 = "/tmp/sdlt_harness_real_w1";
    const std::string d2 = "/tmp/sdlt_harness_real_w2";
    harness::write_outputs(d1, cfg, r1, 1);
    harness::write_outputs(d2, cfg, r, 2);
    for (const char* name :
         {"report.csv", "replicates.csv", "zscores.csv", "histogram.csv"}) {
      CHECK(slurp(d1 + "/" + name) == slurp(d2 + "/" + name));
    }
    // the diagnostic exports cover every tested coordinate
    const auto zrows = csv::read_rows(d1 + "/zscores.csv");
    CHECK(zrows.size() == 25);  // header + one row per kept column
    std::size_t actives = 0;
    for (std::size_t i = 1; i < zrows.size(); ++i) {
      if (zrows[i][2] == "active") ++actives;
    }
    CHECK(actives == 3);
  }

  SUBCASE("infinite threshold: no actives, size stays moderate") {
    // a response with no planted signal keeps the all-null size meaningful
    const std::string null_path =
        write_standin("/tmp/sdlt_standin_null.csv", false);
    harness::RealDataConfig nc = cfg;
    nc.data_path = null_path;
    nc.active_threshold = kInf;
    nc.replicates = 6;
    nc.base_seed = 50;
    const harness::ExperimentReport nr = harness::run_realdata(nc, 3);
    CHECK(nr.failed_count == 0);
    CHECK(nr.epsilon == 0.0);
    REQUIRE(nr.aggregates.size() == 1);
    CHECK_FALSE(nr.aggregates[0].power_mean.has_value());
    REQUIRE(nr.aggregates[0].type_I_mean.has_value());
    CHECK(*nr.aggregates[0].type_I_mean <= 0.05 + 0.15);
    // with no active set the realized reference collapses to the level
    CHECK(nr.aggregates[0].theory_mean ==
          doctest::Approx(0.05).epsilon(1e-12));
  }

  SUBCASE("oversized subsample is rejected") {
    harness::RealDataConfig bad = cfg;
    bad.subsample_n = 61;
    CHECK_THROWS_AS(harness::run_realdata(bad, 1), config_error);
  }
  SUBCASE("invalid levels and replicate counts are rejected") {
    harness::RealDataConfig bad = cfg;
    bad.replicates = 0;
    CHECK_THROWS_AS(harness::run_realdata(bad, 1), config_error);
    bad = cfg;
    bad.alpha_levels = {0.0};
    CHECK_THROWS_AS(harness::run_realdata(bad, 1), config_error);
  }
}

TEST_CASE("full-sample self-consistency of the tabular pipeline") {
  // With the subsample equal to the full data and the regularization driven
  // to zero, the fit reproduces the full-data coefficients, so the debiased
  // estimate must return them unchanged and the non-signal coordinates
  // should yield unremarkable p-values.
  const std::string path = write_standin("/tmp/sdlt_standin.csv", true);
  const harness::RealDataSet ds = harness::load_realdata(path);

  const LassoFit fit = fit_lasso(ds.X, ds.y, 1e-8);
  const covest::CovEstimate cov = covest::estimate_covariance(ds.X);
  const covest::PrecisionEstimate prec =
      covest::invert_covariance(cov.sigma_hat);
  const DebiasedEstimate est = debias(fit, ds.X, ds.y, &prec.precision);

  double dev = 0.0;
  for (std::size_t i = 0; i < ds.theta0.size(); ++i) {
    dev = std::max(dev, std::fabs(est.theta_u[i] - ds.theta0[i]));
  }
  CHECK(dev <= 1e-5);

  Vec diag(ds.theta0.size());
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = prec.precision(i, i);
  const inference::TestReport rep = inference::p_values(est, diag, 0.05);
  std::vector<double> inactive_p;
  for (std::size_t i = 0; i < rep.p_values.size(); ++i) {
    if (i != 0 && i != 5 && i != 9) inactive_p.push_back(rep.p_values[i]);
  }
  REQUIRE(inactive_p.size() == 21);
  const double ks =
      stats::ks_distance(inactive_p, [](double t) { return t; });
  CHECK(ks <= 0.35);

  // the harness front door accepts the same configuration
  harness::RealDataConfig cfg;
  cfg.data_path = path;
  cfg.subsample_n = 60;
  cfg.active_threshold = 0.3;
  cfg.alpha_levels = {0.05};
  cfg.replicates = 1;
  cfg.base_seed = 1;
  cfg.lambda_override = 1e-8;
  const harness::ExperimentReport r = harness::run_realdata(cfg, 1);
  CHECK(r.failed_count == 0);
  CHECK(r.rows[0].lambda == 1e-8);
  CHECK(r.kappa == 0.0);  // no calibration happens under an override
}

TEST_CASE("config echo is machine-readable") {
  harness::ExperimentConfig c = small_config();
  c.replicates = 2;
  const harness::ExperimentReport r = harness::run_synthetic(c, 1);
  const std::string dir = "/tmp/sdlt_harness_echo";
  harness::write_outputs(dir, c, r, 1);
  const std::string body = slurp(dir + "/config.json");
  CHECK(body.find("\"mode\": \"synthetic\"") != std::string::npos);
  CHECK(body.find("\"p\": 120") != std::string::npos);
  CHECK(body.find("\"kernel_backend\"") != std::string::npos);
  CHECK(body.find("\"kappa\"") != std::string::npos);
}
