#include "sdlt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdlt/errors.hpp"
#include "sdlt/kernels.hpp"
#include "sdlt/linalg.hpp"
#include "sdlt/rng.hpp"

namespace sdlt {

namespace k = sdlt::kernels;

Matrix build_covariance(const CovarianceModel& model, std::size_t p) {
  if (p < 1) throw invalid_parameter_error("build_covariance: p must be >= 1");
  switch (model.kind) {
    case CovarianceModel::Kind::identity:
      return Matrix::identity(p);

    case CovarianceModel::Kind::circulant: {
      if (model.band < 1) {
        throw invalid_covariance_error("circulant covariance: band half-width must be >= 1");
      }
      if (2 * model.band >= p) {
        throw invalid_covariance_error(
            "circulant covariance: need 2*band < p so the bands do not overlap");
      }
      Matrix s(p, p);
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
          if (i == j) {
            s(i, j) = 1.0;
          } else {
            const std::size_t diff = i > j ? i - j : j - i;
            const std::size_t wrapped = std::min(diff, p - diff);
            s(i, j) = (wrapped <= model.band) ? model.off : 0.0;
          }
        }
      }
      Matrix probe = s;
      if (!linalg::cholesky_in_place(probe)) {
        throw invalid_covariance_error("circulant covariance is not positive definite");
      }
      return s;
    }

    case CovarianceModel::Kind::dense: {
      const Matrix& m = model.dense_matrix;
      if (m.rows != p || m.cols != p) {
        throw invalid_covariance_error("dense covariance has the wrong dimensions");
      }
      if (linalg::max_asymmetry(m) > 1e-10) {
        throw invalid_covariance_error("dense covariance is not symmetric (tolerance 1e-10)");
      }
      Matrix probe = m;
      if (!linalg::cholesky_in_place(probe)) {
        throw invalid_covariance_error("dense covariance is not positive definite");
      }
      return m;
    }
  }
  throw invalid_covariance_error("unknown covariance kind");
}

Design make_design(const CovarianceModel& model, std::size_t p) {
  Design d;
  d.model = model;
  d.p = p;
  d.is_identity = (model.kind == CovarianceModel::Kind::identity);
  if (d.is_identity) {
    // no matrices needed: sampling uses the standard normals directly
    if (p < 1) throw invalid_parameter_error("make_design: p must be >= 1");
    return d;
  }
  d.sigma = build_covariance(model, p);
  d.chol = d.sigma;
  if (!linalg::cholesky_in_place(d.chol)) {
    throw invalid_covariance_error("covariance factorization failed");
  }
  return d;
}

Instance sample_instance(const Design& design, const SignalSpec& signal, std::size_t n,
                         double sigma, std::uint64_t seed) {
  const std::size_t p = design.p;
  if (signal.p != p) throw invalid_parameter_error("signal dimension does not match design");
  if (signal.s0 > p) throw invalid_parameter_error("sparsity s0 exceeds dimension p");
  if (signal.s0 > 0 && !(signal.mu > 0.0)) {
    throw invalid_parameter_error("signal magnitude mu must be positive");
  }
  if (n < 1) throw invalid_parameter_error("sample_instance: n must be >= 1");
  if (sigma < 0.0) throw invalid_parameter_error("sample_instance: sigma must be >= 0");

  Rng rng(seed);
  Instance inst;
  inst.sigma = sigma;
  inst.mu = signal.mu;
  inst.s0 = signal.s0;
  inst.seed = seed;

  // support: partial Fisher-Yates, uniform without replacement
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < signal.s0; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(idx[i], idx[j]);
  }
  inst.support.assign(idx.begin(), idx.begin() + signal.s0);
  std::sort(inst.support.begin(), inst.support.end());

  inst.theta0.assign(p, 0.0);
  for (std::size_t j : inst.support) inst.theta0[j] = signal.mu;

  // design: standard normal fill, then rows mapped through the triangular
  // factor (x_i = L z_i), done column-wise: col_j <- sum_{k<=j} L(j,k) Z_k
  inst.X = Matrix(n, p);
  for (auto& v : inst.X.data) v = rng.normal();
  if (!design.is_identity) {
    const Matrix& L = design.chol;
    for (std::size_t j = p; j-- > 0;) {
      k::scal(L(j, j), inst.X.col(j), n);
      for (std::size_t kk = 0; kk < j; ++kk) {
        const double ljk = L(j, kk);
        if (ljk != 0.0) k::axpy(ljk, inst.X.col(kk), inst.X.col(j), n);
      }
    }
  }

  inst.w.resize(n);
  for (auto& v : inst.w) v = sigma * rng.normal();

  inst.y = inst.w;
  for (std::size_t j : inst.support) k::axpy(signal.mu, inst.X.col(j), inst.y.data(), n);
  return inst;
}

Instance sample_instance(const CovarianceModel& model, const SignalSpec& signal, std::size_t n,
                         double sigma, std::uint64_t seed) {
  return sample_instance(make_design(model, signal.p), signal, n, sigma, seed);
}

ScalingParams scaling_of(const Instance& inst) {
  ScalingParams s;
  const double n = static_cast<double>(inst.n());
  const double p = static_cast<double>(inst.p());
  s.delta = n / p;
  s.epsilon = static_cast<double>(inst.s0) / p;
  s.sigma0 = inst.sigma / std::sqrt(n);
  if (inst.sigma > 0.0 && inst.s0 > 0) {
    s.mu0 = inst.mu * std::sqrt(n) / inst.sigma;
  }
  return s;
}

}  // namespace sdlt
