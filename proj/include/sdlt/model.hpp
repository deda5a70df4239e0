#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdlt/matrix.hpp"

// Problem-instance construction: covariance models, Gaussian random designs
// with i.i.d. N(0, Sigma) rows, sparse positive signals, noisy responses,
// and the asymptotic scaling parameters that summarize an instance.

namespace sdlt {

struct CovarianceModel {
  enum class Kind { identity, circulant, dense };

  Kind kind = Kind::identity;
  std::size_t band = 0;  // circulant: half-width of the band
  double off = 0.0;      // circulant: value on the band
  Matrix dense_matrix;   // dense: caller-supplied symmetric positive definite

  static CovarianceModel identity() { return {}; }
  static CovarianceModel circulant(std::size_t band, double off) {
    CovarianceModel m;
    m.kind = Kind::circulant;
    m.band = band;
    m.off = off;
    return m;
  }
  static CovarianceModel dense(Matrix sigma) {
    CovarianceModel m;
    m.kind = Kind::dense;
    m.dense_matrix = std::move(sigma);
    return m;
  }
};

// Dense realization of the model: symmetric and certified positive definite.
// Throws invalid_covariance_error when the model cannot produce one.
Matrix build_covariance(const CovarianceModel& model, std::size_t p);

struct SignalSpec {
  std::size_t p = 0;   // dimension
  std::size_t s0 = 0;  // sparsity; support drawn uniformly without replacement
  double mu = 0.0;     // every active coefficient equals +mu
};

struct Instance {
  Matrix X;      // n x p design, rows i.i.d. N(0, Sigma)
  Vec theta0;    // length p
  Vec w;         // length n noise
  Vec y;         // y = X theta0 + w
  double sigma = 0.0;
  double mu = 0.0;
  std::size_t s0 = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> support;  // sorted active indices

  std::size_t n() const { return X.rows; }
  std::size_t p() const { return X.cols; }
};

struct ScalingParams {
  double delta = 0.0;    // n/p
  double epsilon = 0.0;  // s0/p
  double sigma0 = 0.0;   // sigma/sqrt(n)
  std::optional<double> mu0;  // mu*sqrt(n)/sigma when defined
};

// Covariance machinery shared by all replicates of a configuration: the
// dense realization and its lower Cholesky factor (both empty for identity).
struct Design {
  CovarianceModel model;
  std::size_t p = 0;
  bool is_identity = true;
  Matrix sigma;
  Matrix chol;
};

Design make_design(const CovarianceModel& model, std::size_t p);

// Deterministic for a fixed seed. Draw order: support indices, then the
// n*p standard normals for X (column-major), then the n noise normals.
Instance sample_instance(const Design& design, const SignalSpec& signal, std::size_t n,
                         double sigma, std::uint64_t seed);
Instance sample_instance(const CovarianceModel& model, const SignalSpec& signal, std::size_t n,
                         double sigma, std::uint64_t seed);

ScalingParams scaling_of(const Instance& inst);

}  // namespace sdlt
