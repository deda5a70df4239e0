#pragma once

#include <cstddef>

// Low-level vector kernels. Every kernel has a scalar reference
// implementation plus SIMD variants (AVX2 on x86_64, NEON on aarch64)
// selected once at startup from CPU capabilities. The active backend can
// be overridden at runtime, which the equivalence tests use to compare
// variants on identical inputs.

namespace sdlt::kernels {

enum class Backend { scalar, avx2, neon };

// Currently active backend.
Backend active_backend();

// Force a backend; returns false (and leaves the state unchanged) when the
// requested backend is not available on this machine. Not thread-safe;
// intended for startup/test use only.
bool set_backend(Backend b);

const char* backend_name(Backend b);

// dot(x, y) = sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);

// y += a*x
void axpy(double a, const double* x, double* y, std::size_t n);

// x *= a
void scal(double a, double* x, std::size_t n);

// sum_i x[i]
double sum(const double* x, std::size_t n);

// max_i |x[i]|  (0 for n == 0)
double max_abs(const double* x, std::size_t n);

// Scalar reference variants, always available (used directly by tests).
double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scal_scalar(double a, double* x, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
double max_abs_scalar(const double* x, std::size_t n);

}  // namespace sdlt::kernels
