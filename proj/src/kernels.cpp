#include "sdlt/kernels.hpp"

#include <cmath>

namespace sdlt::kernels {

// ======================================================================
// scalar reference implementations
// ======================================================================

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

// ======================================================================
// SIMD variants (defined in the per-architecture translation units)
// ======================================================================

#if defined(SDLT_HAVE_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void scal_avx2(double a, double* x, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
double max_abs_avx2(const double* x, std::size_t n);
#endif

#if defined(SDLT_HAVE_NEON)
double dot_neon(const double* x, const double* y, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
void scal_neon(double a, double* x, std::size_t n);
double sum_neon(const double* x, std::size_t n);
double max_abs_neon(const double* x, std::size_t n);
#endif

// ======================================================================
// runtime dispatch
// ======================================================================

namespace {

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(SDLT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(SDLT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend pick_default() {
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

Backend g_backend = pick_default();

}  // namespace

Backend active_backend() { return g_backend; }

bool set_backend(Backend b) {
  if (!backend_available(b)) return false;
  g_backend = b;
  return true;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

double dot(const double* x, const double* y, std::size_t n) {
  switch (g_backend) {
#if defined(SDLT_HAVE_AVX2)
    case Backend::avx2: return dot_avx2(x, y, n);
#endif
#if defined(SDLT_HAVE_NEON)
    case Backend::neon: return dot_neon(x, y, n);
#endif
    default: return dot_scalar(x, y, n);
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  switch (g_backend) {
#if defined(SDLT_HAVE_AVX2)
    case Backend::avx2: axpy_avx2(a, x, y, n); return;
#endif
#if defined(SDLT_HAVE_NEON)
    case Backend::neon: axpy_neon(a, x, y, n); return;
#endif
    default: axpy_scalar(a, x, y, n); return;
  }
}

void scal(double a, double* x, std::size_t n) {
  switch (g_backend) {
#if defined(SDLT_HAVE_AVX2)
    case Backend::avx2: scal_avx2(a, x, n); return;
#endif
#if defined(SDLT_HAVE_NEON)
    case Backend::neon: scal_neon(a, x, n); return;
#endif
    default: scal_scalar(a, x, n); return;
  }
}

double sum(const double* x, std::size_t n) {
  switch (g_backend) {
#if defined(SDLT_HAVE_AVX2)
    case Backend::avx2: return sum_avx2(x, n);
#endif
#if defined(SDLT_HAVE_NEON)
    case Backend::neon: return sum_neon(x, n);
#endif
    default: return sum_scalar(x, n);
  }
}

double max_abs(const double* x, std::size_t n) {
  switch (g_backend) {
#if defined(SDLT_HAVE_AVX2)
    case Backend::avx2: return max_abs_avx2(x, n);
#endif
#if defined(SDLT_HAVE_NEON)
    case Backend::neon: return max_abs_neon(x, n);
#endif
    default: return max_abs_scalar(x, n);
  }
}

}  // namespace sdlt::kernels
