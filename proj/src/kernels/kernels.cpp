// Scalar reference kernels plus the backend dispatch table.

#include "respotopt/kernels/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace respotopt::kernels {

// ============================================================================
// Scalar reference implementations
// ============================================================================

namespace {

void csr_matvec_scalar(int n_rows, const int* row_ptr, const int* cols,
                       const double* vals, const double* x, double* y) {
  for (int r = 0; r < n_rows; ++r) {
    double acc = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += vals[k] * x[cols[k]];
    y[r] = acc;
  }
}

void bilinear_form8_scalar(int n_elems, const double* M, const double* a,
                           const double* b, double* out) {
  for (int e = 0; e < n_elems; ++e) {
    const double* ae = a + 8 * e;
    const double* be = b + 8 * e;
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double* row = M + 8 * i;
      double mi = 0.0;
      for (int j = 0; j < 8; ++j) mi += row[j] * be[j];
      acc += ae[i] * mi;
    }
    out[e] = acc;
  }
}

void dot8_scalar(int n_elems, const double* v, const double* b, double* out) {
  for (int e = 0; e < n_elems; ++e) {
    const double* be = b + 8 * e;
    double acc = 0.0;
    for (int j = 0; j < 8; ++j) acc += v[j] * be[j];
    out[e] = acc;
  }
}

double mma_eval_scalar(int n, const double* p0, const double* q0,
                       const double* p1, const double* q1, const double* low,
                       const double* upp, const double* alfa,
                       const double* beta, double lam, double* x) {
  double resid = 0.0;
  if (p1 && q1) {
    for (int j = 0; j < n; ++j) {
      const double sp = std::sqrt(p0[j] + lam * p1[j]);
      const double sq = std::sqrt(q0[j] + lam * q1[j]);
      double xj = (low[j] * sp + upp[j] * sq) / (sp + sq);
      xj = std::min(std::max(xj, alfa[j]), beta[j]);
      x[j] = xj;
      resid += p1[j] / (upp[j] - xj) + q1[j] / (xj - low[j]);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double sp = std::sqrt(p0[j]);
      const double sq = std::sqrt(q0[j]);
      double xj = (low[j] * sp + upp[j] * sq) / (sp + sq);
      x[j] = std::min(std::max(xj, alfa[j]), beta[j]);
    }
  }
  return resid;
}

}  // namespace

// ============================================================================
// AVX2 declarations (defined in kernels_avx2.cpp, built with -mavx2)
// ============================================================================

#if RESPOTOPT_HAVE_AVX2
namespace avx2 {
void csr_matvec(int n_rows, const int* row_ptr, const int* cols,
                const double* vals, const double* x, double* y);
void bilinear_form8(int n_elems, const double* M, const double* a,
                    const double* b, double* out);
void dot8(int n_elems, const double* v, const double* b, double* out);
double mma_eval(int n, const double* p0, const double* q0, const double* p1,
                const double* q1, const double* low, const double* upp,
                const double* alfa, const double* beta, double lam, double* x);
}  // namespace avx2
#endif

// ============================================================================
// Dispatch
// ============================================================================

namespace {

bool cpu_has_avx2() {
#if RESPOTOPT_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<int> g_backend{-1};

Backend resolve_from_env() {
  const char* env = std::getenv("RESPOTOPT_SIMD");
  std::string v = env ? env : "auto";
  if (v == "scalar") return Backend::Scalar;
  if (v == "avx2") {
    if (!backend_supported(Backend::Avx2))
      throw std::runtime_error("RESPOTOPT_SIMD=avx2 but AVX2 is unavailable");
    return Backend::Avx2;
  }
  if (v == "auto" || v.empty())
    return backend_supported(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
  throw std::runtime_error("RESPOTOPT_SIMD must be scalar, avx2 or auto, got: " + v);
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

bool backend_supported(Backend b) {
  if (b == Backend::Scalar) return true;
  return cpu_has_avx2();
}

Backend active_backend() {
  int cur = g_backend.load(std::memory_order_acquire);
  if (cur < 0) {
    Backend b = resolve_from_env();
    g_backend.store(static_cast<int>(b), std::memory_order_release);
    return b;
  }
  return static_cast<Backend>(cur);
}

void set_backend(Backend b) {
  if (!backend_supported(b))
    throw std::runtime_error(std::string("kernel backend unsupported on this CPU: ") +
                             backend_name(b));
  g_backend.store(static_cast<int>(b), std::memory_order_release);
}

void csr_matvec(int n_rows, const int* row_ptr, const int* cols,
                const double* vals, const double* x, double* y) {
#if RESPOTOPT_HAVE_AVX2
  if (active_backend() == Backend::Avx2)
    return avx2::csr_matvec(n_rows, row_ptr, cols, vals, x, y);
#endif
  csr_matvec_scalar(n_rows, row_ptr, cols, vals, x, y);
}

void bilinear_form8(int n_elems, const double* M, const double* a,
                    const double* b, double* out) {
#if RESPOTOPT_HAVE_AVX2
  if (active_backend() == Backend::Avx2)
    return avx2::bilinear_form8(n_elems, M, a, b, out);
#endif
  bilinear_form8_scalar(n_elems, M, a, b, out);
}

void dot8(int n_elems, const double* v, const double* b, double* out) {
#if RESPOTOPT_HAVE_AVX2
  if (active_backend() == Backend::Avx2) return avx2::dot8(n_elems, v, b, out);
#endif
  dot8_scalar(n_elems, v, b, out);
}

double mma_eval(int n, const double* p0, const double* q0, const double* p1,
                const double* q1, const double* low, const double* upp,
                const double* alfa, const double* beta, double lam, double* x) {
#if RESPOTOPT_HAVE_AVX2
  if (active_backend() == Backend::Avx2)
    return avx2::mma_eval(n, p0, q0, p1, q1, low, upp, alfa, beta, lam, x);
#endif
  return mma_eval_scalar(n, p0, q0, p1, q1, low, upp, alfa, beta, lam, x);
}

}  // namespace respotopt::kernels
