// AVX2 kernel variants. This translation unit is compiled with -mavx2 and is
// only entered after a runtime cpuid check, so the rest of the library stays
// runnable on baseline x86-64.

#if RESPOTOPT_HAVE_AVX2

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace respotopt::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

void csr_matvec(int n_rows, const int* row_ptr, const int* cols,
                const double* vals, const double* x, double* y) {
  for (int r = 0; r < n_rows; ++r) {
    const int begin = row_ptr[r], end = row_ptr[r + 1];
    int k = begin;
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + k));
      __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      __m256d vv = _mm256_loadu_pd(vals + k);
      acc = _mm256_fmadd_pd(vv, xv, acc);
    }
    double tail = 0.0;
    for (; k < end; ++k) tail += vals[k] * x[cols[k]];
    y[r] = hsum(acc) + tail;
  }
}

void bilinear_form8(int n_elems, const double* M, const double* a,
                    const double* b, double* out) {
  // Lane-wise accumulation of a_i * M_ij * b_j; one horizontal sum per element.
  for (int e = 0; e < n_elems; ++e) {
    const double* ae = a + 8 * e;
    const double* be = b + 8 * e;
    __m256d blo = _mm256_loadu_pd(be);
    __m256d bhi = _mm256_loadu_pd(be + 4);
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < 8; ++i) {
      const double* row = M + 8 * i;
      __m256d ai = _mm256_set1_pd(ae[i]);
      acc = _mm256_fmadd_pd(_mm256_mul_pd(ai, _mm256_loadu_pd(row)), blo, acc);
      acc = _mm256_fmadd_pd(_mm256_mul_pd(ai, _mm256_loadu_pd(row + 4)), bhi, acc);
    }
    out[e] = hsum(acc);
  }
}

void dot8(int n_elems, const double* v, const double* b, double* out) {
  __m256d vlo = _mm256_loadu_pd(v);
  __m256d vhi = _mm256_loadu_pd(v + 4);
  for (int e = 0; e < n_elems; ++e) {
    const double* be = b + 8 * e;
    __m256d acc = _mm256_mul_pd(vlo, _mm256_loadu_pd(be));
    acc = _mm256_fmadd_pd(vhi, _mm256_loadu_pd(be + 4), acc);
    out[e] = hsum(acc);
  }
}

double mma_eval(int n, const double* p0, const double* q0, const double* p1,
                const double* q1, const double* low, const double* upp,
                const double* alfa, const double* beta, double lam, double* x) {
  int j = 0;
  double resid = 0.0;
  if (p1 && q1) {
    __m256d vlam = _mm256_set1_pd(lam);
    __m256d racc = _mm256_setzero_pd();
    for (; j + 4 <= n; j += 4) {
      __m256d pj = _mm256_add_pd(_mm256_loadu_pd(p0 + j),
                                 _mm256_mul_pd(vlam, _mm256_loadu_pd(p1 + j)));
      __m256d qj = _mm256_add_pd(_mm256_loadu_pd(q0 + j),
                                 _mm256_mul_pd(vlam, _mm256_loadu_pd(q1 + j)));
      __m256d sp = _mm256_sqrt_pd(pj);
      __m256d sq = _mm256_sqrt_pd(qj);
      __m256d lo = _mm256_loadu_pd(low + j);
      __m256d up = _mm256_loadu_pd(upp + j);
      __m256d num = _mm256_add_pd(_mm256_mul_pd(lo, sp), _mm256_mul_pd(up, sq));
      __m256d xj = _mm256_div_pd(num, _mm256_add_pd(sp, sq));
      xj = _mm256_max_pd(xj, _mm256_loadu_pd(alfa + j));
      xj = _mm256_min_pd(xj, _mm256_loadu_pd(beta + j));
      _mm256_storeu_pd(x + j, xj);
      __m256d t1 = _mm256_div_pd(_mm256_loadu_pd(p1 + j), _mm256_sub_pd(up, xj));
      __m256d t2 = _mm256_div_pd(_mm256_loadu_pd(q1 + j), _mm256_sub_pd(xj, lo));
      racc = _mm256_add_pd(racc, _mm256_add_pd(t1, t2));
    }
    resid = hsum(racc);
    for (; j < n; ++j) {
      const double sp = std::sqrt(p0[j] + lam * p1[j]);
      const double sq = std::sqrt(q0[j] + lam * q1[j]);
      double xj = (low[j] * sp + upp[j] * sq) / (sp + sq);
      xj = std::min(std::max(xj, alfa[j]), beta[j]);
      x[j] = xj;
      resid += p1[j] / (upp[j] - xj) + q1[j] / (xj - low[j]);
    }
  } else {
    for (; j + 4 <= n; j += 4) {
      __m256d sp = _mm256_sqrt_pd(_mm256_loadu_pd(p0 + j));
      __m256d sq = _mm256_sqrt_pd(_mm256_loadu_pd(q0 + j));
      __m256d lo = _mm256_loadu_pd(low + j);
      __m256d up = _mm256_loadu_pd(upp + j);
      __m256d num = _mm256_add_pd(_mm256_mul_pd(lo, sp), _mm256_mul_pd(up, sq));
      __m256d xj = _mm256_div_pd(num, _mm256_add_pd(sp, sq));
      xj = _mm256_max_pd(xj, _mm256_loadu_pd(alfa + j));
      xj = _mm256_min_pd(xj, _mm256_loadu_pd(beta + j));
      _mm256_storeu_pd(x + j, xj);
    }
    for (; j < n; ++j) {
      const double sp = std::sqrt(p0[j]);
      const double sq = std::sqrt(q0[j]);
      double xj = (low[j] * sp + upp[j] * sq) / (sp + sq);
      x[j] = std::min(std::max(xj, alfa[j]), beta[j]);
    }
  }
  return resid;
}

}  // namespace respotopt::kernels::avx2

#endif  // RESPOTOPT_HAVE_AVX2
