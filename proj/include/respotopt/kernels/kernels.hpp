#pragma once
// Runtime-dispatched arithmetic kernels for the hot inner loops: filter
// matvecs, per-element energy forms, and the MMA dual evaluation.
// A scalar reference implementation always exists; SIMD variants are
// selected at startup from CPU capabilities (override with set_backend()
// or the RESPOTOPT_SIMD env var: "scalar", "avx2", "auto").

namespace respotopt::kernels {

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Active backend is resolved once from RESPOTOPT_SIMD / cpuid on first use.
Backend active_backend();
// Explicit override (used by the equivalence tests). Throws if unsupported.
void set_backend(Backend b);

// y[r] = sum over row r of vals[k] * x[cols[k]], CSR layout with int32 indices.
void csr_matvec(int n_rows, const int* row_ptr, const int* cols,
                const double* vals, const double* x, double* y);

// out[e] = a_e' * M * b_e for packed element vectors; M is row-major 8x8,
// a and b hold n_elems contiguous blocks of 8 doubles.
void bilinear_form8(int n_elems, const double* M, const double* a,
                    const double* b, double* out);

// out[e] = v . b_e with a fixed 8-vector v.
void dot8(int n_elems, const double* v, const double* b, double* out);

// Primal evaluation of the separable MMA subproblem at multiplier lam
// (single constraint). For each variable j:
//   pj = p0[j] + lam*p1[j], qj = q0[j] + lam*q1[j]   (p1/q1 may be null)
//   xj = clamp((low[j]*sqrt(pj) + upp[j]*sqrt(qj)) / (sqrt(pj)+sqrt(qj)),
//              alfa[j], beta[j])
// Writes x and returns sum_j p1[j]/(upp[j]-xj) + q1[j]/(xj-low[j])
// (0 when p1/q1 are null).
double mma_eval(int n, const double* p0, const double* q0, const double* p1,
                const double* q1, const double* low, const double* upp,
                const double* alfa, const double* beta, double lam, double* x);

}  // namespace respotopt::kernels
