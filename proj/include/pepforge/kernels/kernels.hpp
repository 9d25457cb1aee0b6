#pragma once

#include <cstddef>

namespace pepforge::kernels {

// Flat array kernels behind a runtime-dispatched table. Scalar variants are
// the reference; the AVX2 variants must agree with them (see the kernel
// equivalence tests). All matrices are dense row-major doubles.
//
// gemm computes C = alpha * op(A) * op(B) + beta * C where op(A) is m x k and
// op(B) is k x n. `ta`/`tb` select transposed reads: when ta is true the
// physical A is k x m, likewise B is n x k when tb is true.
struct Ops {
    const char* name;

    void (*gemm)(bool ta, bool tb, int m, int n, int k, double alpha,
                 const double* a, const double* b, double beta, double* c);

    double (*dot)(const double* x, const double* y, int n);
    void (*axpy)(double alpha, const double* x, double* y, int n); // y += alpha*x
    void (*vadd)(const double* x, const double* y, double* out, int n);
    void (*vsub)(const double* x, const double* y, double* out, int n);
    void (*vmul)(const double* x, const double* y, double* out, int n);
    void (*vscale)(double alpha, const double* x, double* out, int n);
    double (*vsum)(const double* x, int n);
    double (*vmax)(const double* x, int n); // n >= 1

    // Wrap radians into [-pi, pi).
    void (*wrap)(const double* x, double* out, int n);
};

// Active table. Chosen once per process: AVX2 when the CPU supports it,
// overridable with PEPFORGE_KERNELS=scalar|avx2.
const Ops& ops();

const Ops& scalar_ops();

// Null when the CPU lacks AVX2.
const Ops* avx2_ops();

bool avx2_supported();

} // namespace pepforge::kernels
