#include "pepforge/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace pepforge::kernels {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

void gemm_scalar(bool ta, bool tb, int m, int n, int k, double alpha,
                 const double* a, const double* b, double beta, double* c) {
    if (beta == 0.0) {
        std::fill(c, c + static_cast<size_t>(m) * n, 0.0);
    } else if (beta != 1.0) {
        for (int i = 0; i < m * n; ++i) c[i] *= beta;
    }
    if (!ta && !tb) {
        for (int i = 0; i < m; ++i) {
            for (int p = 0; p < k; ++p) {
                double r = alpha * a[static_cast<size_t>(i) * k + p];
                const double* brow = b + static_cast<size_t>(p) * n;
                double* crow = c + static_cast<size_t>(i) * n;
                for (int j = 0; j < n; ++j) crow[j] += r * brow[j];
            }
        }
    } else if (!ta && tb) {
        // op(B)[p][j] = B[j][p], B physical n x k
        for (int i = 0; i < m; ++i) {
            const double* arow = a + static_cast<size_t>(i) * k;
            double* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                const double* brow = b + static_cast<size_t>(j) * k;
                double acc = 0.0;
                for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
                crow[j] += alpha * acc;
            }
        }
    } else if (ta && !tb) {
        // op(A)[i][p] = A[p][i], A physical k x m
        for (int p = 0; p < k; ++p) {
            const double* arow = a + static_cast<size_t>(p) * m;
            const double* brow = b + static_cast<size_t>(p) * n;
            for (int i = 0; i < m; ++i) {
                double r = alpha * arow[i];
                double* crow = c + static_cast<size_t>(i) * n;
                for (int j = 0; j < n; ++j) crow[j] += r * brow[j];
            }
        }
    } else {
        // A physical k x m, B physical n x k
        for (int i = 0; i < m; ++i) {
            double* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                const double* brow = b + static_cast<size_t>(j) * k;
                double acc = 0.0;
                for (int p = 0; p < k; ++p) acc += a[static_cast<size_t>(p) * m + i] * brow[p];
                crow[j] += alpha * acc;
            }
        }
    }
}

double dot_scalar(const double* x, const double* y, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void vadd_scalar(const double* x, const double* y, double* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void vsub_scalar(const double* x, const double* y, double* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void vmul_scalar(const double* x, const double* y, double* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void vscale_scalar(double alpha, const double* x, double* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = alpha * x[i];
}

double vsum_scalar(const double* x, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double vmax_scalar(const double* x, int n) {
    double m = x[0];
    for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

void wrap_scalar(const double* x, double* out, int n) {
    for (int i = 0; i < n; ++i) {
        double t = (x[i] + kPi) * (1.0 / kTwoPi);
        double r = x[i] - std::floor(t) * kTwoPi;
        if (r >= kPi) r -= kTwoPi;
        if (r < -kPi) r += kTwoPi;
        out[i] = r;
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops table = {
        "scalar",    gemm_scalar, dot_scalar,  axpy_scalar, vadd_scalar, vsub_scalar,
        vmul_scalar, vscale_scalar, vsum_scalar, vmax_scalar, wrap_scalar,
    };
    return table;
}

} // namespace pepforge::kernels
