// AVX2 + FMA kernel variants. Compiled with per-function target attributes so
// the translation unit stays buildable on a baseline x86-64 toolchain; the
// dispatcher only hands these out when the CPU reports AVX2.
#include "pepforge/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PEPFORGE_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define PEPFORGE_HAVE_AVX2_BUILD 0
#endif

#include <algorithm>
#include <cmath>

namespace pepforge::kernels {

#if PEPFORGE_HAVE_AVX2_BUILD

#define PF_AVX2 __attribute__((target("avx2,fma")))

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

PF_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// C[i,:] += r * B[p,:] inner update, vectorized over columns.
PF_AVX2 inline void row_axpy(double r, const double* src, double* dst, int n) {
    __m256d rv = _mm256_set1_pd(r);
    int j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d b = _mm256_loadu_pd(src + j);
        __m256d cvec = _mm256_loadu_pd(dst + j);
        _mm256_storeu_pd(dst + j, _mm256_fmadd_pd(rv, b, cvec));
    }
    for (; j < n; ++j) dst[j] += r * src[j];
}

PF_AVX2 double dot_avx2(const double* x, const double* y, int n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

PF_AVX2 void gemm_avx2(bool ta, bool tb, int m, int n, int k, double alpha,
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
                row_axpy(r, b + static_cast<size_t>(p) * n, c + static_cast<size_t>(i) * n, n);
            }
        }
    } else if (!ta && tb) {
        for (int i = 0; i < m; ++i) {
            const double* arow = a + static_cast<size_t>(i) * k;
            double* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                crow[j] += alpha * dot_avx2(arow, b + static_cast<size_t>(j) * k, k);
            }
        }
    } else if (ta && !tb) {
        for (int p = 0; p < k; ++p) {
            const double* arow = a + static_cast<size_t>(p) * m;
            const double* brow = b + static_cast<size_t>(p) * n;
            for (int i = 0; i < m; ++i) {
                row_axpy(alpha * arow[i], brow, c + static_cast<size_t>(i) * n, n);
            }
        }
    } else {
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

PF_AVX2 void axpy_avx2(double alpha, const double* x, double* y, int n) {
    row_axpy(alpha, x, y, n);
}

PF_AVX2 void vadd_avx2(const double* x, const double* y, double* out, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

PF_AVX2 void vsub_avx2(const double* x, const double* y, double* out, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

PF_AVX2 void vmul_avx2(const double* x, const double* y, double* out, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

PF_AVX2 void vscale_avx2(double alpha, const double* x, double* out, int n) {
    __m256d av = _mm256_set1_pd(alpha);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) out[i] = alpha * x[i];
}

PF_AVX2 double vsum_avx2(const double* x, int n) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

PF_AVX2 double vmax_avx2(const double* x, int n) {
    if (n < 4) {
        double m = x[0];
        for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
        return m;
    }
    __m256d acc = _mm256_loadu_pd(x);
    int i = 4;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

// Same formula as the scalar kernel; mul/sub kept separate (no FMA) so the
// two variants round identically.
PF_AVX2 void wrap_avx2(const double* x, double* out, int n) {
    const __m256d pi = _mm256_set1_pd(kPi);
    const __m256d two_pi = _mm256_set1_pd(kTwoPi);
    const __m256d inv_two_pi = _mm256_set1_pd(1.0 / kTwoPi);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d t = _mm256_mul_pd(_mm256_add_pd(v, pi), inv_two_pi);
        __m256d r = _mm256_sub_pd(v, _mm256_mul_pd(_mm256_floor_pd(t), two_pi));
        __m256d too_high = _mm256_cmp_pd(r, pi, _CMP_GE_OQ);
        r = _mm256_sub_pd(r, _mm256_and_pd(too_high, two_pi));
        __m256d too_low = _mm256_cmp_pd(r, _mm256_sub_pd(_mm256_setzero_pd(), pi), _CMP_LT_OQ);
        r = _mm256_add_pd(r, _mm256_and_pd(too_low, two_pi));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) {
        double t = (x[i] + kPi) * (1.0 / kTwoPi);
        double r = x[i] - std::floor(t) * kTwoPi;
        if (r >= kPi) r -= kTwoPi;
        if (r < -kPi) r += kTwoPi;
        out[i] = r;
    }
}

} // namespace

const Ops* avx2_ops() {
    static const Ops table = {
        "avx2",    gemm_avx2, dot_avx2,  axpy_avx2, vadd_avx2, vsub_avx2,
        vmul_avx2, vscale_avx2, vsum_avx2, vmax_avx2, wrap_avx2,
    };
    return &table;
}

#else // !PEPFORGE_HAVE_AVX2_BUILD

const Ops* avx2_ops() { return nullptr; }

#endif

} // namespace pepforge::kernels
