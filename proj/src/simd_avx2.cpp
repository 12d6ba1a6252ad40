// Compiled with -mavx2 -mfma; only reached after a cpuid check.
#include "chain/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace chain::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double *x, const double *y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
    }
    for (; i + 4 <= n; i += 4) a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot_avx2(const double *w, const double *x, const double *y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(x + i + 4));
        a0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(y + i + 4), a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

double sum_avx2(const double *x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_avx2(double a, const double *x, double *y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void square_avx2(const double *x, double *y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_mul_pd(v, v));
    }
    for (; i < n; ++i) y[i] = x[i] * x[i];
}

void cmul_avx2(double *y, const double *x, std::size_t n_complex) {
    std::size_t i = 0;
    for (; i + 2 <= n_complex; i += 2) {
        __m256d a = _mm256_loadu_pd(y + 2 * i);
        __m256d b = _mm256_loadu_pd(x + 2 * i);
        __m256d b_re = _mm256_movedup_pd(b);
        __m256d b_im = _mm256_permute_pd(b, 0xF);
        __m256d a_sw = _mm256_permute_pd(a, 0x5);
        _mm256_storeu_pd(y + 2 * i, _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im)));
    }
    for (; i < n_complex; ++i) {
        const double ar = y[2 * i], ai = y[2 * i + 1];
        const double br = x[2 * i], bi = x[2 * i + 1];
        y[2 * i] = ar * br - ai * bi;
        y[2 * i + 1] = ar * bi + ai * br;
    }
}

constexpr Ops kAvx2{"avx2", dot_avx2, wdot_avx2, sum_avx2, axpy_avx2, square_avx2, cmul_avx2};

} // namespace

const Ops *avx2_ops() {
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &kAvx2 : nullptr;
}

} // namespace chain::simd

#else

namespace chain::simd {
const Ops *avx2_ops() { return nullptr; }
} // namespace chain::simd

#endif
