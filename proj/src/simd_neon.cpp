#include "chain/simd.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace chain::simd {
namespace {

double dot_neon(const double *x, const double *y, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
        a1 = vfmaq_f64(a1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(a0, a1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot_neon(const double *w, const double *x, const double *y, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) a0 = vfmaq_f64(a0, vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i)), vld1q_f64(y + i));
    double s = vaddvq_f64(a0);
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

double sum_neon(const double *x, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) a0 = vaddq_f64(a0, vld1q_f64(x + i));
    double s = vaddvq_f64(a0);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_neon(double a, const double *x, double *y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), a));
    for (; i < n; ++i) y[i] += a * x[i];
}

void square_neon(const double *x, double *y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        vst1q_f64(y + i, vmulq_f64(v, v));
    }
    for (; i < n; ++i) y[i] = x[i] * x[i];
}

void cmul_neon(double *y, const double *x, std::size_t n_complex) {
    for (std::size_t i = 0; i < n_complex; ++i) {
        float64x2_t a = vld1q_f64(y + 2 * i);
        float64x2_t b = vld1q_f64(x + 2 * i);
        float64x2_t re = vmulq_laneq_f64(a, b, 0);           // (ar*br, ai*br)
        float64x2_t sw = vextq_f64(a, a, 1);                 // (ai, ar)
        float64x2_t im = vmulq_laneq_f64(sw, b, 1);          // (ai*bi, ar*bi)
        im = vsetq_lane_f64(-vgetq_lane_f64(im, 0), im, 0);  // (-ai*bi, ar*bi)
        vst1q_f64(y + 2 * i, vaddq_f64(re, im));
    }
}

constexpr Ops kNeon{"neon", dot_neon, wdot_neon, sum_neon, axpy_neon, square_neon, cmul_neon};

} // namespace

const Ops *neon_ops() { return &kNeon; }

} // namespace chain::simd

#else

namespace chain::simd {
const Ops *neon_ops() { return nullptr; }
} // namespace chain::simd

#endif
