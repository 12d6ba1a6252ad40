#include "chain/simd.hpp"

namespace chain::simd {
namespace {

double dot_ref(const double *x, const double *y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot_ref(const double *w, const double *x, const double *y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

double sum_ref(const double *x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

void axpy_ref(double a, const double *x, double *y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void square_ref(const double *x, double *y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
}

void cmul_ref(double *y, const double *x, std::size_t n_complex) {
    for (std::size_t i = 0; i < n_complex; ++i) {
        const double ar = y[2 * i], ai = y[2 * i + 1];
        const double br = x[2 * i], bi = x[2 * i + 1];
        y[2 * i] = ar * br - ai * bi;
        y[2 * i + 1] = ar * bi + ai * br;
    }
}

constexpr Ops kScalar{"scalar", dot_ref, wdot_ref, sum_ref, axpy_ref, square_ref, cmul_ref};

} // namespace

const Ops &scalar_ops() { return kScalar; }

} // namespace chain::simd
