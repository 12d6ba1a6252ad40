#pragma once

#include <cmath>
#include <cstddef>

// Inner-loop kernels with a scalar reference implementation and vector
// variants chosen once at runtime. Complex arrays are interleaved (re, im).
namespace chain::simd {

struct Ops {
    const char *name;
    double (*dot)(const double *x, const double *y, std::size_t n);
    double (*wdot)(const double *w, const double *x, const double *y, std::size_t n);
    double (*sum)(const double *x, std::size_t n);
    void (*axpy)(double a, const double *x, double *y, std::size_t n);
    void (*square)(const double *x, double *y, std::size_t n);
    void (*cmul)(double *y, const double *x, std::size_t n_complex);
};

const Ops &scalar_ops();
// nullptr when the variant is not compiled in or the CPU lacks it.
const Ops *avx2_ops();
const Ops *neon_ops();

// Best available variant; CHAIN_SIMD=scalar forces the reference path.
const Ops &active();

// Neumaier-compensated accumulator for combining partial sums.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// Reductions run the kernel over fixed blocks and combine the block sums with compensation,
// so rounding noise grows with the block length, not the array length.
inline constexpr std::size_t kReduceBlock = 4096;

template <class F> double blocked(std::size_t n, F &&kernel) {
    CompensatedSum acc;
    for (std::size_t o = 0; o < n; o += kReduceBlock) acc.add(kernel(o, n - o < kReduceBlock ? n - o : kReduceBlock));
    return acc.value();
}

inline double dot(const double *x, const double *y, std::size_t n) {
    const Ops &ops = active();
    return blocked(n, [&](std::size_t o, std::size_t m) { return ops.dot(x + o, y + o, m); });
}
inline double wdot(const double *w, const double *x, const double *y, std::size_t n) {
    const Ops &ops = active();
    return blocked(n, [&](std::size_t o, std::size_t m) { return ops.wdot(w + o, x + o, y + o, m); });
}
inline double sum(const double *x, std::size_t n) {
    const Ops &ops = active();
    return blocked(n, [&](std::size_t o, std::size_t m) { return ops.sum(x + o, m); });
}
inline void axpy(double a, const double *x, double *y, std::size_t n) { active().axpy(a, x, y, n); }
inline void square(const double *x, double *y, std::size_t n) { active().square(x, y, n); }
inline void cmul(double *y, const double *x, std::size_t n_complex) { active().cmul(y, x, n_complex); }

} // namespace chain::simd
