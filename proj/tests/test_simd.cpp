#include <doctest.h>

#include "chain/simd.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace chain;

namespace {

std::vector<const simd::Ops *> variants() {
    std::vector<const simd::Ops *> v{&simd::scalar_ops()};
    if (const auto *a = simd::avx2_ops()) v.push_back(a);
    if (const auto *n = simd::neon_ops()) v.push_back(n);
    return v;
}

std::vector<double> randv(std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double &x : v) x = d(rng);
    return v;
}

} // namespace

TEST_CASE("vector variants agree with the scalar reference") {
    const simd::Ops &ref = simd::scalar_ops();
    std::mt19937_64 rng(11);
    for (const simd::Ops *ops : variants()) {
        CAPTURE(ops->name);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 64u, 1000u, 1027u}) {
            CAPTURE(n);
            const auto x = randv(n, rng), y = randv(n, rng), w = randv(n, rng);
            double mag = 0.0;
            for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
            CHECK(std::abs(ops->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <= 1e-14 * (mag + 1e-300));
            CHECK(std::abs(ops->wdot(w.data(), x.data(), y.data(), n) - ref.wdot(w.data(), x.data(), y.data(), n)) <=
                  1e-14 * (mag + 1e-300));
            double smag = 0.0;
            for (double v : x) smag += std::abs(v);
            CHECK(std::abs(ops->sum(x.data(), n) - ref.sum(x.data(), n)) <= 1e-14 * (smag + 1e-300));

            std::vector<double> y1 = y, y2 = y;
            ops->axpy(0.37, x.data(), y1.data(), n);
            ref.axpy(0.37, x.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 4e-16 * (std::abs(y2[i]) + 1.0));

            std::vector<double> s1(n), s2(n);
            ops->square(x.data(), s1.data(), n);
            ref.square(x.data(), s2.data(), n);
            CHECK(s1 == s2);

            const auto a = randv(2 * n, rng), b = randv(2 * n, rng);
            std::vector<double> c1 = a, c2 = a;
            ops->cmul(c1.data(), b.data(), n);
            ref.cmul(c2.data(), b.data(), n);
            for (std::size_t i = 0; i < 2 * n; ++i) CHECK(std::abs(c1[i] - c2[i]) <= 1e-15 * 4.0);
        }
    }
}

TEST_CASE("complex multiply matches std::complex") {
    const double a[4] = {1.0, 2.0, -0.5, 0.25}, b[4] = {3.0, -1.0, 2.0, 4.0};
    for (const simd::Ops *ops : variants()) {
        double y[4] = {a[0], a[1], a[2], a[3]};
        ops->cmul(y, b, 2);
        CHECK(y[0] == doctest::Approx(5.0));
        CHECK(y[1] == doctest::Approx(5.0));
        CHECK(y[2] == doctest::Approx(-2.0));
        CHECK(y[3] == doctest::Approx(-1.5));
    }
}

TEST_CASE("active variant is one of the compiled variants") {
    const simd::Ops &act = simd::active();
    bool found = false;
    for (const simd::Ops *ops : variants()) found = found || ops == &act;
    CHECK(found);
}
