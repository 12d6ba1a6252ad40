#include <doctest.h>

#include "chain/kernel.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <random>

using namespace chain;
using doctest::Approx;

namespace {

const double kEuler = boost::math::constants::euler<double>();

// Periodic samples on t_j = -ell + j h.
std::vector<double> grid_t(int n, double ell) {
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j) t[j] = -ell + j * 2.0 * ell / n;
    return t;
}

} // namespace

TEST_CASE("ode_green closed form, symmetry and periodic boundary values") {
    CHECK(std::abs(ode_green(1.0, 1.0, 0.3, 0.7) + 0.080273) < 1e-6);
    CHECK(ode_green(1.0, 1.0, 0.7, 0.3) == ode_green(1.0, 1.0, 0.3, 0.7));
    CHECK(ode_green(1.0, 1.0, -1.0, 0.4) == Approx(ode_green(1.0, 1.0, 1.0, 0.4)).epsilon(1e-14));
    for (double r : {1e-3, 0.5, 3.0, 40.0}) CHECK(ode_green(r, 1.0, 0.1, -0.2) < 0.0);
    CHECK_THROWS(ode_green(0.0, 1.0, 0.0, 0.1));
    // Large 2 ell r: the stable form keeps the value finite and equal to the free-line decay.
    const double r = 2000.0;
    CHECK(std::isfinite(ode_green(r, 1.0, 0.0, 0.0)));
    CHECK(ode_green(r, 1.0, 0.0, 0.0) == Approx(-1.0 / (4 * kPi * r)).epsilon(1e-12));
}

TEST_CASE("ode_green derivative jump at t = s") {
    const double d = 1e-4;
    for (double r : {0.1, 1.0, 10.0}) {
        const double s = 0.25;
        auto g = [&](double t) { return ode_green(r, 1.0, t, s); };
        const double right = (-3.0 * g(s) + 4.0 * g(s + d) - g(s + 2 * d)) / (2 * d);
        const double left = (3.0 * g(s) - 4.0 * g(s - d) + g(s - 2 * d)) / (2 * d);
        CHECK(std::abs(right - 1.0 / (4 * kPi)) < 1e-6);
        CHECK(std::abs(left + 1.0 / (4 * kPi)) < 1e-6);
    }
}

TEST_CASE("ode_apply on a cosine, linearity and grid checks") {
    const int n = 128;
    const auto t = grid_t(n, 1.0);
    std::vector<double> f(n);
    for (int j = 0; j < n; ++j) f[j] = std::cos(kPi * t[j]);
    const auto u = ode_apply(1.0, 1.0, f);
    CHECK(std::abs(u[n / 2] + 0.014643) < 1e-6);
    CHECK(std::abs(u[n / 2] + 1.0 / (2 * kPi * (1 + kPi * kPi))) < 1e-8);

    const auto z = ode_apply(1.0, 1.0, std::vector<double>(n, 0.0));
    for (double v : z) CHECK(v == 0.0);

    std::vector<double> f2(f);
    for (double &v : f2) v *= 2.0;
    const auto u2 = ode_apply(1.0, 1.0, f2);
    for (int j = 0; j < n; ++j) CHECK(u2[j] == 2.0 * u[j]);

    auto bad = t;
    bad[5] += 1e-3;
    CHECK_THROWS(ode_apply(1.0, 1.0, bad, f));
    CHECK_NOTHROW(ode_apply(1.0, 1.0, t, f));
    CHECK_THROWS(ode_apply(0.0, 1.0, f));
}

TEST_CASE("ode_apply residual converges at second order") {
    for (double r : {0.1, 1.0, 10.0}) {
        std::vector<double> res;
        for (int n : {64, 128, 256}) {
            const double ell = 1.0, h = 2.0 * ell / n;
            const auto t = grid_t(n, ell);
            std::vector<double> f(n);
            for (int j = 0; j < n; ++j) f[j] = std::exp(std::sin(kPi * t[j])) + 0.3 * std::cos(3 * kPi * t[j]);
            const auto u = ode_apply(r, ell, f);
            double m = 0.0;
            for (int j = 0; j < n; ++j) {
                const double upp = (u[(j + 1) % n] - 2 * u[j] + u[(j + n - 1) % n]) / (h * h);
                m = std::max(m, std::abs(upp - r * r * u[j] - f[j] / (2 * kPi)));
            }
            res.push_back(m);
        }
        CAPTURE(r);
        CHECK(std::log2(res[0] / res[1]) > 1.9);
        CHECK(std::log2(res[1] / res[2]) > 1.9);
    }
}

TEST_CASE("spectral_kernel agrees with ode_green and is even and periodic") {
    CHECK(spectral_kernel(1.0, 0.4, 1.0) == Approx(ode_green(1.0, 1.0, 0.3, 0.7)).epsilon(1e-14));
    CHECK(spectral_kernel(1.0, -0.4, 1.0) == spectral_kernel(1.0, 0.4, 1.0));
    CHECK(spectral_kernel(1.3, 2.0 - 0.4, 1.0) == Approx(spectral_kernel(1.3, 0.4, 1.0)).epsilon(1e-13));
    CHECK(std::abs(spectral_kernel(20.0, 0.0, 1.0) + 3.97887e-3) < 1e-8);
    CHECK_THROWS(spectral_kernel(0.0, 0.1, 1.0));
}

TEST_CASE("smooth part: analytic constants at ell = 1") {
    // Line average of the kernel over one period is log|x'|/(4 pi ell).
    CHECK(line_average_calibration(1.0) == Approx(std::log(2.0) / (4 * kPi)).epsilon(1e-9));
    CHECK(line_average_calibration(2.5) == Approx(std::log(2.0) / (4 * kPi * 2.5)).epsilon(1e-9));
    CHECK(k2_eval({0, 0, 0}, 1.0) == Approx((2 * std::log(2.0) - kEuler) / (4 * kPi)).epsilon(1e-8));
}

TEST_CASE("smooth part: symmetries and asymptotic ratio") {
    CHECK(k2_eval({2.5, 0, 0}, 1.0) == Approx(k2_eval({0, 2.5, 0}, 1.0)).epsilon(1e-14));
    CHECK(k2_eval({1, 0, 0.3}, 1.0) == Approx(k2_eval({1, 0, -0.3}, 1.0)).epsilon(1e-13));
    const double r3 = k2_eval({1e3, 0, 0}, 1.0) / std::log1p(1e3);
    const double r4 = k2_eval({1e4, 0, 0}, 1.0) / std::log1p(1e4);
    CHECK(std::abs(r3 - r4) / std::abs(r4) < 0.01);
    CHECK(r4 > 0.0);
    // The far field is log|x'|/(4 pi ell) plus the Newtonian correction.
    CHECK(k2_eval({300, 0, 0}, 1.0) == Approx(std::log(300.0) / (4 * kPi) + 1.0 / (4 * kPi * 300.0)).epsilon(1e-9));
}

TEST_CASE("smooth part: derivative decays at large offsets") {
    double prev = 1e300;
    for (double s : {1e2, 1e3, 1e4}) {
        const double d = 0.05 * s;
        const double g = std::abs(k2_eval({s + d, 0, 0}, 1.0) - k2_eval({s - d, 0, 0}, 1.0)) / (2 * d);
        CHECK(g < prev);
        prev = g;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("total kernel near the singularity and at the origin") {
    for (double t : {1e-3, 1e-5}) {
        const KernelValue v = k_eval({t, 0, 0}, 1.0);
        CHECK(v.total * 4 * kPi * t == Approx(-1.0).epsilon(10 * t));
        CHECK(v.k1 == Approx(-1.0 / (4 * kPi * t)).epsilon(1e-15));
    }
    try {
        k_eval({0, 0, 0}, 1.0);
        FAIL("expected SingularOffset");
    } catch (const SingularOffset &e) {
        CHECK(e.k2() == Approx(k2_eval({0, 0, 0}, 1.0)).epsilon(1e-14));
    }
    // Vertical offsets are reduced into [-ell, ell].
    CHECK(k_eval({0.3, 0.2, 1.7}, 1.0).k1 == Approx(-1.0 / (4 * kPi * std::sqrt(0.09 + 0.04 + 0.09))).epsilon(1e-14));
    CHECK(k_eval({0.3, 0.2, 1.7}, 1.0).total == Approx(k_eval({0.3, 0.2, -0.3}, 1.0).total).epsilon(1e-12));
}

TEST_CASE("image sum oracle differs from the Fourier route by one analytic constant") {
    for (double ell : {1.0, 2.0}) {
        const double expect = (kEuler - std::log(4.0 * ell)) / (4 * kPi * ell);
        const double d = image_sum_oracle({1, 0, 0}, ell).value - k_eval({1, 0, 0}, ell).total;
        CHECK(std::abs(d - expect) < 1e-6);
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> diffs;
    for (int n = 0; n < 100; ++n) {
        const double mag = 0.1 * std::pow(500.0, u(rng)), ct = 2 * u(rng) - 1, ph = 2 * kPi * u(rng);
        const double st = std::sqrt(1 - ct * ct);
        const Vec3 x{mag * st * std::cos(ph), mag * st * std::sin(ph), mag * ct};
        diffs.push_back(image_sum_oracle(x, 1.0).value - k_eval(x, 1.0).total);
    }
    double mean = 0, var = 0;
    for (double d : diffs) mean += d / diffs.size();
    for (double d : diffs) var += (d - mean) * (d - mean) / (diffs.size() - 1);
    CHECK(std::sqrt(var) < 1e-6);
}

TEST_CASE("image sum oracle symmetries") {
    const double a = image_sum_oracle({1, 0, 0.5}, 1.0).value;
    CHECK(image_sum_oracle({1, 0, -0.5}, 1.0).value == Approx(a).epsilon(1e-14));
    CHECK(image_sum_oracle({1, 0, 2.0 - 0.5}, 1.0).value == Approx(a).epsilon(1e-12));
    CHECK(image_sum_oracle({1, 0, 0.5}, 1.0).error < 1e-7);
    CHECK_THROWS(image_sum_oracle({0, 0, 2.0}, 1.0));
}

TEST_CASE("translation identity on random triples") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int n = 0; n < 20; ++n) {
        const Vec3 x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)}, z{u(rng), u(rng), u(rng)};
        const Vec3 a{x[0] - z[0] - y[0], x[1] - z[1] - y[1], x[2] - z[2] - y[2]};
        const Vec3 b{x[0] - (y[0] + z[0]), x[1] - (y[1] + z[1]), x[2] - (y[2] + z[2])};
        CHECK(k_eval(a, 1.0).total == Approx(k_eval(b, 1.0).total).epsilon(1e-12));
        CHECK(k_eval(a, 1.0).total == Approx(k_eval({-a[0], -a[1], -a[2]}, 1.0).total).epsilon(1e-12));
    }
}

TEST_CASE("batched Hankel evaluation matches the adaptive single-radius route") {
    const HankelBatch batch(1.0, 8.0, {{0.0, 0.0}, {0.3, 0.3}, {0.2, 0.45}});
    for (double rho : {0.0, 0.7, 3.2, 7.9}) {
        double out[3], err[3];
        const double w = 1.0;
        batch.eval({&rho, 1}, {&w, 1}, out, err);
        CHECK(out[0] == Approx(k2_raw(rho, 0.0, 1.0)).epsilon(1e-9));
        CHECK(out[1] == Approx(k2_raw(rho, 0.3, 1.0)).epsilon(1e-9));
        // Range average against an independent Gauss-Legendre average of point values.
        double avg = 0.0;
        const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
        const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
        for (int q = 0; q < 5; ++q) avg += 0.5 * ws[q] * k2_raw(rho, 0.325 + 0.125 * xs[q], 1.0);
        CHECK(out[2] == Approx(avg).epsilon(1e-8));
        for (double e : err) CHECK(e < 1e-8);
    }
    const QuadResult q = hankel_quadrature(2.0, 0.1, 0.1, 1.0);
    CHECK(q.error < 1e-9);
}

TEST_CASE("cell integrals against tanh-sinh quadrature") {
    boost::math::quadrature::tanh_sinh<double> ts;
    // int over [x0,x1]x[y0,y1]x[0,z1] of 1/r with the z integral done in closed form.
    auto box = [&](double x0, double x1, double y0, double y1, double z1) {
        return ts.integrate([&](double x) {
            return ts.integrate([&](double y) {
                const double rho = std::hypot(x, y);
                return std::asinh(z1 / rho);
            }, y0, y1);
        }, x0, x1);
    };
    CHECK(box_integral_inv_r(0, 1, 0, 1, 0, 1) == Approx(box(0, 1, 0, 1, 1)).epsilon(1e-9));
    CHECK(box_integral_inv_r(-0.5, 0.5, -0.5, 0.5, -0.5, 0.5) == Approx(2.0 * box(0, 1, 0, 1, 1)).epsilon(1e-9));
    CHECK(box_integral_inv_r(0.5, 1.5, -0.3, 0.2, 0, 0.7) == Approx(box(0.5, 1.5, -0.3, 0.2, 0.7)).epsilon(1e-9));
    // Inner integral in closed form: int_0^b log(x^2 + y^2) dy.
    auto col = [](double x, double b) {
        if (b == 0.0) return 0.0;
        return b * std::log(x * x + b * b) - 2.0 * b + (x == 0.0 ? 0.0 : 2.0 * x * std::atan(b / x));
    };
    auto rect = [&](double x0, double x1, double y0, double y1) {
        return ts.integrate([&](double x) { return col(x, y1) - col(x, y0); }, x0, x1);
    };
    CHECK(rect_integral_log_r2(-0.5, 0.5, -0.5, 0.5) == Approx(4.0 * rect(0, 0.5, 0, 0.5)).epsilon(1e-9));
    CHECK(rect_integral_log_r2(1.0, 2.0, 0.5, 1.5) == Approx(rect(1.0, 2.0, 0.5, 1.5)).epsilon(1e-9));
}

TEST_CASE("slab parameters are validated") {
    SlabParams p;
    p.ell = 0.0;
    CHECK_THROWS(p.validate());
    p.ell = 1.0;
    CHECK_NOTHROW(p.validate());
    CHECK(SlabParams::fourier_prefactor == Approx(1.0 / (2 * kPi)));
    CHECK_THROWS(k2_eval({1, 0, 0}, -1.0));
}
