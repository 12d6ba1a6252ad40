#include <doctest.h>

#include "chain/kernel.hpp"
#include "chain/kernel_table.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace chain;
using doctest::Approx;

namespace {

const GridSpec kSmall{6.0, 32, 1.0, 16, false};

const KernelTable &small_table() {
    static const KernelTable t = build_kernel_table(kSmall);
    return t;
}

} // namespace

TEST_CASE("zero offset singular entry is the cell average of -1/(4 pi r)") {
    const KernelTable &t = small_table();
    const double hx = kSmall.hx(), hz = kSmall.hz();
    // Independent route: corner-singular tanh-sinh over one octant with the z integral in closed form.
    boost::math::quadrature::tanh_sinh<double> ts;
    const double oct = ts.integrate([&](double x) {
        return ts.integrate([&](double y) { return std::asinh(0.5 * hz / std::hypot(x, y)); }, 0.0, 0.5 * hx);
    }, 0.0, 0.5 * hx);
    const double avg = -8.0 * oct / (4 * kPi * hx * hx * hz);
    CHECK(t.k1.at(0, 0, 0) == Approx(avg).epsilon(1e-10));
}

TEST_CASE("table entries are symmetric under offset negation") {
    const KernelTable &t = small_table();
    double worst = 0.0;
    for (int di = -kSmall.nx + 1; di < kSmall.nx; ++di)
        for (int dj = -kSmall.nx + 1; dj < kSmall.nx; ++dj)
            for (int dk = 0; dk < kSmall.nz; ++dk)
                worst = std::max(worst, std::abs(t.total.at(di, dj, dk) - t.total.at(-di, -dj, -dk)));
    CHECK(worst == 0.0);
}

TEST_CASE("metadata: positivity beyond the crossover radius and growth bounds") {
    const KernelTable &t = small_table();
    const double hx = kSmall.hx(), hz = kSmall.hz();
    CHECK(t.meta.crossover_R > 0.0);
    CHECK(t.meta.crossover_R < kSmall.L);
    for (int a = 0; a < kSmall.nx; ++a)
        for (int b = 0; b <= a; ++b)
            for (int k = 0; k <= kSmall.nz / 2; ++k) {
                const double tk = 2 * k == kSmall.nz ? kSmall.ell : k * hz;
                const double r = std::sqrt(a * a * hx * hx + b * b * hx * hx + tk * tk);
                if (r < t.meta.crossover_R) continue;
                CHECK(t.total.at(a, b, k) > 0.0);
                const double ratio = t.k2.at(a, b, k) / std::log1p(r);
                CHECK(ratio <= t.meta.C_K);
                CHECK(ratio >= 1.0 / t.meta.C_K);
            }
    CHECK(std::isfinite(t.meta.sup_abs_k2_below_R));
    // Far-field slope of the smooth part is 1/(4 pi ell).
    CHECK(t.meta.fit_slope == Approx(1.0 / (4 * kPi)).epsilon(0.05));
    CHECK(t.meta.quad_error < 1e-8);
}

TEST_CASE("calibration from the collapse matches the line-average constant") {
    const KernelTable &t = small_table();
    CHECK(std::abs(t.calibration - line_average_calibration(1.0)) < 1e-3);
    CHECK(t.meta.calibration_spread < 1e-3);
    // Already calibrated: the collapse returns the same constant.
    CHECK(collapse_calibration(t) == Approx(t.calibration).epsilon(1e-10));
}

TEST_CASE("entries outside the patch are point values of the kernel") {
    const KernelTable &t = small_table();
    const double hx = kSmall.hx(), hz = kSmall.hz();
    for (auto [a, b, k] : {std::array<int, 3>{7, 2, 3}, {12, 0, 0}, {20, 13, 8}, {-9, 5, -2}}) {
        const Vec3 x{a * hx, b * hx, k * hz};
        CHECK(t.total.at(a, b, k) == Approx(k_eval(x, 1.0, t.calibration).total).epsilon(1e-8));
    }
}

TEST_CASE("vertical sums of the table reproduce the planar log table") {
    const KernelTable &t = small_table();
    const PlanarLogTable pt = build_planar_log_table(kSmall.plane(), t.patch);
    // The calibration is a fitted constant; remove its offset from the exact line-average value.
    const double shift = 2.0 * kSmall.ell * (t.calibration - line_average_calibration(kSmall.ell));
    double worst_patch = 0.0, worst_far = 0.0;
    for (int a = 0; a < kSmall.nx; ++a)
        for (int b = 0; b <= a; ++b) {
            double s = 0.0;
            for (int k = 0; k < kSmall.nz; ++k) s += t.total.at(a, b, k) * kSmall.hz();
            const double d = std::abs(s - shift - pt.at(a, b));
            double &w = a <= t.patch ? worst_patch : worst_far;
            w = std::max(w, d);
        }
    CHECK(worst_patch < 1e-9);
    CHECK(worst_far < 1e-9);
}

TEST_CASE("memory estimate rejects oversized tables before allocating") {
    KernelTableOptions opt;
    opt.mem_limit_mb = 1.0;
    CHECK_THROWS_AS(build_kernel_table(GridSpec{12.0, 256, 1.0, 64, false}, opt), std::length_error);
    CHECK(kernel_table_bytes(GridSpec{12.0, 256, 1.0, 64, false}) > kernel_table_bytes(kSmall));
}

TEST_CASE("kernel dump round trip") {
    const KernelTable &t = small_table();
    const auto path = (std::filesystem::temp_directory_path() / "chain_test_kernel.bin").string();
    dump_kernel(t, path);
    {
        std::ifstream is(path, std::ios::binary);
        char magic[5];
        is.read(magic, 5);
        CHECK(std::string(magic, 5) == "CHNK1");
    }
    const KernelTable u = load_kernel(path);
    CHECK(u.grid == t.grid);
    CHECK(u.patch == t.patch);
    CHECK(u.calibration == t.calibration);
    CHECK(u.total.values == t.total.values);
    CHECK(u.k1.values == t.k1.values);
    CHECK(u.meta.crossover_R == t.meta.crossover_R);
    std::ofstream(path, std::ios::binary) << "CHNK0";
    CHECK_THROWS(load_kernel(path));
    std::filesystem::remove(path);
}

TEST_CASE("planar log table: cell average at the origin") {
    const GridSpec pg = GridSpec::make_planar(6.0, 32);
    const PlanarLogTable pt = build_planar_log_table(pg, 4);
    const double h = pg.hx();
    boost::math::quadrature::tanh_sinh<double> ts;
    const double b = 0.5 * h;
    // int_0^b log(x^2 + y^2) dy in closed form, then tanh-sinh in x.
    const double q = ts.integrate([&](double x) {
        return 0.5 * (b * std::log(x * x + b * b) - 2.0 * b + 2.0 * x * std::atan(b / x));
    }, 0.0, b);
    CHECK(pt.at(0, 0) == Approx(4.0 * q / (h * h) / (2 * kPi)).epsilon(1e-10));
    CHECK(pt.at(9, 3) == Approx(std::log(std::hypot(9 * h, 3 * h)) / (2 * kPi)).epsilon(1e-14));
    CHECK_THROWS(build_planar_log_table(kSmall, 4));
}
