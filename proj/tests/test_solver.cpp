#include <doctest.h>

#include "chain/config.hpp"
#include "chain/kernel.hpp"
#include "chain/kernel_table.hpp"
#include "chain/solver.hpp"
#include "chain/symmetry.hpp"

#include <cmath>
#include <filesystem>

using namespace chain;
using doctest::Approx;

namespace {

const GridSpec kGrid{6.0, 32, 1.0, 8, false};

const KernelTable &table() {
    static const KernelTable t = build_kernel_table(kGrid);
    return t;
}

SolverConfig config(SolverClass cls) {
    SolverConfig c;
    c.cls = cls;
    c.seed.width = 1.0;
    c.seed.restarts = 1;
    return c;
}

const SolveReport &radial_solution() {
    static const SolveReport r = ground_state(config(SolverClass::radial), PotentialSpec::constant(1.0), table());
    return r;
}

} // namespace

TEST_CASE("radial ground state: convergence, Nehari feasibility, monotone trace") {
    const SolveReport &r = radial_solution();
    CHECK(r.grad_norm < 1e-6);
    CHECK(r.nehari_residual < 1e-10);
    CHECK(r.energy.phi > 0.0);
    CHECK(r.energy.phi == Approx(0.25 * r.energy.norm_a_sq).epsilon(1e-9));
    CHECK(radial_defect(r.u) < 1e-12);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i].phi <= r.trace[i - 1].phi + 64 * 2.2e-16 * std::abs(r.trace[i - 1].phi));
    CHECK(r.cls == "radial");
}

TEST_CASE("radial ground state: independent seeds reach the same level") {
    SolverConfig c = config(SolverClass::radial);
    c.seed.restarts = 2;
    c.seed.perturbation = 0.2;
    c.seed.rng_seed = 99;
    const SolveReport r = ground_state(c, PotentialSpec::constant(1.0), table());
    CHECK(r.energy.phi == Approx(radial_solution().energy.phi).epsilon(1e-6));
    CHECK(r.restart_dispersion < 1e-6);
}

TEST_CASE("ground state is a maximum along its fiber and a pair with its negative") {
    const SolveReport &r = radial_solution();
    const Functional f(table(), std::vector<double>(kGrid.size(), 1.0));
    const double phi = f.energy(r.u).phi;
    for (double t : {0.5, 0.9, 1.1, 2.0}) {
        Field tu(r.u);
        for (double &v : tu.v) v *= t;
        CHECK(phi >= f.energy(tu).phi);
    }
    Field neg(r.u);
    for (double &v : neg.v) v = -v;
    CHECK(f.energy(neg).phi == phi);
    CHECK(residual_report(neg, f) == Approx(residual_report(r.u, f)).epsilon(1e-12));
}

TEST_CASE("residual separates converged and random fields") {
    const Functional f(table(), std::vector<double>(kGrid.size(), 1.0));
    CHECK(residual_report(Field(kGrid), f) == 0.0);
    std::mt19937_64 rng(3);
    const Field u = random_smooth_field(kGrid, rng);
    CHECK(residual_report(u, f) > 1e3 * projected_gradient_norm(radial_solution().u, f, SolverClass::radial));
    CHECK(residual_report(u, f) > 10.0 * residual_report(radial_solution().u, f));
}

TEST_CASE("G-class solution is sigma-invariant with vertical energy") {
    const SolveReport r = ground_state(config(SolverClass::g_invariant), PotentialSpec::constant(1.0), table());
    CHECK(sigma_defect(r.u) < 1e-12);
    CHECK(radial_defect(r.u) < 1e-12);
    CHECK(r.d3_fraction > 0.1);
    CHECK(r.grad_norm < 1e-6);
    CHECK(r.energy.phi >= radial_solution().energy.phi - 1e-9);
}

TEST_CASE("planar ground state and the x3-constant extension") {
    const GridSpec pg = kGrid.plane();
    const PlanarLogTable pt = build_planar_log_table(pg, table().patch);
    const SolveReport p = planar_ground_state(config(SolverClass::planar), PotentialSpec::constant(1.0), pt);
    CHECK(p.grad_norm < 1e-6);
    CHECK(p.energy.phi > 0.0);
    // Extension with an exactly calibrated table: Phi_ell = 2 ell Psi and the Nehari identity carries over.
    KernelTable t = build_kernel_table(kGrid);
    t.set_calibration(line_average_calibration(kGrid.ell));
    const Functional f(t, std::vector<double>(kGrid.size(), 1.0));
    const Field ext = extend_constant(p.u, kGrid);
    const EnergyBreakdown e = f.energy(ext);
    CHECK(e.phi == Approx(2.0 * kGrid.ell * p.energy.phi).epsilon(1e-6));
    CHECK(std::abs(e.norm_a_sq + e.V0) < 1e-8 * e.norm_a_sq);
    // The radial slab level never exceeds the extension level.
    CHECK(radial_solution().energy.phi <= 2.0 * kGrid.ell * p.energy.phi * (1 + 1e-3));
}

TEST_CASE("planar level is stable when the box doubles") {
    SolverConfig c = config(SolverClass::planar);
    const auto level = [&](double L, int n) {
        return planar_ground_state(c, PotentialSpec::constant(1.0), build_planar_log_table(GridSpec::make_planar(L, n), 4)).energy.phi;
    };
    CHECK(level(6.0, 32) == Approx(level(12.0, 64)).epsilon(1e-3));
}

TEST_CASE("solver failures are reported") {
    SolverConfig c = config(SolverClass::radial);
    c.max_iters = 1;
    try {
        ground_state(c, PotentialSpec::constant(1.0), table());
        FAIL("expected SolverError");
    } catch (const SolverError &e) {
        CHECK(!e.trace().empty());
    }
    // Coarse planar cells make the log kernel positive everywhere: no seed reaches the manifold.
    const PlanarLogTable coarse = build_planar_log_table(GridSpec::make_planar(40.0, 8), 4);
    CHECK_THROWS_AS(planar_ground_state(config(SolverClass::planar), PotentialSpec::constant(1.0), coarse), SolverError);
    c = config(SolverClass::radial);
    c.tol_g = -1.0;
    CHECK_THROWS(c.validate());
    c = config(SolverClass::radial);
    c.armijo_factor = 1.5;
    CHECK_THROWS(c.validate());
    CHECK_THROWS(solver_class_from_string("cubic"));
    CHECK(solver_class_from_string("g_invariant") == SolverClass::g_invariant);
}

TEST_CASE("resampling between grids") {
    const GridSpec fine{6.0, 64, 1.0, 16, false};
    const Field u = radial_solution().u;
    CHECK(resample(u, kGrid).v == u.v);
    const Field lin = sample(kGrid, [](double x, double y, double) { return 1.0 + 0.5 * x - 0.25 * y; });
    const Field r = resample(lin, fine);
    for (int i = 8; i < 56; ++i)
        for (int j = 8; j < 56; ++j) CHECK(r(i, j, 3) == Approx(1.0 + 0.5 * fine.x(i) - 0.25 * fine.x(j)).epsilon(1e-12));
    CHECK(r.tag == lin.tag);
}

TEST_CASE("scan helpers") {
    CHECK(scan_nz(0.5, 0.25) == 8);
    CHECK(scan_nz(4.0, 0.25) == 32);
    CHECK(scan_nz(1.1, 0.25) % 2 == 0);
    std::vector<ScanRow> rows(3);
    rows[0] = {0.5, 8, 1.0, 1.2, 0.9, 0.0, 0.3, 0.0, ""};
    rows[1] = {1.0, 8, 1.5, 1.9, 1.8, 0.2, 0.3, 0.0, ""};
    rows[2] = {2.0, 16, 2.0, 2.5, 3.6, 0.4, 0.3, 0.0, ""};
    CHECK(detect_ell_star(rows, 1e-3).value() == 1.0);
    rows[1].c_r = 1.8;
    rows[2].c_r = 3.6;
    CHECK_FALSE(detect_ell_star(rows, 1e-3).has_value());

    ScanResult s;
    s.kappa = 1.25;
    s.rows = rows;
    s.rows[2].error = "quadrature, failed";
    const auto path = (std::filesystem::temp_directory_path() / "chain_test_scan.csv").string();
    write_scan_csv(s, path);
    const auto back = read_scan_csv(path);
    REQUIRE(back.size() == 3);
    CHECK(back[1].c_r == rows[1].c_r);
    CHECK(back[2].error == "quadrature, failed");
    CHECK(back[0].nz == 8);
    std::filesystem::remove(path);
}

TEST_CASE("small ell scan respects the extension bound") {
    ScanOptions o;
    o.L = 6.0;
    o.nx = 32;
    o.hz_target = 0.25;
    int calls = 0;
    o.on_row = [&](const ScanRow &) { ++calls; };
    SolverConfig c = config(SolverClass::radial);
    const ScanResult s = ell_scan({0.5}, c, PotentialSpec::constant(1.0), o);
    REQUIRE(s.rows.size() == 1);
    CHECK(calls == 1);
    CHECK(s.rows[0].error.empty());
    CHECK(s.rows[0].c_r <= s.rows[0].two_ell_kappa + 1e-6);
    CHECK(s.rows[0].c_r <= s.rows[0].c_G + 1e-6);
    // Resume: a finished row is not recomputed.
    o.done = s.rows;
    calls = 0;
    const ScanResult again = ell_scan({0.5}, c, PotentialSpec::constant(1.0), o);
    CHECK(calls == 0);
    CHECK(again.rows[0].c_r == s.rows[0].c_r);
}

TEST_CASE("configuration parsing") {
    const Config c = parse_config(
        "[domain]\nL = 6\nnx = 32\nell = 1.5\nnz = 12\n"
        "[potential]\ntype = well\na0 = 1.5\ndepth = 0.5\nwidth = 3\n"
        "[solver]\nclass = g_invariant\ntol_g = 1e-7\nflat_restart = true\n"
        "[scan]\nells = 0.5, 1, 2\n");
    CHECK(c.has_grid);
    CHECK(c.grid == GridSpec{6.0, 32, 1.5, 12, false});
    CHECK(c.solver.cls == SolverClass::g_invariant);
    CHECK(c.solver.tol_g == 1e-7);
    CHECK(c.solver.seed.flat_restart);
    CHECK(c.scan.ells == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(c.potential.build().a_min == Approx(1.0));

    CHECK_FALSE(parse_config("[solver]\nmax_iters = 10\n").has_grid);
    CHECK_THROWS_AS(require_grid(parse_config("")), ConfigError);
    try {
        parse_config("[domain]\nL = 6\nnx = 32\nnz = 8\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("domain.ell") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[domain]\nL = 6\nnx = 32\nell = 1\nnz = 8\nfoo = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[colour]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\ntol_g = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[potential]\ntype = constant\na0 = 0\n").potential.build(), ConfigError);
    CHECK_THROWS_AS(parse_config("[domain]\nL = 6\nnx = 31\nell = 1\nnz = 8\n"), ConfigError);
}
