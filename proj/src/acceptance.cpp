#include "chain/acceptance.hpp"

#include "chain/kernel.hpp"
#include "chain/poisson.hpp"
#include "chain/solver.hpp"
#include "chain/symmetry.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace chain {

namespace {

// Tolerances, pinned.
constexpr double kA1MaxErr = 1e-8;
constexpr double kA1MinOrder = 1.9;
constexpr double kA1JumpTol = 1e-6;
constexpr double kA2MaxDev = 1e-6;
constexpr double kA3Tol = 1e-12;
constexpr double kA4MaxSpread = 0.01;
constexpr double kA5MaxRel = 1e-3;
constexpr double kA6MaxRel = 0.02;
constexpr double kA7MaxRel = 1e-10;
constexpr double kA8MaxRel = 1e-5;
constexpr double kA8Eps = 1e-5;
constexpr double kA9TolG = 1e-6;
constexpr double kA9Nehari = 1e-10;
constexpr double kA9Dispersion = 1e-6;
constexpr double kA9MinOrder = 1.8;
constexpr double kA10Slack = 1e-6;
constexpr double kA10Margin = 1e-3;
constexpr double kA10MinD3 = 0.1;

const GridSpec kReference{12.0, 64, 1.0, 32, false};

struct Ctx {
    explicit Ctx(CriterionResult &res) : r(res) {}

    CriterionResult &r;
    std::ostringstream msg;
    bool ok = true;

    void metric(const std::string &k, double v) { r.metrics.emplace_back(k, v); }
    // Records a sub-check; returns its outcome.
    bool check(bool cond, const std::string &what) {
        if (!cond) {
            ok = false;
            msg << (msg.tellp() > 0 ? "; " : "") << "failed: " << what;
        }
        return cond;
    }
};

// Compact label for a scanned parameter.
std::string label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << std::scientific << v;
    return os.str();
}

// A1: periodic ODE Green operator.
void a1(Ctx &c) {
    const double ell = 1.0;
    double worst256 = 0.0, worst_order = 1e300;
    for (double r : {0.1, 1.0, 10.0}) {
        std::vector<double> errs;
        for (int n : {64, 128, 256}) {
            std::vector<double> f(n);
            const double h = 2.0 * ell / n;
            for (int j = 0; j < n; ++j) f[j] = std::cos(kPi * (-ell + j * h) / ell);
            const auto u = ode_apply(r, ell, f);
            const double denom = 2.0 * kPi * (kPi * kPi / (ell * ell) + r * r);
            double e = 0.0;
            for (int j = 0; j < n; ++j) e = std::max(e, std::abs(u[j] + f[j] / denom));
            errs.push_back(e);
        }
        worst256 = std::max(worst256, errs[2]);
        for (int m = 0; m + 1 < 3; ++m) {
            // Errors at the rounding floor carry no order information.
            if (errs[m + 1] < 1e-14) continue;
            worst_order = std::min(worst_order, std::log2(errs[m] / errs[m + 1]));
        }
    }
    if (worst_order > 1e299) worst_order = 99.0;
    double jump_err = 0.0;
    const double d = 1e-4;
    for (double r : {0.1, 1.0, 10.0})
        for (double s : {-0.6, 0.0, 0.35}) {
            auto g = [&](double t) { return ode_green(r, ell, t, s); };
            const double right = (-3.0 * g(s) + 4.0 * g(s + d) - g(s + 2 * d)) / (2 * d);
            const double left = (3.0 * g(s) - 4.0 * g(s - d) + g(s - 2 * d)) / (2 * d);
            jump_err = std::max({jump_err, std::abs(right - 1.0 / (4 * kPi)), std::abs(left + 1.0 / (4 * kPi))});
        }
    c.metric("max_err_N256", worst256);
    c.metric("min_order", worst_order);
    c.metric("jump_err", jump_err);
    c.check(worst256 < kA1MaxErr, "max error at N=256 " + fmt(worst256));
    c.check(worst_order >= kA1MinOrder, "order " + fmt(worst_order));
    c.check(jump_err < kA1JumpTol, "derivative jump " + fmt(jump_err));
}

// A2: Fourier route against the image sum.
void a2(Ctx &c) {
    const double ell = 1.0;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> diff;
    double worst_oracle = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double mag = 0.1 * std::pow(500.0, u01(rng));
        const double ct = 2.0 * u01(rng) - 1.0, ph = 2.0 * kPi * u01(rng), st = std::sqrt(1.0 - ct * ct);
        const Vec3 x{mag * st * std::cos(ph), mag * st * std::sin(ph), mag * ct};
        const double k = k_eval(x, ell).total;
        const ImageSum s = image_sum_oracle(x, ell);
        worst_oracle = std::max(worst_oracle, s.error);
        diff.push_back(k - s.value);
    }
    const auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
    const double shift = 0.5 * (*lo + *hi), dev = 0.5 * (*hi - *lo);
    c.metric("max_deviation", dev);
    c.metric("best_fit_constant", shift);
    c.metric("oracle_error", worst_oracle);
    c.check(dev < kA2MaxDev, "deviation " + fmt(dev));
}

// A3: table symmetry and translation invariance, lookup and convolution paths.
void a3(Ctx &c) {
    const GridSpec g = kReference;
    const KernelTable t = build_kernel_table(g);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> px(0, g.nx - 1), pz(0, g.nz - 1);
    double scale = 0.0;
    for (double v : t.total.values) scale = std::max(scale, std::abs(v));
    auto K = [&](std::array<int, 3> x, std::array<int, 3> y) { return t.total.at(x[0] - y[0], x[1] - y[1], x[2] - y[2]); };
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        std::array<int, 3> x{px(rng), px(rng), pz(rng)}, y{px(rng), px(rng), pz(rng)}, z{px(rng) / 2 - g.nx / 4, px(rng) / 2 - g.nx / 4, pz(rng)};
        std::array<int, 3> yz{y[0] + z[0], y[1] + z[1], (y[2] + z[2]) % g.nz}, xz{x[0] - z[0], x[1] - z[1], ((x[2] - z[2]) % g.nz + g.nz) % g.nz};
        worst = std::max(worst, std::abs(K(x, y) - K(y, x)));
        worst = std::max(worst, std::abs(K(x, yz) - K(xz, y)));
    }
    // Through the FFT path: K[delta_y](x) against K[delta_x](y).
    double worst_fft = 0.0;
    std::vector<std::array<int, 3>> pts;
    for (int n = 0; n < 5; ++n) pts.push_back({px(rng), px(rng), pz(rng)});
    std::vector<Field> resp;
    for (const auto &p : pts) {
        Field d(g);
        d(p[0], p[1], p[2]) = 1.0 / g.dV();
        resp.push_back(apply_green(d, t));
    }
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = 0; b < pts.size(); ++b) {
            const double kab = resp[b](pts[a][0], pts[a][1], pts[a][2]);
            const double kba = resp[a](pts[b][0], pts[b][1], pts[b][2]);
            worst_fft = std::max({worst_fft, std::abs(kab - kba), std::abs(kab - K(pts[a], pts[b]))});
        }
    c.metric("lookup_rel", worst / scale);
    c.metric("fft_rel", worst_fft / scale);
    c.check(worst / scale < kA3Tol, "lookup symmetry " + fmt(worst / scale));
    c.check(worst_fft / scale < kA3Tol, "convolution symmetry " + fmt(worst_fft / scale));
}

// A4: logarithmic growth of the smooth part.
void a4(Ctx &c) {
    const double ell = 1.0;
    const std::array<std::array<double, 2>, 3> dirs{{{0.0, 0.0}, {kPi / 5, 0.5 * ell}, {kPi / 3, ell}}};
    double lo = 1e300, hi = -1e300, sum = 0.0, min_slope = 1e300;
    for (const auto &d : dirs) {
        std::vector<double> k2s, logs;
        for (double s : {1e2, 1e3, 1e4}) {
            const double k2 = k2_eval({s * std::cos(d[0]), s * std::sin(d[0]), d[1]}, ell);
            const double ratio = k2 / std::log1p(s);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            sum += ratio;
            k2s.push_back(k2);
            logs.push_back(std::log1p(s));
        }
        min_slope = std::min(min_slope, (k2s[2] - k2s[1]) / (logs[2] - logs[1]));
    }
    const double mean = sum / 9.0, spread = (hi - lo) / std::abs(mean);
    c.metric("relative_spread", spread);
    c.metric("ratio_mean", mean);
    c.metric("limit_slope", min_slope);
    c.metric("reference_slope", 1.0 / (4 * kPi * ell));
    c.check(spread < kA4MaxSpread, "spread " + fmt(spread));
    c.check(min_slope > 0.0 && mean > 0.0, "limit estimate not positive");
}

// A5: collapse to the planar log potential.
void a5(Ctx &c) {
    const GridSpec g = kReference;
    const KernelTable t = build_kernel_table(g);
    const GridSpec pg = g.plane();
    const PlanarLogTable pt = build_planar_log_table(pg, t.patch);
    const Field g2 = sample(pg, [](double x, double y, double) {
        const double dx = x - 1.0, dy = y + 0.5;
        return std::exp(-(dx * dx + dy * dy) / 2.25) * (1.0 + 0.5 * y * y / (1.0 + y * y));
    });
    const Field w3 = apply_green(extend_constant(g2, g), t);
    const Field w2 = planar_log_potential(g2, pt);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j) {
            if (!interior_cell(g, i, j)) continue;
            for (int k = 0; k < g.nz; ++k) {
                const double d = w3(i, j, k) - w2(i, j, 0);
                num += d * d;
                den += w2(i, j, 0) * w2(i, j, 0);
            }
        }
    const double rel = std::sqrt(num / den);
    c.metric("relative_l2", rel);
    c.metric("calibration", t.calibration);
    c.metric("calibration_spread", t.meta.calibration_spread);
    c.check(rel < kA5MaxRel, "relative L2 " + fmt(rel));
}

// A6: Newtonian limit; the 2% part is recorded as unattainable.
void a6(Ctx &c) {
    const Bump phi{1.0, 1.0};
    const auto rows = newtonian_limit_experiment(phi, {2.0, 4.0, 8.0, 16.0}, 32);
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        c.metric("rel_err_ell_" + std::to_string(static_cast<int>(rows[i].ell)), rows[i].rel_err);
        if (i > 0 && !(rows[i].rel_err < rows[i - 1].rel_err)) decreasing = false;
    }
    c.metric("D_inf", rows[0].D_inf);
    const bool mono = c.check(decreasing, "relative error not decreasing in ell");
    const bool small = c.check(rows.back().rel_err < kA6MaxRel, "relative error at ell=16 is " + fmt(rows.back().rel_err) + " >= 2%");
    // The smooth part shifts the kernel by roughly (log(2 ell) + O(1)) / (4 pi ell) near the bump, so the
    // relative gap decays like log(ell)/ell and is still several percent at ell = 16.
    if (mono && !small) c.r.expected_failure = true;
}

// A7: FFT convolution against the direct sum.
void a7(Ctx &c) {
    const GridSpec g{4.0, 16, 1.0, 8, false};
    const KernelTable t = build_kernel_table(g);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Field f(g);
    for (double &x : f.v) x = u01(rng);
    const Field w = apply_green(f, t);
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j)
            for (int k = 0; k < g.nz; ++k) {
                double s = 0.0;
                for (int a = 0; a < g.nx; ++a)
                    for (int b = 0; b < g.nx; ++b)
                        for (int m = 0; m < g.nz; ++m) s += t.total.at(i - a, j - b, k - m) * f(a, b, m);
                s *= g.dV();
                worst = std::max(worst, std::abs(s - w(i, j, k)));
                scale = std::max(scale, std::abs(s));
            }
    c.metric("relative_linf", worst / scale);
    c.check(worst / scale < kA7MaxRel, "relative Linf " + fmt(worst / scale));
}

// A8: gradient against central differences.
void a8(Ctx &c) {
    const GridSpec g = kReference;
    const KernelTable t = build_kernel_table(g);
    const PotentialSpec a = PotentialSpec::well(1.5, 0.5, 3.0);
    const Functional f(t, a.sample(g));
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
        const Field u = random_smooth_field(g, rng), v = random_smooth_field(g, rng);
        const Field gr = f.gradient(u);
        const double exact = f.inner_a(gr, v);
        Field up = u, um = u;
        for (std::size_t i = 0; i < u.v.size(); ++i) {
            up.v[i] += kA8Eps * v.v[i];
            um.v[i] -= kA8Eps * v.v[i];
        }
        const double fd = (f.energy(up).phi - f.energy(um).phi) / (2.0 * kA8Eps);
        worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    c.metric("max_relative_error", worst);
    c.check(worst < kA8MaxRel, "relative error " + fmt(worst));
}

// A9: radial ground state with a = 1.
void a9(Ctx &c) {
    const PotentialSpec a = PotentialSpec::constant(1.0);
    SolverConfig cfg;
    cfg.cls = SolverClass::radial;
    cfg.tol_g = kA9TolG;
    cfg.seed.restarts = 2;
    cfg.seed.width = 1.0;
    const GridSpec coarse{6.0, 64, 1.0, 16, false}, fine{6.0, 128, 1.0, 32, false};
    const KernelTable tc = build_kernel_table(coarse);
    const SolveReport rc = ground_state(cfg, a, tc);
    c.metric("phi", rc.energy.phi);
    c.metric("grad_norm", rc.grad_norm);
    c.metric("nehari_residual", rc.nehari_residual);
    c.metric("restart_dispersion", rc.restart_dispersion);
    c.metric("d3_fraction", rc.d3_fraction);
    c.check(rc.grad_norm < kA9TolG, "gradient norm " + fmt(rc.grad_norm));
    c.check(rc.nehari_residual < kA9Nehari, "Nehari residual " + fmt(rc.nehari_residual));
    c.check(rc.energy.phi > 0.0, "Phi not positive");
    c.check(rc.restart_phi.size() >= 2 && rc.restart_dispersion < kA9Dispersion, "restart dispersion " + fmt(rc.restart_dispersion));
    const Functional fc(tc, a.sample(coarse));
    const auto prof = fiber_profile(rc.u, fc, {0.5, 0.9, 1.0, 1.1, 2.0});
    c.check(prof[2] >= prof[0] && prof[2] >= prof[1] && prof[2] >= prof[3] && prof[2] >= prof[4], "fiber maximum not at t = 1");

    const KernelTable tf = build_kernel_table(fine);
    SolverConfig cf = cfg;
    cf.seed.restarts = 1;
    const Field seed = resample(rc.u, fine);
    const SolveReport rf = ground_state(cf, a, tf, &seed);
    const double order = std::log2(rc.pde_residual / rf.pde_residual);
    c.metric("pde_residual_coarse", rc.pde_residual);
    c.metric("pde_residual_fine", rf.pde_residual);
    c.metric("pde_order", order);
    c.metric("phi_fine", rf.energy.phi);
    c.check(order >= kA9MinOrder, "residual order " + fmt(order));
}

// A10: symmetry breaking along the ell scan.
void a10(Ctx &c) {
    const PotentialSpec a = PotentialSpec::constant(1.0);
    SolverConfig cfg;
    cfg.tol_g = 1e-7;
    cfg.seed.restarts = 2;
    cfg.seed.width = 1.0;
    ScanOptions opt;
    opt.L = kReference.L;
    opt.nx = kReference.nx;
    opt.margin = kA10Margin;
    std::vector<double> ells{0.5, 1.0, 2.0, 4.0, 8.0};
    ScanResult scan = ell_scan(ells, cfg, a, opt);
    auto broken = [&](const ScanResult &s) {
        for (const auto &r : s.rows)
            if (r.error.empty() && r.c_r < r.two_ell_kappa * (1.0 - kA10Margin) && r.d3_radial > kA10MinD3) return true;
        return false;
    };
    if (!broken(scan)) {
        // One upward adjustment of the window.
        opt.done = scan.rows;
        for (double e : {16.0, 32.0}) ells.push_back(e);
        scan = ell_scan(ells, cfg, a, opt);
        c.metric("window_adjusted", 1.0);
    }
    c.metric("kappa", scan.kappa);
    if (scan.ell_star) c.metric("ell_star", *scan.ell_star);
    bool all_rows = true, below = true, g_ok = true;
    for (const auto &r : scan.rows) {
        if (!r.error.empty()) {
            all_rows = false;
            c.msg << (c.msg.tellp() > 0 ? "; " : "") << "row ell=" << r.ell << ": " << r.error;
            continue;
        }
        c.metric("c_r_minus_2ellkappa@" + label(r.ell), r.c_r - r.two_ell_kappa);
        c.metric("d3_radial@" + label(r.ell), r.d3_radial);
        if (!(r.c_r <= r.two_ell_kappa + kA10Slack)) below = false;
        if (!(r.sigma_defect_G <= 1e-12 && r.d3_G > 0.0)) g_ok = false;
    }
    c.check(all_rows, "scan rows failed");
    c.check(below, "(i) c_r exceeds 2 ell kappa");
    c.check(broken(scan), "(ii) no scanned ell with c_r < 2 ell kappa (1 - 1e-3) and d3 > 0.1");
    c.check(g_ok, "(iii) G-class output not sigma-invariant or x3-constant");
}

struct Entry {
    const char *title;
    std::function<void(Ctx &)> fn;
};

const std::map<std::string, Entry> &registry() {
    static const std::map<std::string, Entry> m{
        {"A1", {"ODE Green function", a1}},
        {"A2", {"kernel cross-validation against image sum", a2}},
        {"A3", {"kernel symmetry and translation", a3}},
        {"A4", {"logarithmic asymptotics of the smooth part", a4}},
        {"A5", {"2D collapse", a5}},
        {"A6", {"Newtonian limit", a6}},
        {"A7", {"FFT convolution equals direct sum", a7}},
        {"A8", {"gradient check", a8}},
        {"A9", {"radial ground state", a9}},
        {"A10", {"symmetry breaking scan", a10}},
    };
    return m;
}

} // namespace

const std::vector<std::string> &criterion_ids() {
    static const std::vector<std::string> ids{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"};
    return ids;
}

CriterionResult run_criterion(const std::string &id) {
    const auto it = registry().find(id);
    if (it == registry().end()) throw std::invalid_argument("unknown acceptance criterion: " + id);
    CriterionResult r;
    r.id = id;
    r.title = it->second.title;
    const auto t0 = std::chrono::steady_clock::now();
    Ctx c(r);
    try {
        it->second.fn(c);
        r.pass = c.ok;
    } catch (const std::exception &e) {
        r.pass = false;
        r.expected_failure = false;
        c.msg << (c.msg.tellp() > 0 ? "; " : "") << "exception: " << e.what();
    }
    if (r.pass) r.expected_failure = false;
    r.detail = c.msg.str();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string format_result_line(const CriterionResult &r) {
    std::ostringstream os;
    os << std::left << std::setw(4) << r.id << (r.pass ? "PASS" : "FAIL") << "  " << r.title << "  [";
    for (std::size_t i = 0; i < r.metrics.size(); ++i) os << (i ? " " : "") << r.metrics[i].first << '=' << std::setprecision(6) << r.metrics[i].second;
    os << "] " << std::fixed << std::setprecision(1) << r.seconds << "s";
    if (!r.detail.empty()) os << "  " << r.detail;
    if (r.expected_failure) os << "  (documented expected failure)";
    return os.str();
}

std::string summary_json(const std::vector<CriterionResult> &results) {
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const auto &r : results) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto &[k, v] : r.metrics) m[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
        arr.push_back({{"id", r.id},
                       {"title", r.title},
                       {"pass", r.pass},
                       {"expected_failure", r.expected_failure},
                       {"seconds", r.seconds},
                       {"detail", r.detail},
                       {"metrics", m}});
        all = all && r.pass;
    }
    return nlohmann::json{{"criteria", arr}, {"all_pass", all}}.dump(2);
}

} // namespace chain
