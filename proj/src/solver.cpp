#include "chain/solver.hpp"

#include "chain/kernel.hpp"
#include "chain/poisson.hpp"
#include "chain/simd.hpp"
#include "chain/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace chain {

const char *to_string(SolverClass c) {
    switch (c) {
    case SolverClass::radial: return "radial";
    case SolverClass::g_invariant: return "g_invariant";
    case SolverClass::planar: return "planar";
    }
    return "?";
}

SolverClass solver_class_from_string(const std::string &s) {
    if (s == "radial") return SolverClass::radial;
    if (s == "g_invariant") return SolverClass::g_invariant;
    if (s == "planar") return SolverClass::planar;
    throw std::invalid_argument("unknown symmetry class: " + s);
}

void SolverConfig::validate() const {
    if (!(tol_g > 0.0)) throw std::invalid_argument("solver: tol_g must be positive");
    if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be at least 1");
    if (!(step0 > 0.0)) throw std::invalid_argument("solver: step0 must be positive");
    if (!(armijo_factor > 0.0 && armijo_factor < 1.0)) throw std::invalid_argument("solver: armijo_factor must lie in (0,1)");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 0.5))
        throw std::invalid_argument("solver: sufficient_decrease must lie in (0,0.5)");
    if (seed.restarts < 1) throw std::invalid_argument("solver: restarts must be at least 1");
    if (!(seed.width > 0.0) || seed.width_z < 0.0 || !(seed.amplitude > 0.0))
        throw std::invalid_argument("solver: seed amplitude and widths must be positive");
}

namespace {

Symmetry tag_of(SolverClass c) {
    switch (c) {
    case SolverClass::radial: return Symmetry::radial;
    case SolverClass::g_invariant: return Symmetry::g_invariant;
    case SolverClass::planar: return Symmetry::radial;
    }
    return Symmetry::general;
}

Field project(const Field &u, SolverClass c) { return project_to(u, tag_of(c)); }

void scale(Field &u, double t) {
    for (double &x : u.v) x *= t;
}

struct Iterate {
    Field u, w;
    EnergyBreakdown e;
    double t = 1.0;  // last Nehari factor
};

// Rescales onto the Nehari manifold; false when V0 >= 0.
bool to_nehari(Iterate &it) {
    const NehariScale s = nehari_scale(it.e);
    if (!s.defined) return false;
    const double t = s.t_u, t2 = t * t, t4 = t2 * t2;
    it.t = t;
    scale(it.u, t);
    scale(it.w, t2);
    it.e.norm_a_sq *= t2;
    it.e.V1 *= t4;
    it.e.V2 *= t4;
    it.e.V0 *= t4;
    it.e.log_norm_sq *= t2;
    it.e.phi = 0.5 * it.e.norm_a_sq + 0.25 * it.e.V0;
    return true;
}

Field seed_profile(const GridSpec &g, SolverClass c, const SeedSpec &s, double width, double width_z, bool flat) {
    return sample(g, [&](double x, double y, double z) {
        const double planar = s.amplitude * std::exp(-(x * x + y * y) / (width * width));
        if (g.planar || flat) return planar;
        if (c == SolverClass::g_invariant) return planar * std::cos(kPi * z / g.ell);
        return planar * std::exp(-z * z / (width_z * width_z));
    });
}

// Seed for one restart, rescaled onto the manifold; narrows the bump while V0 >= 0.
std::optional<Field> make_seed(const SolverConfig &cfg, const Functional &f, int restart) {
    const GridSpec &g = f.grid();
    const SeedSpec &s = cfg.seed;
    const bool flat = s.flat_restart && cfg.cls == SolverClass::radial && restart % 2 == 1;
    std::mt19937_64 rng(s.rng_seed + 7919ULL * static_cast<std::uint64_t>(restart));
    const Field noise = random_smooth_field(flat ? g.plane() : g, rng, 5);
    double w = s.width, wz = s.width_z > 0.0 ? s.width_z : 0.5 * g.ell;
    for (int attempt = 0; attempt <= 6; ++attempt, w *= 0.5, wz *= 0.5) {
        Field u = seed_profile(g, cfg.cls, s, w, wz, flat);
        const double pert = restart == 0 ? 0.0 : s.perturbation * s.amplitude;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nx; ++j)
                for (int k = 0; k < g.nz; ++k) u(i, j, k) += pert * (flat ? noise(i, j, 0) : noise(i, j, k));
        u = project(u, cfg.cls);
        if (f.energy(u).V0 < 0.0) return u;
    }
    return std::nullopt;
}

double interior_norm(const GridSpec &g, const std::vector<double> &v, double fraction) {
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j) {
            if (!interior_cell(g, i, j, fraction)) continue;
            for (int k = 0; k < g.nz; ++k) s += v[g.idx(i, j, k)] * v[g.idx(i, j, k)];
        }
    return std::sqrt(s);
}

SolveReport finish(const Functional &f, SolverClass cls, Field u, const std::vector<TraceRow> &trace) {
    SolveReport r;
    r.energy = f.energy(u);
    r.grad_norm = projected_gradient_norm(u, f, cls);
    r.nehari_residual = std::abs(f.derivative(u, u)) / r.energy.norm_a_sq;
    r.pde_residual = residual_report(u, f);
    r.d3_fraction = u.grid.planar ? 0.0 : d3_energy_fraction(u);
    r.iterations = trace.empty() ? 0 : trace.back().iter;
    r.trace = trace;
    r.cls = to_string(cls);
    r.u = std::move(u);
    return r;
}

} // namespace

double projected_gradient_norm(const Field &u, const Functional &f, SolverClass cls) {
    Field w;
    const EnergyBreakdown e = f.energy(u, w);
    Field G = f.apply_operator(u);
    for (std::size_t i = 0; i < G.v.size(); ++i) G.v[i] += w.v[i] * u.v[i];
    const Field PG = project(G, cls);
    const Field d = project(f.solve(PG), cls);
    return std::sqrt(std::max(inner(PG, d), 0.0) / e.norm_a_sq);
}

SolveReport descend(const SolverConfig &cfg, const Functional &f, Field seed) {
    cfg.validate();
    Iterate cur;
    cur.u = project(seed, cfg.cls);
    cur.e = f.energy(cur.u, cur.w);
    if (!to_nehari(cur)) throw SolverError("no Nehari seed: V0 >= 0 at the initial field");
    std::vector<TraceRow> trace;
    const double c = cfg.sufficient_decrease, growth = 1.5, eps = std::numeric_limits<double>::epsilon();
    double step = cfg.step0;
    for (int it = 0;; ++it) {
        Field G = f.apply_operator(cur.u);
        for (std::size_t i = 0; i < G.v.size(); ++i) G.v[i] += cur.w.v[i] * cur.u.v[i];
        const Field PG = project(G, cfg.cls);
        const Field d = project(f.solve(PG), cfg.cls);
        const double gd = std::max(inner(PG, d), 0.0);
        const double gn = std::sqrt(gd / cur.e.norm_a_sq);
        trace.push_back({it, cur.e.phi, gn, step});
        if (gn < cfg.tol_g) break;
        if (it >= cfg.max_iters)
            throw SolverError("solver did not converge in " + std::to_string(cfg.max_iters) + " iterations", trace);
        bool accepted = false;
        for (; step > 1e-14; step *= cfg.armijo_factor) {
            Iterate trial;
            trial.u = cur.u;
            simd::axpy(-step, d.v.data(), trial.u.v.data(), trial.u.v.size());
            trial.u.tag = cur.u.tag;
            trial.e = f.energy(trial.u, trial.w);
            if (!to_nehari(trial)) continue;
            const double slack = 64.0 * eps * std::abs(cur.e.phi), drop = c * step * gd;
            bool ok = trial.e.phi <= cur.e.phi - drop + slack;
            // Below the rounding level of Phi the decrease test is blind; the slope along the rescaled
            // path must then certify the same sufficient decrease through the quadratic model.
            if (ok && drop < slack) {
                Field Gt = f.apply_operator(trial.u);
                for (std::size_t i = 0; i < Gt.v.size(); ++i) Gt.v[i] += trial.w.v[i] * trial.u.v[i];
                ok = -(trial.t) * inner(Gt, d) <= (1.0 - 2.0 * c) * gd;
            }
            if (ok) {
                if (trial.e.phi > cur.e.phi + 64.0 * eps * std::abs(cur.e.phi))
                    throw SolverError("energy increased along an accepted step", trace);
                cur = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) throw SolverError("line search stalled", trace);
        step = std::min(step * growth, 16.0 * cfg.step0);
    }
    return finish(f, cfg.cls, std::move(cur.u), trace);
}

namespace {

SolveReport run_restarts(const SolverConfig &cfg, const Functional &f, const Field *seed) {
    cfg.validate();
    std::vector<SolveReport> results;
    std::string last_error;
    bool any_seed = false;
    for (int r = 0; r < cfg.seed.restarts; ++r) {
        std::optional<Field> s;
        if (r == 0 && seed) {
            if (!(seed->grid == f.grid())) throw std::invalid_argument("ground_state: seed grid mismatch");
            s = *seed;
        } else {
            s = make_seed(cfg, f, r);
        }
        if (!s) continue;
        any_seed = true;
        try {
            results.push_back(descend(cfg, f, std::move(*s)));
        } catch (const SolverError &e) {
            if (r + 1 == cfg.seed.restarts && results.empty()) throw;
            last_error = e.what();
        }
    }
    if (!any_seed) throw SolverError("no Nehari seed");
    if (results.empty()) throw SolverError(last_error.empty() ? "all restarts failed" : last_error);
    std::size_t best = 0;
    double lo = results[0].energy.phi, hi = lo;
    for (std::size_t i = 0; i < results.size(); ++i) {
        lo = std::min(lo, results[i].energy.phi);
        hi = std::max(hi, results[i].energy.phi);
        if (results[i].energy.phi < results[best].energy.phi) best = i;
    }
    SolveReport out = std::move(results[best]);
    for (const auto &r : results) out.restart_phi.push_back(r.energy.phi);
    out.restart_dispersion = (hi - lo) / std::abs(lo);
    return out;
}

} // namespace

SolveReport ground_state(const SolverConfig &cfg, const PotentialSpec &a, const KernelTable &table, const Field *seed) {
    if (cfg.cls == SolverClass::planar) throw std::invalid_argument("ground_state: use planar_ground_state for the planar class");
    if (!a.radial) throw std::invalid_argument("ground_state: potential must be radial in the plane");
    if (cfg.cls == SolverClass::g_invariant && !a.z_independent)
        throw std::invalid_argument("ground_state: the G-invariant class needs an x3-independent potential");
    if (cfg.cls == SolverClass::g_invariant && table.grid.nz % 2 != 0)
        throw std::invalid_argument("ground_state: the G-invariant class needs even nz");
    const Functional f(table, a.sample(table.grid));
    return run_restarts(cfg, f, seed);
}

SolveReport planar_ground_state(const SolverConfig &cfg, const PotentialSpec &a, const PlanarLogTable &table,
                                const Field *seed) {
    if (!a.radial || !a.z_independent) throw std::invalid_argument("planar_ground_state: potential must be planar and radial");
    SolverConfig c = cfg;
    c.cls = SolverClass::planar;
    const Functional f(table, a.sample(table.grid));
    return run_restarts(c, f, seed);
}

double residual_report(const Field &u, const Functional &f, double fraction) {
    const GridSpec &g = u.grid;
    const double un = interior_norm(g, u.v, fraction);
    if (un == 0.0) return 0.0;
    const Field w = f.potential(u);
    const std::vector<double> &a = f.a();
    std::vector<double> r(u.v.size(), 0.0);
    const double cx = 1.0 / (12.0 * g.hx() * g.hx());
    const double cz = g.planar ? 0.0 : 1.0 / (12.0 * g.hz() * g.hz());
    const int n = g.nx, nz = g.nz;
    auto at = [&](int i, int j, int k) { return (i < 0 || j < 0 || i >= n || j >= n) ? 0.0 : u(i, j, k); };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!interior_cell(g, i, j, fraction)) continue;
            for (int k = 0; k < nz; ++k) {
                const double c0 = u(i, j, k);
                double lap = cx * (-at(i + 2, j, k) + 16 * at(i + 1, j, k) - 30 * c0 + 16 * at(i - 1, j, k) - at(i - 2, j, k)) +
                             cx * (-at(i, j + 2, k) + 16 * at(i, j + 1, k) - 30 * c0 + 16 * at(i, j - 1, k) - at(i, j - 2, k));
                if (cz != 0.0) {
                    auto zk = [&](int d) { return u(i, j, ((k + d) % nz + nz) % nz); };
                    lap += cz * (-zk(2) + 16 * zk(1) - 30 * c0 + 16 * zk(-1) - zk(-2));
                }
                const std::size_t id = g.idx(i, j, k);
                r[id] = -lap + a[id] * c0 + w.v[id] * c0;
            }
        }
    return interior_norm(g, r, fraction) / un;
}

double residual_report(const Field &u, const PotentialSpec &a, const KernelTable &table) {
    return residual_report(u, Functional(table, a.sample(u.grid)));
}

Field resample(const Field &u, const GridSpec &t) {
    const GridSpec &s = u.grid;
    if (s.planar != t.planar) throw std::invalid_argument("resample: planar and slab grids do not mix");
    auto planar_weights = [&](double x, int &i0, double &f) {
        const double p = (x + s.L) / s.hx() - 0.5;
        i0 = static_cast<int>(std::floor(p));
        f = p - i0;
    };
    auto val = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || i >= s.nx || j >= s.nx) return 0.0;
        return u(i, j, ((k % s.nz) + s.nz) % s.nz);
    };
    Field out(t, u.tag);
    for (int i = 0; i < t.nx; ++i) {
        int i0;
        double fi;
        planar_weights(t.x(i), i0, fi);
        for (int j = 0; j < t.nx; ++j) {
            int j0;
            double fj;
            planar_weights(t.x(j), j0, fj);
            for (int k = 0; k < t.nz; ++k) {
                int k0 = 0;
                double fk = 0.0;
                if (!s.planar) {
                    const double p = (reduce_dz(t.z(k), s.ell) + s.ell) / s.hz();
                    k0 = static_cast<int>(std::floor(p));
                    fk = p - k0;
                }
                double v = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int c = 0; c < (s.planar ? 1 : 2); ++c) {
                            const double w = (a ? fi : 1 - fi) * (b ? fj : 1 - fj) * (s.planar ? 1.0 : (c ? fk : 1 - fk));
                            if (w != 0.0) v += w * val(i0 + a, j0 + b, k0 + c);
                        }
                out(i, j, k) = v;
            }
        }
    }
    return out;
}

int scan_nz(double ell, double hz_target) {
    int nz = static_cast<int>(std::lround(2.0 * ell / hz_target));
    nz += nz % 2;
    return std::max(8, nz);
}

std::optional<double> detect_ell_star(const std::vector<ScanRow> &rows, double margin) {
    std::optional<double> best;
    for (const auto &r : rows) {
        if (!r.error.empty()) continue;
        if (r.c_r < r.two_ell_kappa * (1.0 - margin) && (!best || r.ell < *best)) best = r.ell;
    }
    return best;
}

ScanResult ell_scan(const std::vector<double> &ells, const SolverConfig &cfg, const PotentialSpec &a,
                    const ScanOptions &opt) {
    if (!a.z_independent || !a.radial) throw std::invalid_argument("ell_scan: potential must be x3-independent and radial");
    ScanResult res;
    const GridSpec pg = GridSpec::make_planar(opt.L, opt.nx);
    const PlanarLogTable ptab = build_planar_log_table(pg, opt.patch);
    res.kappa = planar_ground_state(cfg, a, ptab).energy.phi;
    for (double ell : ells) {
        auto done = std::find_if(opt.done.begin(), opt.done.end(), [&](const ScanRow &r) { return r.ell == ell && r.error.empty(); });
        if (done != opt.done.end()) {
            res.rows.push_back(*done);
            continue;
        }
        ScanRow row;
        row.ell = ell;
        row.nz = scan_nz(ell, opt.hz_target);
        row.two_ell_kappa = 2.0 * ell * res.kappa;
        try {
            const GridSpec g{opt.L, opt.nx, ell, row.nz, false};
            KernelTableOptions ko;
            ko.patch = opt.patch;
            const KernelTable table = build_kernel_table(g, ko);
            SolverConfig cr = cfg;
            cr.cls = SolverClass::radial;
            cr.seed.flat_restart = true;
            cr.seed.restarts = std::max(2, cfg.seed.restarts);
            const SolveReport rr = ground_state(cr, a, table);
            row.c_r = rr.energy.phi;
            row.d3_radial = rr.d3_fraction;
            SolverConfig cg = cfg;
            cg.cls = SolverClass::g_invariant;
            const SolveReport rg = ground_state(cg, a, table);
            row.c_G = rg.energy.phi;
            row.d3_G = rg.d3_fraction;
            row.sigma_defect_G = sigma_defect(rg.u);
        } catch (const std::exception &e) {
            row.error = e.what();
        }
        res.rows.push_back(row);
        if (opt.on_row) opt.on_row(row);
    }
    res.ell_star = detect_ell_star(res.rows, opt.margin);
    return res;
}

void write_trace_csv(const std::vector<TraceRow> &trace, const std::string &path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "iter,phi,grad_norm,step\n";
    for (const auto &t : trace) os << t.iter << ',' << t.phi << ',' << t.grad_norm << ',' << t.step << '\n';
}

namespace {

std::string csv_escape(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

void write_scan_csv(const ScanResult &scan, const std::string &path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "ell,nz,c_r,c_G,two_ell_kappa,c_r_minus_two_ell_kappa,d3_radial,d3_G,sigma_defect_G,error\n";
    for (const auto &r : scan.rows)
        os << r.ell << ',' << r.nz << ',' << r.c_r << ',' << r.c_G << ',' << r.two_ell_kappa << ','
           << r.c_r - r.two_ell_kappa << ',' << r.d3_radial << ',' << r.d3_G << ',' << r.sigma_defect_G << ','
           << csv_escape(r.error) << '\n';
}

std::vector<ScanRow> read_scan_csv(const std::string &path) {
    std::ifstream is(path);
    std::vector<ScanRow> rows;
    if (!is) return rows;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (ch == '"') {
                    quoted = false;
                } else {
                    cur += ch;
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                cols.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        cols.push_back(cur);
        if (cols.size() != 10) throw std::runtime_error("malformed scan row in " + path);
        ScanRow r;
        r.ell = std::stod(cols[0]);
        r.nz = std::stoi(cols[1]);
        r.c_r = std::stod(cols[2]);
        r.c_G = std::stod(cols[3]);
        r.two_ell_kappa = std::stod(cols[4]);
        r.d3_radial = std::stod(cols[6]);
        r.d3_G = std::stod(cols[7]);
        r.sigma_defect_G = std::stod(cols[8]);
        r.error = cols[9];
        rows.push_back(r);
    }
    return rows;
}

} // namespace chain
