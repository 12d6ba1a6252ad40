#include "chain/kernel_table.hpp"

#include "chain/kernel.hpp"
#include "chain/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace chain {

namespace {

int wrap(int d, int n) {
    const int r = d % n;
    return r < 0 ? r + n : r;
}

// Signed offset represented by a wrapped index.
int unwrap(int w, int n) { return w < n / 2 ? w : w - n; }

// Vertical cell [lo, hi] of reduced offset index kk, cut at ell for the straddling cell.
std::array<double, 2> z_cell(int kk, int nz, double hz, double ell) {
    if (kk == 0) return {-0.5 * hz, 0.5 * hz};
    if (2 * kk == nz) return {ell - 0.5 * hz, ell};
    return {(kk - 0.5) * hz, (kk + 0.5) * hz};
}

std::vector<double> gauss_nodes(int n, std::vector<double> &w) {
    std::vector<double> x;
    auto fill = [&](const auto &ax, const auto &wt) {
        for (std::size_t m = 0; m < ax.size(); ++m) {
            if (ax[m] == 0.0) {
                x.push_back(0.0);
                w.push_back(wt[m]);
            } else {
                x.push_back(-ax[m]);
                w.push_back(wt[m]);
                x.push_back(ax[m]);
                w.push_back(wt[m]);
            }
        }
    };
    w.clear();
    switch (n) {
    case 7: fill(boost::math::quadrature::gauss<double, 7>::abscissa(), boost::math::quadrature::gauss<double, 7>::weights()); break;
    case 10: fill(boost::math::quadrature::gauss<double, 10>::abscissa(), boost::math::quadrature::gauss<double, 10>::weights()); break;
    case 15: fill(boost::math::quadrature::gauss<double, 15>::abscissa(), boost::math::quadrature::gauss<double, 15>::weights()); break;
    case 20: fill(boost::math::quadrature::gauss<double, 20>::abscissa(), boost::math::quadrature::gauss<double, 20>::weights()); break;
    default: throw std::invalid_argument("cell_gauss must be one of 7, 10, 15, 20");
    }
    return x;
}

void fill_spectrum(LatticeKernel &lk, double dV) {
    Convolver conv(lk.n0, lk.n1, lk.n2);
    lk.spectrum = conv.spectrum(lk.values, dV);
}

template <class T> void put(std::ofstream &os, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        os.write(reinterpret_cast<const char *>(b), sizeof(T));
    } else {
        os.write(reinterpret_cast<const char *>(&v), sizeof(T));
    }
}

template <class T> T get(std::ifstream &is) {
    T v{};
    is.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!is) throw std::runtime_error("kernel dump truncated");
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

double k1_cell(int a, int b, int kk, const GridSpec &g) {
    const double hx = g.hx(), hz = g.hz();
    const auto zc = z_cell(kk, g.nz, hz, g.ell);
    const double vol = hx * hx * (zc[1] - zc[0]);
    const double I = box_integral_inv_r((a - 0.5) * hx, (a + 0.5) * hx, (b - 0.5) * hx, (b + 0.5) * hx, zc[0], zc[1]);
    return -I / (4.0 * kPi * vol);
}

double k1_point(int a, int b, int kk, const GridSpec &g) {
    const double hx = g.hx();
    const double t = 2 * kk == g.nz ? g.ell : kk * g.hz();
    return -1.0 / (4.0 * kPi * std::sqrt((a * hx) * (a * hx) + (b * hx) * (b * hx) + t * t));
}

void fill_k1(KernelTable &t) {
    const GridSpec &g = t.grid;
    const int n0 = 2 * g.nx, nz = g.nz;
    for (int iw = 0; iw < n0; ++iw)
        for (int jw = 0; jw < n0; ++jw) {
            const int a0 = std::abs(unwrap(iw, n0)), b0 = std::abs(unwrap(jw, n0));
            const int a = std::max(a0, b0), b = std::min(a0, b0);
            const bool in_patch = a <= t.patch;
            for (int kw = 0; kw < nz; ++kw) {
                const int kk = std::min(kw, nz - kw);
                t.k1.values[t.k1.index(iw, jw, kw)] = in_patch ? k1_cell(a, b, kk, g) : k1_point(a, b, kk, g);
            }
        }
}

} // namespace

std::size_t LatticeKernel::index(int di, int dj, int dk) const {
    return (static_cast<std::size_t>(wrap(di, n0)) * n1 + wrap(dj, n1)) * n2 + wrap(dk, n2);
}

double kernel_table_bytes(const GridSpec &g, const KernelTableOptions &opt) {
    const double n0 = 2.0 * g.nx, lattice = n0 * n0 * g.nz;
    const double spectra = n0 * n0 * (g.nz / 2 + 1) * 16.0;
    const double rho_max = std::sqrt(2.0) * g.nx * g.hx();
    double w = std::min(0.5, kPi / (4.0 * g.ell));
    if (rho_max > 0.0) w = std::min(w, kPi / rho_max);
    const double nodes = 15.0 * std::ceil(38.0 / std::min(1.0, g.ell) / w);
    const double batch = 2.0 * nodes * (g.nz / 2 + 1) * 8.0;
    (void)opt;
    return 3.0 * lattice * 8.0 + 3.0 * spectra + batch + 4.0 * lattice * 8.0;
}

KernelTable build_kernel_table(const GridSpec &g, const KernelTableOptions &opt) {
    g.validate();
    if (g.planar) throw std::invalid_argument("build_kernel_table: slab grid required");
    const double need = kernel_table_bytes(g, opt);
    if (need > opt.mem_limit_mb * 1024.0 * 1024.0)
        throw std::length_error("kernel table needs " + std::to_string(need / 1048576.0) + " MB, above the limit");

    KernelTable t;
    t.grid = g;
    t.patch = std::clamp(opt.patch, 0, g.nx);
    const int nx = g.nx, nz = g.nz, n0 = 2 * nx, half = nz / 2;
    const double hx = g.hx(), hz = g.hz(), ell = g.ell;
    for (LatticeKernel *lk : {&t.k1, &t.k2, &t.total}) {
        lk->n0 = n0;
        lk->n1 = n0;
        lk->n2 = nz;
        lk->values.assign(static_cast<std::size_t>(n0) * n0 * nz, 0.0);
    }

    std::vector<std::array<double, 2>> pr(half + 1), cr(half + 1);
    for (int k = 0; k <= half; ++k) {
        const double tk = k == half ? ell : k * hz;
        pr[k] = {tk, tk};
        const auto zc = z_cell(k, nz, hz, ell);
        cr[k] = {std::max(0.0, zc[0]), zc[1]};
    }
    const double rho_max = std::sqrt(2.0) * nx * hx;
    const HankelBatch point(ell, rho_max, pr), cell(ell, rho_max, cr);

    // Smooth part point columns, one per distinct planar radius outside the patch.
    std::map<long, int> key_slot;
    std::vector<long> keys;
    for (int a = 0; a <= nx; ++a)
        for (int b = 0; b <= a; ++b) {
            if (a <= t.patch) continue;
            const long key = static_cast<long>(a) * a + static_cast<long>(b) * b;
            if (key_slot.emplace(key, static_cast<int>(keys.size())).second) keys.push_back(key);
        }
    std::vector<double> cols(keys.size() * (half + 1)), errs(keys.size() * (half + 1));
    parallel_for(keys.size(), [&](std::size_t m) {
        const double rho = std::sqrt(static_cast<double>(keys[m])) * hx;
        const double one = 1.0;
        point.eval({&rho, 1}, {&one, 1}, cols.data() + m * (half + 1), errs.data() + m * (half + 1));
    });

    // Patch columns: exact vertical cell averages, Gauss in the plane.
    std::vector<double> gw;
    const std::vector<double> gx = gauss_nodes(opt.cell_gauss, gw);
    const int pn = t.patch + 1;
    std::vector<double> pcols(static_cast<std::size_t>(pn) * pn * (half + 1), 0.0), perrs(pcols.size(), 0.0);
    std::vector<std::array<int, 2>> pcells;
    for (int a = 0; a <= t.patch; ++a)
        for (int b = 0; b <= a; ++b) pcells.push_back({a, b});
    parallel_for(pcells.size(), [&](std::size_t m) {
        const int a = pcells[m][0], b = pcells[m][1];
        std::vector<double> rho, wt;
        for (std::size_t p = 0; p < gx.size(); ++p)
            for (std::size_t q = 0; q < gx.size(); ++q) {
                rho.push_back(std::hypot((a + 0.5 * gx[p]) * hx, (b + 0.5 * gx[q]) * hx));
                wt.push_back(0.25 * gw[p] * gw[q]);
            }
        const std::size_t off = (static_cast<std::size_t>(a) * pn + b) * (half + 1);
        cell.eval(rho, wt, pcols.data() + off, perrs.data() + off);
    });

    double qerr = 0.0;
    for (double e : errs) qerr = std::max(qerr, e);
    for (double e : perrs) qerr = std::max(qerr, e);
    t.meta.quad_error = qerr;
    if (qerr > opt.quad_tol) throw QuadratureError("kernel table quadrature did not converge", qerr);

    for (int iw = 0; iw < n0; ++iw)
        for (int jw = 0; jw < n0; ++jw) {
            const int a0 = std::abs(unwrap(iw, n0)), b0 = std::abs(unwrap(jw, n0));
            const int a = std::max(a0, b0), b = std::min(a0, b0);
            const double *col = a <= t.patch ? pcols.data() + (static_cast<std::size_t>(a) * pn + b) * (half + 1)
                                              : cols.data() + key_slot.at(static_cast<long>(a) * a + static_cast<long>(b) * b) * (half + 1);
            for (int kw = 0; kw < nz; ++kw) t.k2.values[t.k2.index(iw, jw, kw)] = col[std::min(kw, nz - kw)];
        }
    fill_k1(t);
    fill_spectrum(t.k1, g.dV());
    t.set_calibration(0.0);
    if (opt.calibrate) {
        double spread = 0.0;
        const double c = collapse_calibration(t, &spread);
        t.set_calibration(c);
        t.meta.calibration_spread = spread;
    }
    t.refresh_metadata();
    return t;
}

void KernelTable::set_calibration(double c) {
    const double delta = c - calibration;
    for (double &v : k2.values) v += delta;
    calibration = c;
    for (std::size_t i = 0; i < total.values.size(); ++i) total.values[i] = k1.values[i] + k2.values[i];
    fill_spectrum(k2, grid.dV());
    fill_spectrum(total, grid.dV());
}

void KernelTable::refresh_metadata() {
    const GridSpec &g = grid;
    const int nx = g.nx, half = g.nz / 2;
    const double hx = g.hx(), hz = g.hz();
    struct Entry {
        double r, k2, tot;
    };
    std::vector<Entry> es;
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b <= a; ++b)
            for (int k = 0; k <= half; ++k) {
                const double tk = k == half ? g.ell : k * hz;
                es.push_back({std::sqrt((a * hx) * (a * hx) + (b * hx) * (b * hx) + tk * tk), k2.at(a, b, k), total.at(a, b, k)});
            }
    double R = 0.0;
    for (const auto &e : es)
        if (e.k2 <= 0.0 || e.tot <= 0.0) R = std::max(R, e.r);
    if (R > 0.0) R = std::nextafter(R, 2.0 * R + 1.0);
    double sup_below = 0.0, ck = std::max(4.0 * kPi * g.ell, 1.0 / (4.0 * kPi * g.ell));
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (const auto &e : es) {
        if (e.r < R) {
            sup_below = std::max(sup_below, std::abs(e.k2));
            continue;
        }
        if (e.r == 0.0) continue;
        const double lg = std::log1p(e.r);
        ck = std::max({ck, e.k2 / lg, lg / e.k2});
        if (e.r >= std::max(R, 0.5 * g.L)) {
            sx += lg;
            sy += e.k2;
            sxx += lg * lg;
            sxy += lg * e.k2;
            n += 1;
        }
    }
    meta.crossover_R = R;
    meta.C_K = ck;
    meta.sup_abs_k2_below_R = sup_below;
    if (n > 1) {
        meta.fit_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        meta.fit_intercept = (sy - meta.fit_slope * sx) / n;
    }
}

PlanarLogTable build_planar_log_table(const GridSpec &pg, int patch) {
    if (!pg.planar) throw std::invalid_argument("build_planar_log_table: planar grid required");
    PlanarLogTable t;
    t.grid = pg;
    t.patch = std::clamp(patch, 0, pg.nx);
    const int n0 = 2 * pg.nx;
    const double hx = pg.hx();
    t.log.n0 = n0;
    t.log.n1 = n0;
    t.log.n2 = 1;
    t.log.values.assign(static_cast<std::size_t>(n0) * n0, 0.0);
    for (int iw = 0; iw < n0; ++iw)
        for (int jw = 0; jw < n0; ++jw) {
            const int a = std::abs(unwrap(iw, n0)), b = std::abs(unwrap(jw, n0));
            double v;
            if (std::max(a, b) <= t.patch)
                v = 0.5 * rect_integral_log_r2((a - 0.5) * hx, (a + 0.5) * hx, (b - 0.5) * hx, (b + 0.5) * hx) / (hx * hx);
            else
                v = std::log(std::hypot(a * hx, b * hx));
            t.log.values[t.log.index(iw, jw, 0)] = v / (2.0 * kPi);
        }
    fill_spectrum(t.log, pg.dV());
    return t;
}

double collapse_calibration(const KernelTable &tab, double *spread) {
    const GridSpec &g = tab.grid;
    const GridSpec pg = g.plane();
    const PlanarLogTable lt = build_planar_log_table(pg, tab.patch);
    const double sigma = g.L / 6.0;
    const Field g1 = sample(pg, [&](double x, double y, double) { return std::exp(-(x * x + y * y) / (sigma * sigma)); });
    const Field g3 = extend_constant(g1, g);
    std::vector<double> w2(pg.size()), w3(g.size());
    convolver_for(pg).apply(g1.v.data(), pg.nx, 1, {&lt.log.spectrum}, {w2.data()});
    convolver_for(g).apply(g3.v.data(), g.nx, g.nz, {&tab.total.spectrum}, {w3.data()});
    double m3 = 0.0;
    for (double v : g3.v) m3 += v;
    m3 *= g.dV();
    const double lim = 0.7 * g.L;
    double s = 0.0, lo = 1e300, hi = -1e300;
    long cnt = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j) {
            if (std::abs(g.x(i)) > lim || std::abs(g.x(j)) > lim) continue;
            for (int k = 0; k < g.nz; ++k) {
                const double d = (w2[pg.idx(i, j, 0)] - w3[g.idx(i, j, k)]) / m3;
                s += d;
                lo = std::min(lo, d);
                hi = std::max(hi, d);
                ++cnt;
            }
        }
    if (spread) *spread = hi - lo;
    return tab.calibration + s / static_cast<double>(cnt);
}

void dump_kernel(const KernelTable &t, const std::string &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.write("CHNK1", 5);
    put<double>(os, t.grid.ell);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.k2.n0));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.k2.n1));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.k2.n2));
    put<double>(os, t.grid.hx());
    put<double>(os, t.grid.hx());
    put<double>(os, t.grid.hz());
    put<double>(os, t.calibration);
    for (double v : t.k2.values) put<double>(os, v);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.patch));
    for (int di = -t.patch; di <= t.patch; ++di)
        for (int dj = -t.patch; dj <= t.patch; ++dj)
            for (int dk = 0; dk < t.k1.n2; ++dk) put<double>(os, t.k1.at(di, dj, dk));
    if (!os) throw std::runtime_error("write failed: " + path);
}

KernelTable load_kernel(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "CHNK1", 5) != 0) throw std::runtime_error("not a kernel dump: " + path);
    KernelTable t;
    const double ell = get<double>(is);
    const auto n0 = get<std::uint32_t>(is), n1 = get<std::uint32_t>(is), n2 = get<std::uint32_t>(is);
    const double hx = get<double>(is), hy = get<double>(is), hz = get<double>(is);
    (void)hy;
    t.grid.nx = static_cast<int>(n0 / 2);
    t.grid.L = 0.5 * hx * t.grid.nx;
    t.grid.nz = static_cast<int>(n2);
    t.grid.ell = ell;
    if (n0 != n1 || std::abs(t.grid.hz() - hz) > 1e-12 * hz) throw std::runtime_error("inconsistent kernel dump header");
    t.grid.validate();
    const double cal = get<double>(is);
    for (LatticeKernel *lk : {&t.k1, &t.k2, &t.total}) {
        lk->n0 = static_cast<int>(n0);
        lk->n1 = static_cast<int>(n1);
        lk->n2 = static_cast<int>(n2);
        lk->values.assign(static_cast<std::size_t>(n0) * n1 * n2, 0.0);
    }
    for (double &v : t.k2.values) v = get<double>(is);
    t.patch = static_cast<int>(get<std::uint32_t>(is));
    fill_k1(t);
    for (int di = -t.patch; di <= t.patch; ++di)
        for (int dj = -t.patch; dj <= t.patch; ++dj)
            for (int dk = 0; dk < t.k1.n2; ++dk) t.k1.values[t.k1.index(di, dj, dk)] = get<double>(is);
    t.calibration = cal;
    for (std::size_t i = 0; i < t.total.values.size(); ++i) t.total.values[i] = t.k1.values[i] + t.k2.values[i];
    fill_spectrum(t.k1, t.grid.dV());
    fill_spectrum(t.k2, t.grid.dV());
    fill_spectrum(t.total, t.grid.dV());
    t.refresh_metadata();
    return t;
}

} // namespace chain
