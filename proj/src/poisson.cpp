#include "chain/poisson.hpp"

#include "chain/kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace chain {

bool interior_cell(const GridSpec &g, int i, int j, double fraction) {
    const double lim = fraction * g.L;
    return std::abs(g.x(i)) <= lim && std::abs(g.x(j)) <= lim;
}

Field apply_green(const Field &u2, const KernelTable &table) { return convolve_with_table(u2, table, KernelPart::total); }

double poisson_residual(const Field &w, const Field &u2, double fraction) {
    if (!(w.grid == u2.grid)) throw std::invalid_argument("poisson_residual: grid mismatch");
    const GridSpec &g = w.grid;
    const Field lap = neg_laplacian(w);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j) {
            if (!interior_cell(g, i, j, fraction)) continue;
            for (int k = 0; k < g.nz; ++k) {
                const std::size_t id = g.idx(i, j, k);
                const double r = -lap.v[id] - u2.v[id];
                num += r * r;
                den += u2.v[id] * u2.v[id];
            }
        }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

Field planar_log_potential(const Field &u2, const PlanarLogTable &table) {
    const GridSpec &g = u2.grid;
    if (!g.planar || !(g == table.grid)) throw std::invalid_argument("planar_log_potential: grid mismatch");
    Field out(g);
    convolver_for(g).apply(u2.v.data(), g.nx, 1, {&table.log.spectrum}, {out.v.data()});
    return out;
}

Field planar_log_potential(const Field &u2, int patch) { return planar_log_potential(u2, build_planar_log_table(u2.grid, patch)); }

double growth_constant(const Field &u, const std::vector<double> &a, const KernelTable &table) {
    Field u2(u.grid);
    for (std::size_t i = 0; i < u.v.size(); ++i) u2.v[i] = u.v[i] * u.v[i];
    const Field w = apply_green(u2, table);
    const double xn = norm_a_sq(u, a) + log_weight_norm_sq(u);
    if (xn == 0.0) return 0.0;
    const GridSpec &g = u.grid;
    double c = -1e300;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j)
            for (int k = 0; k < g.nz; ++k) {
                const double r = std::sqrt(g.x(i) * g.x(i) + g.x(j) * g.x(j) + g.z(k) * g.z(k));
                c = std::max(c, std::abs(w(i, j, k)) / xn - std::log1p(r));
            }
    return c;
}

Field spectral_green_crosscheck(const Field &u2, int pad_factor) {
    const GridSpec &g = u2.grid;
    if (g.planar) throw std::invalid_argument("spectral_green_crosscheck: slab field required");
    const int n = g.nx, p = pad_factor * n, pc = p / 2 + 1, nz = g.nz;
    const double h = g.hx();
    for (int k = 0; k < nz; ++k) {
        double m = 0.0, s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                m += u2(i, j, k);
                s += std::abs(u2(i, j, k));
            }
        if (std::abs(m) > 1e-10 * (s + 1e-300)) throw std::invalid_argument("spectral_green_crosscheck: planar mean must vanish");
    }
    std::vector<double> real(static_cast<std::size_t>(p) * p);
    std::vector<fftw_complex> modes(static_cast<std::size_t>(p) * pc * nz);
    std::vector<fftw_complex> buf(static_cast<std::size_t>(p) * pc);
    fftw_plan fwd = fftw_plan_dft_r2c_2d(p, p, real.data(), buf.data(), FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r_2d(p, p, buf.data(), real.data(), FFTW_ESTIMATE);
    for (int k = 0; k < nz; ++k) {
        std::fill(real.begin(), real.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) real[static_cast<std::size_t>(i) * p + j] = u2(i, j, k);
        fftw_execute(fwd);
        for (std::size_t m = 0; m < buf.size(); ++m) {
            modes[m * nz + k][0] = buf[m][0];
            modes[m * nz + k][1] = buf[m][1];
        }
    }
    std::vector<double> re(nz), im(nz);
    const double box = p * h;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < pc; ++b) {
            const std::size_t m = static_cast<std::size_t>(a) * pc + b;
            const int fa = a <= p / 2 ? a : a - p;
            const double r = 2.0 * kPi * std::hypot(static_cast<double>(fa), static_cast<double>(b)) / box;
            if (a == 0 && b == 0) {
                for (int k = 0; k < nz; ++k) modes[m * nz + k][0] = modes[m * nz + k][1] = 0.0;
                continue;
            }
            for (int k = 0; k < nz; ++k) {
                re[k] = modes[m * nz + k][0];
                im[k] = modes[m * nz + k][1];
            }
            const auto wr = ode_apply(r, g.ell, re), wi = ode_apply(r, g.ell, im);
            for (int k = 0; k < nz; ++k) {
                modes[m * nz + k][0] = 2.0 * kPi * wr[k];
                modes[m * nz + k][1] = 2.0 * kPi * wi[k];
            }
        }
    Field out(g);
    const double norm = 1.0 / (static_cast<double>(p) * p);
    for (int k = 0; k < nz; ++k) {
        for (std::size_t m = 0; m < buf.size(); ++m) {
            buf[m][0] = modes[m * nz + k][0];
            buf[m][1] = modes[m * nz + k][1];
        }
        fftw_execute(inv);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i, j, k) = real[static_cast<std::size_t>(i) * p + j] * norm;
    }
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    return out;
}

double Bump::operator()(double r) const {
    if (r >= radius) return 0.0;
    const double q = r / radius;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - q * q));
}

double newtonian_self_energy(const Bump &phi) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto dens = [&](double r) {
        const double f = phi(r);
        return f * f;
    };
    auto mass_within = [&](double r) {
        if (r <= 0.0) return 0.0;
        return 4.0 * kPi * GK::integrate([&](double s) { return dens(s) * s * s; }, 0.0, r, 12, 1e-14);
    };
    const double I = GK::integrate([&](double r) { return mass_within(r) * dens(r) * r; }, 0.0, phi.radius, 12, 1e-13);
    return -2.0 * I;
}

double slab_self_energy(const Bump &phi, double ell, int cells) {
    if (!(phi.radius < ell)) throw std::invalid_argument("newtonian_limit_experiment: bump support must lie inside the slab");
    if (cells < 4) throw std::invalid_argument("newtonian_limit_experiment: need at least 4 cells per axis");
    const int n = cells, m = 2 * n;
    const double h = 2.0 * phi.radius / n, R = phi.radius;
    // Vertical axis padded to 2n so the circular convolution does not wrap.
    std::vector<double> dens(static_cast<std::size_t>(n) * n * m, 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double x = -R + (i + 0.5) * h, y = -R + (j + 0.5) * h, z = -R + (k + 0.5) * h;
                const double f = phi(std::sqrt(x * x + y * y + z * z));
                dens[(static_cast<std::size_t>(i) * n + j) * m + k] = f * f;
                total += f * f;
            }
    if (total == 0.0) return 0.0;
    // Smooth part: one Hankel batch over all vertical offsets, one evaluation per planar radius.
    std::vector<std::array<double, 2>> ranges(n);
    for (int d = 0; d < n; ++d) {
        const double t = std::abs(reduce_dz(d * h, ell));
        ranges[d] = {t, t};
    }
    const HankelBatch batch(ell, std::sqrt(2.0) * n * h, ranges);
    std::map<long, std::vector<double>> k2cols;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b) {
            const long key = static_cast<long>(a) * a + static_cast<long>(b) * b;
            if (k2cols.count(key)) continue;
            std::vector<double> out(n), err(n);
            const double rho = std::sqrt(static_cast<double>(key)) * h, one = 1.0;
            batch.eval({&rho, 1}, {&one, 1}, out.data(), err.data());
            for (double e : err)
                if (e > 1e-8) throw QuadratureError("newtonian experiment quadrature did not converge", e);
            k2cols[key] = std::move(out);
        }
    const double cal = line_average_calibration(ell);
    std::vector<double> lattice(static_cast<std::size_t>(m) * m * m, 0.0);
    for (int iw = 0; iw < m; ++iw)
        for (int jw = 0; jw < m; ++jw)
            for (int kw = 0; kw < m; ++kw) {
                const int di = iw < n ? iw : iw - m, dj = jw < n ? jw : jw - m, dk = kw < n ? kw : kw - m;
                const int a = std::abs(di), b = std::abs(dj), c = std::abs(dk);
                if (a == n || b == n || c == n) continue;
                double k1;
                if ((c + 0.5) * h <= ell) {
                    const double I = box_integral_inv_r((a - 0.5) * h, (a + 0.5) * h, (b - 0.5) * h, (b + 0.5) * h,
                                                        (c - 0.5) * h, (c + 0.5) * h);
                    k1 = -I / (4.0 * kPi * h * h * h);
                } else {
                    const double t = reduce_dz(c * h, ell);
                    k1 = -1.0 / (4.0 * kPi * std::sqrt((a * h) * (a * h) + (b * h) * (b * h) + t * t));
                }
                const double k2 = k2cols.at(static_cast<long>(std::max(a, b)) * std::max(a, b) +
                                            static_cast<long>(std::min(a, b)) * std::min(a, b))[c] + cal;
                lattice[(static_cast<std::size_t>(iw) * m + jw) * m + kw] = k1 + k2;
            }
    Convolver conv(m, m, m);
    const Spectrum spec = conv.spectrum(lattice, h * h * h);
    std::vector<double> w(dens.size());
    conv.apply(dens.data(), n, m, {&spec}, {w.data()});
    double D = 0.0;
    for (std::size_t i = 0; i < dens.size(); ++i) D += dens[i] * w[i];
    return D * h * h * h;
}

std::vector<NewtonRow> newtonian_limit_experiment(const Bump &phi, const std::vector<double> &ells, int cells) {
    std::vector<NewtonRow> rows;
    const double dinf = phi.amplitude == 0.0 ? 0.0 : newtonian_self_energy(phi);
    for (double ell : ells) {
        NewtonRow r;
        r.ell = ell;
        r.D_ell = slab_self_energy(phi, ell, cells);
        r.D_inf = dinf;
        r.rel_err = dinf == 0.0 ? 0.0 : std::abs(r.D_ell - dinf) / std::abs(dinf);
        rows.push_back(r);
    }
    return rows;
}

void write_newtonian_csv(const std::vector<NewtonRow> &rows, const std::string &path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "ell,D_ell,D_inf,rel_err\n";
    for (const auto &r : rows) os << r.ell << ',' << r.D_ell << ',' << r.D_inf << ',' << r.rel_err << '\n';
}

} // namespace chain
