#include "chain/fields.hpp"

#include "chain/simd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace chain {

namespace {

void require_same(const GridSpec &a, const GridSpec &b) {
    if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

template <class T> void put(std::ofstream &os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char *>(b), sizeof(T));
}

template <class T> T get(std::ifstream &is) {
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char *>(b), sizeof(T));
    if (!is) throw std::runtime_error("field dump truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

} // namespace

void neg_laplacian(const GridSpec &g, const double *u, double *out) {
    const int n = g.nx, nz = g.nz;
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cz = g.planar ? 0.0 : 1.0 / (g.hz() * g.hz());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double *c = u + g.idx(i, j, 0);
            const double *xm = i > 0 ? u + g.idx(i - 1, j, 0) : nullptr;
            const double *xp = i + 1 < n ? u + g.idx(i + 1, j, 0) : nullptr;
            const double *ym = j > 0 ? u + g.idx(i, j - 1, 0) : nullptr;
            const double *yp = j + 1 < n ? u + g.idx(i, j + 1, 0) : nullptr;
            double *o = out + g.idx(i, j, 0);
            for (int k = 0; k < nz; ++k) {
                double s = 4.0 * c[k];
                if (xm) s -= xm[k];
                if (xp) s -= xp[k];
                if (ym) s -= ym[k];
                if (yp) s -= yp[k];
                double r = cx * s;
                if (cz != 0.0) {
                    const int km = k == 0 ? nz - 1 : k - 1, kp = k + 1 == nz ? 0 : k + 1;
                    r += cz * (2.0 * c[k] - c[km] - c[kp]);
                }
                o[k] = r;
            }
        }
}

Field neg_laplacian(const Field &u) {
    Field out(u.grid, u.tag);
    neg_laplacian(u.grid, u.v.data(), out.v.data());
    return out;
}

double inner(const Field &u, const Field &v) {
    require_same(u.grid, v.grid);
    return simd::dot(u.v.data(), v.v.data(), u.v.size()) * u.grid.dV();
}

double grad_inner(const Field &u, const Field &v) {
    require_same(u.grid, v.grid);
    const GridSpec &g = u.grid;
    const int n = g.nx, nz = g.nz;
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cz = g.planar ? 0.0 : 1.0 / (g.hz() * g.hz());
    // Row sums are combined with compensation to keep the rounding noise independent of the grid size.
    simd::CompensatedSum acc;
    for (int i = -1; i < n; ++i) {
        double sx = 0.0, sz = 0.0;
        // Planar edges, including the edges to the zero ghosts.
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < nz; ++k) {
                const double du = (i + 1 < n ? u(i + 1, j, k) : 0.0) - (i >= 0 ? u(i, j, k) : 0.0);
                const double dv = (i + 1 < n ? v(i + 1, j, k) : 0.0) - (i >= 0 ? v(i, j, k) : 0.0);
                sx += du * dv;
            }
        if (i >= 0) {
            for (int j = -1; j < n; ++j)
                for (int k = 0; k < nz; ++k) {
                    const double du = (j + 1 < n ? u(i, j + 1, k) : 0.0) - (j >= 0 ? u(i, j, k) : 0.0);
                    const double dv = (j + 1 < n ? v(i, j + 1, k) : 0.0) - (j >= 0 ? v(i, j, k) : 0.0);
                    sx += du * dv;
                }
            if (!g.planar)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < nz; ++k) {
                        const int kp = k + 1 == nz ? 0 : k + 1;
                        sz += (u(i, j, kp) - u(i, j, k)) * (v(i, j, kp) - v(i, j, k));
                    }
        }
        acc.add(cx * sx + cz * sz);
    }
    return acc.value() * g.dV();
}

double grad_z_sq(const Field &u) {
    const GridSpec &g = u.grid;
    if (g.planar) return 0.0;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j)
            for (int k = 0; k < g.nz; ++k) {
                const int kp = k + 1 == g.nz ? 0 : k + 1;
                const double d = u(i, j, kp) - u(i, j, k);
                s += d * d;
            }
    return s / (g.hz() * g.hz()) * g.dV();
}

double inner_a(const Field &u, const Field &v, const std::vector<double> &a) {
    require_same(u.grid, v.grid);
    if (a.size() != u.v.size()) throw std::invalid_argument("potential samples do not match the grid");
    return simd::wdot(a.data(), u.v.data(), v.v.data(), u.v.size()) * u.grid.dV() + grad_inner(u, v);
}

double norm_a_sq(const Field &u, const std::vector<double> &a) { return inner_a(u, u, a); }

double norm_a(const Field &u, const PotentialSpec &a) { return std::sqrt(norm_a_sq(u, a.sample(u.grid))); }

double log_weight_norm_sq(const Field &u) {
    const GridSpec &g = u.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j)
            for (int k = 0; k < g.nz; ++k) {
                const double r = std::sqrt(g.x(i) * g.x(i) + g.x(j) * g.x(j) + g.z(k) * g.z(k));
                const double val = u(i, j, k);
                s += std::log1p(r) * val * val;
            }
    return s * g.dV();
}

double log_weight_norm(const Field &u) { return std::sqrt(log_weight_norm_sq(u)); }

double lp_norm(const Field &u, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : u.v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        s = simd::dot(u.v.data(), u.v.data(), u.v.size());
    } else {
        for (double x : u.v) s += std::pow(std::abs(x), p);
    }
    return std::pow(s * u.grid.dV(), 1.0 / p);
}

Field convolve_with_table(const Field &f, const KernelTable &table, KernelPart part) {
    const GridSpec &g = f.grid;
    if (g.nx != table.grid.nx || g.nz != table.grid.nz || g.L != table.grid.L || g.ell != table.grid.ell || g.planar)
        throw std::invalid_argument("convolve_with_table: field grid does not match the kernel table");
    const Spectrum *spec = part == KernelPart::total ? &table.total.spectrum
                           : part == KernelPart::singular ? &table.k1.spectrum
                                                          : &table.k2.spectrum;
    Field out(g);
    convolver_for(g).apply(f.v.data(), g.nx, g.nz, {spec}, {out.v.data()});
    return out;
}

void dump_field(const Field &u, const std::string &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.write("CHNF1", 5);
    put<double>(os, u.grid.L);
    put<std::int32_t>(os, u.grid.nx);
    put<double>(os, u.grid.ell);
    put<std::int32_t>(os, u.grid.nz);
    put<std::uint8_t>(os, u.grid.planar ? 1 : 0);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(u.tag));
    for (double x : u.v) put<double>(os, x);
    if (!os) throw std::runtime_error("write failed: " + path);
}

Field load_field(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "CHNF1", 5) != 0) throw std::runtime_error("not a field dump: " + path);
    GridSpec g;
    g.L = get<double>(is);
    g.nx = get<std::int32_t>(is);
    g.ell = get<double>(is);
    g.nz = get<std::int32_t>(is);
    g.planar = get<std::uint8_t>(is) != 0;
    const auto tag = get<std::uint8_t>(is);
    if (tag > 3) throw std::runtime_error("bad symmetry tag in " + path);
    g.validate();
    Field u(g, static_cast<Symmetry>(tag));
    for (double &x : u.v) x = get<double>(is);
    return u;
}

void write_slice_csv(const Field &u, char axis, int index, const std::string &path) {
    const GridSpec &g = u.grid;
    if (axis != 'x' && axis != 'y' && axis != 'z') throw std::invalid_argument("slice axis must be x, y or z");
    const int lim = axis == 'z' ? g.nz : g.nx;
    if (index < 0 || index >= lim) throw std::out_of_range("slice index out of range");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    os << "x1,x2,x3,value\n";
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j)
            for (int k = 0; k < g.nz; ++k) {
                if ((axis == 'x' && i != index) || (axis == 'y' && j != index) || (axis == 'z' && k != index)) continue;
                os << g.x(i) << ',' << g.x(j) << ',' << g.z(k) << ',' << u(i, j, k) << '\n';
            }
}

} // namespace chain
