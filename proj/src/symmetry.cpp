#include "chain/symmetry.hpp"

#include "chain/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace chain {

namespace {

// Squared-radius class of every planar node, numbered densely.
struct RadiusClasses {
    std::vector<int> cls;  // per planar node
    int count = 0;
};

const RadiusClasses &classes_for(int n) {
    thread_local std::unordered_map<int, RadiusClasses> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    RadiusClasses rc;
    rc.cls.resize(static_cast<std::size_t>(n) * n);
    std::unordered_map<long, int> ids;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const long a = 2 * i + 1 - n, b = 2 * j + 1 - n;
            const auto [pos, fresh] = ids.emplace(a * a + b * b, rc.count);
            if (fresh) ++rc.count;
            rc.cls[static_cast<std::size_t>(i) * n + j] = pos->second;
        }
    return cache.emplace(n, std::move(rc)).first->second;
}

double max_abs(const std::vector<double> &v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

Field radialize(const Field &u) {
    const GridSpec &g = u.grid;
    const RadiusClasses &rc = classes_for(g.nx);
    const std::size_t plane = static_cast<std::size_t>(g.nx) * g.nx;
    std::vector<double> sum(static_cast<std::size_t>(rc.count) * g.nz, 0.0);
    std::vector<int> cnt(rc.count, 0);
    for (std::size_t p = 0; p < plane; ++p) {
        ++cnt[rc.cls[p]];
        for (int k = 0; k < g.nz; ++k) sum[static_cast<std::size_t>(rc.cls[p]) * g.nz + k] += u.v[p * g.nz + k];
    }
    // Averaging commutes with sigma and with x3-translations, so stronger tags survive.
    Field out(g, u.tag == Symmetry::general ? Symmetry::radial : u.tag);
    for (std::size_t p = 0; p < plane; ++p)
        for (int k = 0; k < g.nz; ++k)
            out.v[p * g.nz + k] = sum[static_cast<std::size_t>(rc.cls[p]) * g.nz + k] / cnt[rc.cls[p]];
    return out;
}

Field sigma_apply(const Field &u) {
    const GridSpec &g = u.grid;
    if (g.planar || g.nz % 2 != 0) throw std::invalid_argument("sigma_apply: needs a slab grid with even nz");
    Field out(g, u.tag);
    const int half = g.nz / 2;
    const std::size_t plane = static_cast<std::size_t>(g.nx) * g.nx;
    for (std::size_t p = 0; p < plane; ++p)
        for (int k = 0; k < g.nz; ++k) out.v[p * g.nz + k] = -u.v[p * g.nz + (k + half) % g.nz];
    return out;
}

Field project_G(const Field &u) {
    const Field s = sigma_apply(u);
    Field h(u.grid);
    for (std::size_t i = 0; i < u.v.size(); ++i) h.v[i] = 0.5 * (u.v[i] + s.v[i]);
    Field out = radialize(h);
    out.tag = Symmetry::g_invariant;
    return out;
}

double d3_energy_fraction(const Field &u) {
    const double total = grad_inner(u, u);
    if (!(total > 0.0)) throw std::invalid_argument("d3_energy_fraction: field has zero gradient");
    return grad_z_sq(u) / total;
}

double radial_defect(const Field &u) {
    const Field r = radialize(u);
    const double m = max_abs(u.v);
    if (m == 0.0) return 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < u.v.size(); ++i) d = std::max(d, std::abs(u.v[i] - r.v[i]));
    return d / m;
}

double sigma_defect(const Field &u) {
    const Field s = sigma_apply(u);
    const double m = max_abs(u.v);
    if (m == 0.0) return 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < u.v.size(); ++i) d = std::max(d, std::abs(u.v[i] - s.v[i]));
    return d / m;
}

Field project_to(const Field &u, Symmetry s) {
    switch (s) {
    case Symmetry::radial: {
        Field r = radialize(u);
        r.tag = Symmetry::radial;
        return r;
    }
    case Symmetry::g_invariant:
        return project_G(u);
    case Symmetry::planar_constant: {
        Field r = u.grid.planar ? radialize(u) : u;
        r.tag = Symmetry::planar_constant;
        return r;
    }
    case Symmetry::general:
        break;
    }
    Field r = u;
    r.tag = Symmetry::general;
    return r;
}

} // namespace chain
