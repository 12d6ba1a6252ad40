#include "chain/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace chain {

GridSpec GridSpec::make_planar(double L, int nx) {
    GridSpec g;
    g.L = L;
    g.nx = nx;
    g.ell = 0.5;
    g.nz = 1;
    g.planar = true;
    return g;
}

void GridSpec::validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid: L must be positive");
    if (nx < 8 || nx % 2 != 0) throw std::invalid_argument("grid: nx must be even and >= 8");
    if (planar) {
        if (nz != 1) throw std::invalid_argument("grid: planar grid must have nz = 1");
        return;
    }
    if (!(ell > 0.0) || !std::isfinite(ell)) throw std::invalid_argument("grid: ell must be positive");
    if (nz < 8 || nz % 2 != 0) throw std::invalid_argument("grid: nz must be even and >= 8");
}

const char *to_string(Symmetry s) {
    switch (s) {
    case Symmetry::general: return "general";
    case Symmetry::radial: return "radial";
    case Symmetry::g_invariant: return "g_invariant";
    case Symmetry::planar_constant: return "planar_constant";
    }
    return "general";
}

Symmetry symmetry_from_string(const std::string &s) {
    if (s == "general") return Symmetry::general;
    if (s == "radial") return Symmetry::radial;
    if (s == "g_invariant") return Symmetry::g_invariant;
    if (s == "planar_constant") return Symmetry::planar_constant;
    throw std::invalid_argument("unknown symmetry tag: " + s);
}

Field sample(const GridSpec &g, const std::function<double(double, double, double)> &f, Symmetry tag) {
    Field u(g, tag);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j)
            for (int k = 0; k < g.nz; ++k) u(i, j, k) = f(g.x(i), g.x(j), g.z(k));
    return u;
}

Field extend_constant(const Field &planar, const GridSpec &slab) {
    if (planar.grid.nx != slab.nx || planar.grid.L != slab.L || planar.grid.nz != 1)
        throw std::invalid_argument("extend_constant: planar grid does not match the slab grid");
    Field u(slab, Symmetry::planar_constant);
    for (int i = 0; i < slab.nx; ++i)
        for (int j = 0; j < slab.nx; ++j) {
            const double val = planar(i, j, 0);
            for (int k = 0; k < slab.nz; ++k) u(i, j, k) = val;
        }
    return u;
}

Field restrict_level(const Field &u, int k) {
    Field p(u.grid.plane());
    for (int i = 0; i < u.grid.nx; ++i)
        for (int j = 0; j < u.grid.nx; ++j) p(i, j, 0) = u(i, j, k);
    return p;
}

PotentialSpec PotentialSpec::constant(double a0) {
    PotentialSpec p;
    p.eval = [a0](double, double) { return a0; };
    p.a_min = a0;
    p.description = "constant";
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::well(double a0, double depth, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("potential: well width must be positive");
    PotentialSpec p;
    p.eval = [=](double rho, double) { return a0 - depth * std::exp(-rho * rho / (width * width)); };
    p.a_min = depth > 0.0 ? a0 - depth : a0;
    p.description = "well";
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::zmod(double a0, double amp, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("potential: period must be positive");
    PotentialSpec p;
    p.eval = [=](double, double x3) { return a0 + amp * std::cos(2.0 * 3.14159265358979323846 * x3 / period); };
    p.a_min = a0 - std::abs(amp);
    p.z_independent = amp == 0.0;
    p.description = "zmod";
    p.validate();
    return p;
}

void PotentialSpec::validate() const {
    if (!eval) throw std::invalid_argument("potential: no evaluator");
    if (!(a_min > 0.0)) throw std::invalid_argument("potential: a_min must be positive");
    if (!radial) throw std::invalid_argument("potential: a must be radial in x'");
}

std::vector<double> PotentialSpec::sample(const GridSpec &g) const {
    validate();
    std::vector<double> a(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double rho = std::hypot(g.x(i), g.x(j));
            for (int k = 0; k < g.nz; ++k) {
                const double val = eval(rho, g.z(k));
                if (!(val >= a_min * (1.0 - 1e-12))) throw std::invalid_argument("potential: sample below a_min");
                a[g.idx(i, j, k)] = val;
            }
        }
    return a;
}

} // namespace chain
