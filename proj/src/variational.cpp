#include "chain/variational.hpp"

#include "chain/fft.hpp"
#include "chain/kernel.hpp"
#include "chain/simd.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chain {

namespace {

Field squared(const Field &u) {
    Field s(u.grid);
    simd::square(u.v.data(), s.v.data(), u.v.size());
    return s;
}

} // namespace

// The table must outlive the functional: its spectra are used by reference.
Functional::Functional(const KernelTable &table, std::vector<double> a)
    : grid_(table.grid), s1_(&table.k1.spectrum), s2_(&table.k2.spectrum),
      op_(std::make_unique<ShiftedLaplacian>(table.grid, std::move(a))) {}

Functional::Functional(const PlanarLogTable &table, std::vector<double> a)
    : grid_(table.grid), op_(std::make_unique<ShiftedLaplacian>(table.grid, std::move(a))) {
    std::vector<double> neg(table.log.values.size()), pos(table.log.values.size());
    for (std::size_t i = 0; i < neg.size(); ++i) {
        neg[i] = std::min(table.log.values[i], 0.0);
        pos[i] = std::max(table.log.values[i], 0.0);
    }
    Convolver &c = convolver_for(grid_);
    own1_ = c.spectrum(neg, grid_.dV());
    own2_ = c.spectrum(pos, grid_.dV());
    s1_ = &own1_;
    s2_ = &own2_;
}

void Functional::potentials(const Field &u, Field &w1, Field &w2) const {
    if (!(u.grid == grid_)) throw std::invalid_argument("Functional: field grid mismatch");
    const Field u2 = squared(u);
    w1 = Field(grid_);
    w2 = Field(grid_);
    convolver_for(grid_).apply(u2.v.data(), grid_.nx, grid_.nz, {s1_, s2_}, {w1.v.data(), w2.v.data()});
}

Field Functional::potential(const Field &u) const {
    Field w1, w2;
    potentials(u, w1, w2);
    for (std::size_t i = 0; i < w1.v.size(); ++i) w1.v[i] += w2.v[i];
    return w1;
}

double Functional::inner_a(const Field &u, const Field &v) const {
    return chain::inner_a(u, v, op_->a());
}

EnergyBreakdown Functional::energy(const Field &u) const {
    Field w;
    return energy(u, w);
}

Field Functional::apply_operator(const Field &u) const {
    Field r(grid_);
    op_->apply(u.v.data(), r.v.data());
    return r;
}

EnergyBreakdown Functional::energy(const Field &u, Field &w) const {
    EnergyBreakdown e;
    Field w1, w2;
    potentials(u, w1, w2);
    const Field u2 = squared(u);
    e.norm_a_sq = norm_a_sq(u);
    e.V1 = inner(w1, u2);
    e.V2 = inner(w2, u2);
    e.V0 = e.V1 + e.V2;
    e.log_norm_sq = log_weight_norm_sq(u);
    e.phi = 0.5 * e.norm_a_sq + 0.25 * e.V0;
    for (std::size_t i = 0; i < w1.v.size(); ++i) w1.v[i] += w2.v[i];
    w = std::move(w1);
    return e;
}

Field Functional::solve(const Field &b) const {
    Field x(grid_, b.tag);
    op_->solve(b.v.data(), x.v.data());
    return x;
}

Field Functional::gradient(const Field &u) const {
    const Field w = potential(u);
    Field wu(grid_);
    for (std::size_t i = 0; i < wu.v.size(); ++i) wu.v[i] = w.v[i] * u.v[i];
    Field g = solve(wu);
    simd::axpy(1.0, u.v.data(), g.v.data(), g.v.size());
    g.tag = u.tag;
    return g;
}

Field Functional::euler_lagrange(const Field &u) const {
    const Field w = potential(u);
    Field r(grid_);
    op_->apply(u.v.data(), r.v.data());
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += w.v[i] * u.v[i];
    return r;
}

double Functional::derivative(const Field &u, const Field &v) const { return inner(euler_lagrange(u), v); }

EnergyBreakdown energy(const Field &u, const PotentialSpec &a, const KernelTable &table) {
    return Functional(table, a.sample(u.grid)).energy(u);
}

Field gradient(const Field &u, const PotentialSpec &a, const KernelTable &table) {
    return Functional(table, a.sample(u.grid)).gradient(u);
}

NehariScale nehari_scale(const EnergyBreakdown &e) {
    NehariScale s;
    if (e.V0 < 0.0 && e.norm_a_sq > 0.0) {
        s.defined = true;
        s.t_u = std::sqrt(-e.norm_a_sq / e.V0);
    }
    return s;
}

NehariScale nehari_scale(const Field &u, const Functional &f) { return nehari_scale(f.energy(u)); }

std::vector<double> fiber_profile(double norm_a_sq, double V0, const std::vector<double> &t_values) {
    std::vector<double> out;
    out.reserve(t_values.size());
    for (double t : t_values) out.push_back(0.5 * norm_a_sq * t * t + 0.25 * V0 * t * t * t * t);
    return out;
}

std::vector<double> fiber_profile(const Field &u, const Functional &f, const std::vector<double> &t_values) {
    const EnergyBreakdown e = f.energy(u);
    return fiber_profile(e.norm_a_sq, e.V0, t_values);
}

double hls_constant() {
    using boost::math::tgamma;
    const double n = 3.0, lam = 1.0;
    return std::sqrt(kPi) * tgamma(n / 2 - lam / 2) / tgamma(n - lam / 2) *
           std::pow(tgamma(n / 2) / tgamma(n), -1.0 + lam / n);
}

BilinearReport bilinear_checks(const Field &u, const Field &v, const KernelTable &table) {
    BilinearReport r;
    const Field u2 = squared(u), v2 = squared(v);
    const Field k1u = convolve_with_table(u2, table, KernelPart::singular);
    const Field k2u = convolve_with_table(u2, table, KernelPart::smooth);
    r.B1 = inner(k1u, v2);
    r.B2 = inner(k2u, v2);
    // Folding the minimal-image distance back to R^3 costs 2^{5/6} in the L^{6/5} norms.
    const double c1 = std::pow(2.0, 5.0 / 6.0) * hls_constant() / (4.0 * kPi);
    const double pu = lp_norm(u, 2.4), pv = lp_norm(v, 2.4);
    r.B1_bound = c1 * pu * pu * pv * pv;
    const double nu = inner(u, u), nv = inner(v, v);
    const double S = table.meta.sup_abs_k2_below_R;
    r.B2_lower = -S * nu * nv;
    r.B2_upper = S * nu * nv + table.meta.C_K * (log_weight_norm_sq(u) * nv + nu * log_weight_norm_sq(v));
    r.margin_B1 = r.B1_bound - std::abs(r.B1);
    r.margin_B2_lower = r.B2 - r.B2_lower;
    r.margin_B2_upper = r.B2_upper - r.B2;
    return r;
}

MountainReport mountain_geometry(const Functional &f, const std::vector<Field> &directions) {
    MountainReport m;
    m.samples = static_cast<int>(directions.size());
    // On the unit a-sphere Phi(b u) = b^2/2 + b^4 V0/4 and Phi'(bu)bu = b^2 + b^4 V0.
    double most_negative = 0.0;
    std::vector<double> v0(directions.size());
    for (std::size_t i = 0; i < directions.size(); ++i) {
        const EnergyBreakdown e = f.energy(directions[i]);
        if (!(e.norm_a_sq > 0.0)) throw std::invalid_argument("mountain_geometry: zero direction");
        v0[i] = e.V0 / (e.norm_a_sq * e.norm_a_sq);
        most_negative = std::min(most_negative, v0[i]);
    }
    m.beta = most_negative < 0.0 ? 0.5 / std::sqrt(-most_negative) : 1.0;
    m.min_phi = m.min_derivative = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < directions.size(); ++i) {
        Field u = directions[i];
        const double s = m.beta / std::sqrt(f.norm_a_sq(u));
        for (double &x : u.v) x *= s;
        const EnergyBreakdown e = f.energy(u);
        m.min_phi = std::min(m.min_phi, e.phi);
        m.min_derivative = std::min(m.min_derivative, f.derivative(u, u));
    }
    return m;
}

Field random_smooth_field(const GridSpec &g, std::mt19937_64 &rng, int bumps) {
    std::uniform_real_distribution<double> pos(-0.4 * g.L, 0.4 * g.L), amp(-1.0, 1.0), wid(0.8, 2.5),
        zph(0.0, 2.0 * kPi);
    Field u(g);
    for (int b = 0; b < bumps; ++b) {
        const double cx = pos(rng), cy = pos(rng), A = amp(rng), w = wid(rng), ph = zph(rng), zm = amp(rng);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nx; ++j) {
                const double dx = g.x(i) - cx, dy = g.x(j) - cy;
                const double base = A * std::exp(-(dx * dx + dy * dy) / (w * w));
                for (int k = 0; k < g.nz; ++k) {
                    const double zf = g.planar ? 1.0 : 1.0 + 0.5 * zm * std::cos(kPi * g.z(k) / g.ell + ph);
                    u(i, j, k) += base * zf;
                }
            }
    }
    return u;
}

} // namespace chain
