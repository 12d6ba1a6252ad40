#pragma once

#include <memory>
#include <random>
#include <vector>

#include "chain/fields.hpp"
#include "chain/kernel_table.hpp"
#include "chain/linsolve.hpp"

namespace chain {

struct EnergyBreakdown {
    double norm_a_sq = 0.0;    // ||u||_a^2
    double V1 = 0.0;           // singular (near-field) part of the quartic form, <= 0
    double V2 = 0.0;           // smooth (far-field) part
    double V0 = 0.0;           // V1 + V2
    double log_norm_sq = 0.0;  // |u|_*^2
    double phi = 0.0;          // norm_a_sq / 2 + V0 / 4
};

struct NehariScale {
    double t_u = 0.0;
    bool defined = false;
};

// Phi(u) = ||u||_a^2 / 2 + V0(u) / 4 on a slab grid (kernel table) or on a planar grid
// ((1/2pi) log kernel, split into its negative and positive parts).
class Functional {
public:
    Functional(const KernelTable &table, std::vector<double> a);
    Functional(const PlanarLogTable &table, std::vector<double> a);

    const GridSpec &grid() const { return grid_; }
    const std::vector<double> &a() const { return op_->a(); }
    bool planar() const { return grid_.planar; }

    // Both kernel parts of K[u^2].
    void potentials(const Field &u, Field &w1, Field &w2) const;
    Field potential(const Field &u) const;

    EnergyBreakdown energy(const Field &u) const;
    // Energy plus the total potential K[u^2] in one convolution pass.
    EnergyBreakdown energy(const Field &u, Field &w) const;
    // (-Delta_h + a) u
    Field apply_operator(const Field &u) const;
    // a-metric representative of Phi'(u): (-Delta_h + a) g = (-Delta_h + a) u + K[u^2] u.
    Field gradient(const Field &u) const;
    // Residual field -Delta_h u + a u + K[u^2] u.
    Field euler_lagrange(const Field &u) const;
    // Phi'(u) v = <(-Delta_h + a) u + K[u^2] u, v>.
    double derivative(const Field &u, const Field &v) const;
    double inner_a(const Field &u, const Field &v) const;
    double norm_a_sq(const Field &u) const { return inner_a(u, u); }

    // Solves (-Delta_h + a) x = b.
    Field solve(const Field &b) const;
    int last_linear_iterations() const { return op_->last_iterations(); }

private:
    GridSpec grid_;
    const Spectrum *s1_ = nullptr, *s2_ = nullptr;
    Spectrum own1_, own2_;
    std::unique_ptr<ShiftedLaplacian> op_;
};

EnergyBreakdown energy(const Field &u, const PotentialSpec &a, const KernelTable &table);
Field gradient(const Field &u, const PotentialSpec &a, const KernelTable &table);

NehariScale nehari_scale(const EnergyBreakdown &e);
NehariScale nehari_scale(const Field &u, const Functional &f);

// Phi(t u) = norm_a_sq t^2 / 2 + V0 t^4 / 4.
std::vector<double> fiber_profile(double norm_a_sq, double V0, const std::vector<double> &t_values);
std::vector<double> fiber_profile(const Field &u, const Functional &f, const std::vector<double> &t_values);

// Sharp Hardy-Littlewood-Sobolev constant for n = 3, lambda = 1, p = q = 6/5.
double hls_constant();

struct BilinearReport {
    double B1 = 0.0, B1_bound = 0.0;           // |B1(u^2,v^2)| <= C |u|_{12/5}^2 |v|_{12/5}^2
    double B2 = 0.0, B2_lower = 0.0;           // B2 >= -S |u|_2^2 |v|_2^2
    double B2_upper = 0.0;                     // B2 <= S |u|^2|v|^2 + C_K (|u|_*^2 |v|_2^2 + |u|_2^2 |v|_*^2)
    double margin_B1 = 0.0, margin_B2_lower = 0.0, margin_B2_upper = 0.0;
    bool ok() const { return margin_B1 >= 0.0 && margin_B2_lower >= 0.0 && margin_B2_upper >= 0.0; }
};

// Both sides of the bilinear estimates with constants measured from the table metadata.
BilinearReport bilinear_checks(const Field &u, const Field &v, const KernelTable &table);

struct MountainReport {
    double beta = 0.0;
    double min_phi = 0.0;       // min Phi over the sphere ||u||_a = beta
    double min_derivative = 0.0;  // min Phi'(u) u over the same sphere
    int samples = 0;
};

// Measured radius beta with Phi > 0 and Phi'(u)u > 0 on ||u||_a = beta, over the given directions.
MountainReport mountain_geometry(const Functional &f, const std::vector<Field> &directions);

// Smooth random field: a few random Gaussian bumps, optionally x3-modulated. Deterministic in rng.
Field random_smooth_field(const GridSpec &g, std::mt19937_64 &rng, int bumps = 5);

} // namespace chain
