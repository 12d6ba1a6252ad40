#pragma once

#include <string>
#include <vector>

#include "chain/fields.hpp"
#include "chain/kernel_table.hpp"

namespace chain {

// True for cells inside the inner `fraction` of the planar box (all x3 levels).
bool interior_cell(const GridSpec &g, int i, int j, double fraction = 0.7);

// w = K[u2] through the kernel table.
Field apply_green(const Field &u2, const KernelTable &table);

// ||Delta_h w - u2||_2 / ||u2||_2 over the interior subdomain.
double poisson_residual(const Field &w, const Field &u2, double fraction = 0.7);

// (1/2pi) int log|x'-y'| u2(y') dy' on the planar grid.
Field planar_log_potential(const Field &u2_planar, const PlanarLogTable &table);
Field planar_log_potential(const Field &u2_planar, int patch = 4);

// Smallest C with |K[u^2](x)| <= (C + log(1+|x|)) ||u||_X^2 on the grid, ||u||_X^2 = ||u||_a^2 + |u|_*^2.
double growth_constant(const Field &u, const std::vector<double> &a, const KernelTable &table);

// Per-mode route: planar FFT on a padded periodic box and the periodic ODE Green operator in x3
// for every nonzero planar mode. Input must have zero planar mean on every x3 level.
Field spectral_green_crosscheck(const Field &u2, int pad_factor = 4);

// Radial bump phi(r) = amplitude * exp(1 - 1/(1 - r^2/R^2)) for r < R.
struct Bump {
    double radius = 1.0;
    double amplitude = 1.0;
    double operator()(double r) const;
};

struct NewtonRow {
    double ell = 0.0;
    double D_ell = 0.0;
    double D_inf = 0.0;
    double rel_err = 0.0;
};

// -(1/4pi) int int phi^2 phi^2 / |x-y| by the shell theorem (one-dimensional quadrature).
double newtonian_self_energy(const Bump &phi);

// D(ell) = sum sum K(x-y; ell) phi^2 phi^2 on a cube grid of `cells` per axis covering the support.
double slab_self_energy(const Bump &phi, double ell, int cells);

std::vector<NewtonRow> newtonian_limit_experiment(const Bump &phi, const std::vector<double> &ells, int cells = 32);

void write_newtonian_csv(const std::vector<NewtonRow> &rows, const std::string &path);

} // namespace chain
