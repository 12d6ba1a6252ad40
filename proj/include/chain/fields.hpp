#pragma once

#include <string>
#include <vector>

#include "chain/grid.hpp"
#include "chain/kernel_table.hpp"

namespace chain {

// Discrete pair: forward differences on every cell edge (zero ghosts beyond the planar box,
// circular in x3) and -Delta_h = D^T D, so <-Delta_h u, v> = <grad_h u, grad_h v> exactly.
void neg_laplacian(const GridSpec &g, const double *u, double *out);
Field neg_laplacian(const Field &u);

// sum u v dV
double inner(const Field &u, const Field &v);
// <grad_h u, grad_h v> with the cell volume
double grad_inner(const Field &u, const Field &v);
// Vertical part of <grad_h u, grad_h u>.
double grad_z_sq(const Field &u);

double inner_a(const Field &u, const Field &v, const std::vector<double> &a);
double norm_a_sq(const Field &u, const std::vector<double> &a);
double norm_a(const Field &u, const PotentialSpec &a);

// |u|_*^2 = int log(1+|x|) u^2 with the full 3D radius.
double log_weight_norm_sq(const Field &u);
double log_weight_norm(const Field &u);

// (sum |u|^p dV)^{1/p}; p = infinity gives the max norm.
double lp_norm(const Field &u, double p);

enum class KernelPart { total, singular, smooth };

Field convolve_with_table(const Field &f, const KernelTable &table, KernelPart part = KernelPart::total);

// Binary dump: "CHNF1", f64 L, i32 nx, f64 ell, i32 nz, u8 planar, u8 symmetry tag, samples (f64 LE).
void dump_field(const Field &u, const std::string &path);
Field load_field(const std::string &path);

// CSV rows x1,x2,x3,value for the plane axis = index ('x', 'y' or 'z').
void write_slice_csv(const Field &u, char axis, int index, const std::string &path);

} // namespace chain
