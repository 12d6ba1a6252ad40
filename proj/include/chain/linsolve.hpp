#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chain/fft.hpp"
#include "chain/grid.hpp"

namespace chain {

class LinearSolveError : public std::runtime_error {
public:
    LinearSolveError(const std::string &what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Solves (-Delta_h + a) x = b. Constant a uses the fast solver directly; otherwise conjugate
// gradients preconditioned by (-Delta_h + a_ref).
class ShiftedLaplacian {
public:
    ShiftedLaplacian(const GridSpec &g, std::vector<double> a, double rel_tol = 1e-13, int max_iter = 500);

    const GridSpec &grid() const { return g_; }
    const std::vector<double> &a() const { return a_; }
    bool constant() const { return constant_; }

    void apply(const double *x, double *out) const;
    void solve(const double *b, double *x);
    int last_iterations() const { return last_iters_; }

private:
    GridSpec g_;
    std::vector<double> a_;
    double a_ref_ = 1.0;
    bool constant_ = false;
    double tol_;
    int max_iter_;
    int last_iters_ = 0;
    HelmholtzSolver fast_;
};

// Exact discrete solve of Delta_h w = f (Dirichlet in the plane, periodic in x3).
Field discrete_poisson_solve(const Field &f);

} // namespace chain
