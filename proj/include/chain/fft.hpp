#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "chain/grid.hpp"

namespace chain {

using Spectrum = std::vector<std::complex<double>>;

// Sets the FFTW thread count for plans created afterwards.
void set_fft_threads(int n);

// Zero-padded planar / circular vertical convolution on a lattice of size n0 x n1 x n2.
// Not thread-safe; use one instance per thread.
class Convolver {
public:
    Convolver(int n0, int n1, int n2);
    ~Convolver();
    Convolver(const Convolver &) = delete;
    Convolver &operator=(const Convolver &) = delete;

    std::size_t real_size() const { return static_cast<std::size_t>(n0_) * n1_ * n2_; }
    std::size_t complex_size() const { return static_cast<std::size_t>(n0_) * n1_ * (n2_ / 2 + 1); }

    // Spectrum of a wrapped-offset lattice, scaled so that apply() returns scale * sum_j T(i-j) f_j.
    Spectrum spectrum(const std::vector<double> &lattice, double scale);

    // f is an nx x nx x nz block (row-major, nz fastest); out[m] receives the convolution with specs[m].
    void apply(const double *f, int nx, int nz, const std::vector<const Spectrum *> &specs,
               const std::vector<double *> &outs);

private:
    int n0_, n1_, n2_;
    double *real_ = nullptr;
    void *cplx_ = nullptr;
    void *work_ = nullptr;
    void *fwd_ = nullptr;
    void *inv_ = nullptr;
};

// Cached per-thread convolver for the padded lattice of a grid.
Convolver &convolver_for(const GridSpec &g);

// Fast solver for (-Delta_h + shift) u = rhs: sine transform in the plane, Fourier in x3.
class HelmholtzSolver {
public:
    explicit HelmholtzSolver(const GridSpec &g);
    ~HelmholtzSolver();
    HelmholtzSolver(const HelmholtzSolver &) = delete;
    HelmholtzSolver &operator=(const HelmholtzSolver &) = delete;

    void solve(const double *rhs, double shift, double *out);
    const GridSpec &grid() const { return g_; }

private:
    GridSpec g_;
    std::vector<double> lam_x_, lam_z_;
    double *buf_ = nullptr;
    void *fwd_ = nullptr;
    void *inv_ = nullptr;
};

} // namespace chain
