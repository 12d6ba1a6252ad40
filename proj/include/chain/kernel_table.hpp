#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chain/fft.hpp"
#include "chain/grid.hpp"

namespace chain {

// Real lattice of kernel values at wrapped offsets plus its convolution spectrum.
struct LatticeKernel {
    int n0 = 0, n1 = 0, n2 = 0;
    std::vector<double> values;
    Spectrum spectrum;  // includes the cell volume and FFT normalization

    std::size_t index(int di, int dj, int dk) const;
    double at(int di, int dj, int dk) const { return values[index(di, dj, dk)]; }
};

struct KernelMeta {
    double crossover_R = 0.0;     // K > 0 and K2 > 0 for every lattice offset with |offset| >= R
    double C_K = 1.0;             // 1/C_K <= K2 / log(1+|offset|) <= C_K beyond R (and in the limit)
    double sup_abs_k2_below_R = 0.0;
    double fit_slope = 0.0;       // least squares K2 ~ slope * log(1+|offset|) + intercept, far field
    double fit_intercept = 0.0;
    double calibration_spread = 0.0;  // max - min of the collapse mismatch over the calibration region
    double quad_error = 0.0;      // largest quadrature error estimate over the table
};

struct KernelTableOptions {
    int patch = 4;              // columns |di|,|dj| <= patch use exact cell averages
    int cell_gauss = 10;        // Gauss points per planar direction for smooth-part cell averages
    double quad_tol = 1e-8;
    double mem_limit_mb = 4096.0;
    bool calibrate = true;
};

struct KernelTable {
    GridSpec grid;
    int patch = 0;
    double calibration = 0.0;
    LatticeKernel k1, k2, total;  // k2 and total include the calibration constant
    KernelMeta meta;

    double ell() const { return grid.ell; }
    // Applies a calibration constant and refreshes the dependent spectra.
    void set_calibration(double c);
    void refresh_metadata();
};

struct PlanarLogTable {
    GridSpec grid;  // planar
    int patch = 0;
    LatticeKernel log;  // (1/2pi) log|x'| with cell averages near the origin

    double at(int di, int dj) const { return log.at(di, dj, 0); }
};

// Lattice covers planar offsets |d| <= nx and all vertical offsets; smooth part calibrated unless disabled.
KernelTable build_kernel_table(const GridSpec &grid, const KernelTableOptions &opt = {});

PlanarLogTable build_planar_log_table(const GridSpec &planar_grid, int patch);

// Calibration constant from the two-dimensional collapse on an x3-independent Gaussian.
double collapse_calibration(const KernelTable &raw, double *spread = nullptr);

// Estimated bytes needed by build_kernel_table.
double kernel_table_bytes(const GridSpec &grid, const KernelTableOptions &opt = {});

// Binary dump: "CHNK1", ell, three u32 lattice dims, three f64 spacings, f64 calibration,
// K2 lattice (f64 LE, row-major), u32 patch, then the K1 patch columns (|di|,|dj| <= patch, all dk).
void dump_kernel(const KernelTable &t, const std::string &path);
KernelTable load_kernel(const std::string &path);

} // namespace chain
