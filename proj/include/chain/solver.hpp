#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chain/variational.hpp"

namespace chain {

enum class SolverClass { radial, g_invariant, planar };

const char *to_string(SolverClass c);
SolverClass solver_class_from_string(const std::string &s);

struct SeedSpec {
    double amplitude = 1.0;
    double width = 2.0;      // planar Gaussian width
    double width_z = 0.0;    // vertical width of the radial seed; 0 means ell / 2
    int restarts = 2;
    double perturbation = 0.05;  // relative size of the random perturbation added per restart
    std::uint64_t rng_seed = 20240611;
    bool flat_restart = false;   // radial class: also try an x3-independent seed
};

struct SolverConfig {
    SolverClass cls = SolverClass::radial;
    int max_iters = 3000;
    double tol_g = 1e-6;
    double step0 = 1.0;
    double armijo_factor = 0.5;
    double sufficient_decrease = 1e-4;
    SeedSpec seed;

    void validate() const;
};

struct TraceRow {
    int iter = 0;
    double phi = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
};

struct SolveReport {
    Field u;
    EnergyBreakdown energy;
    double grad_norm = 0.0;        // projected a-gradient norm / ||u||_a
    double nehari_residual = 0.0;  // |Phi'(u)u| / ||u||_a^2
    double pde_residual = 0.0;     // interior residual of the Euler-Lagrange equation
    double d3_fraction = 0.0;
    int iterations = 0;
    double restart_dispersion = 0.0;  // (max - min) / |min| of the restart levels
    std::vector<double> restart_phi;
    std::vector<TraceRow> trace;       // best restart
    std::string cls;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string &what, std::vector<TraceRow> trace = {})
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<TraceRow> &trace() const { return trace_; }

private:
    std::vector<TraceRow> trace_;
};

// Class-projected a-gradient descent on the Nehari manifold with exact fiber rescaling.
// `seed` replaces the built-in seed for restart 0 when given.
SolveReport ground_state(const SolverConfig &cfg, const PotentialSpec &a, const KernelTable &table,
                         const Field *seed = nullptr);
SolveReport planar_ground_state(const SolverConfig &cfg, const PotentialSpec &a, const PlanarLogTable &table,
                                const Field *seed = nullptr);

// Runs the descent for one functional from one seed (already in the class).
SolveReport descend(const SolverConfig &cfg, const Functional &f, Field seed);

// ||-Delta u + a u + K[u^2] u||_2 / ||u||_2 over the interior, with a fourth-order Laplacian.
double residual_report(const Field &u, const Functional &f, double fraction = 0.7);
double residual_report(const Field &u, const PotentialSpec &a, const KernelTable &table);

// Projected gradient norm of a field (post hoc).
double projected_gradient_norm(const Field &u, const Functional &f, SolverClass cls);

// Trilinear interpolation onto another grid of the same box (zero outside, periodic in x3).
Field resample(const Field &u, const GridSpec &target);

struct ScanRow {
    double ell = 0.0;
    int nz = 0;
    double c_r = 0.0, c_G = 0.0, two_ell_kappa = 0.0;
    double d3_radial = 0.0, d3_G = 0.0, sigma_defect_G = 0.0;
    std::string error;
};

struct ScanResult {
    double kappa = 0.0;
    std::vector<ScanRow> rows;
    std::optional<double> ell_star;
};

struct ScanOptions {
    double L = 12.0;
    int nx = 64;
    double hz_target = 0.25;  // nz = max(8, round(2 ell / hz_target)), even
    int patch = 4;
    double margin = 1e-3;
    // Rows already computed (for resuming); matched by ell.
    std::vector<ScanRow> done;
    // Called after every row (for incremental output).
    std::function<void(const ScanRow &)> on_row;
};

int scan_nz(double ell, double hz_target);

ScanResult ell_scan(const std::vector<double> &ells, const SolverConfig &cfg, const PotentialSpec &a_planar,
                    const ScanOptions &opt);
// Smallest ell with c_r < 2 ell kappa (1 - margin).
std::optional<double> detect_ell_star(const std::vector<ScanRow> &rows, double margin);

void write_trace_csv(const std::vector<TraceRow> &trace, const std::string &path);
void write_scan_csv(const ScanResult &scan, const std::string &path);
std::vector<ScanRow> read_scan_csv(const std::string &path);

} // namespace chain
