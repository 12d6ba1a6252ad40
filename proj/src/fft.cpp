#include "chain/fft.hpp"

#include "chain/simd.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace chain {

namespace {

std::mutex &planner_mutex() {
    static std::mutex mu;
    return mu;
}

int &fft_threads() {
    static int n = 1;
    return n;
}

void prepare_planner() {
    static bool init = [] {
        fftw_init_threads();
        return true;
    }();
    (void)init;
    fftw_plan_with_nthreads(fft_threads());
}

} // namespace

void set_fft_threads(int n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fft_threads() = n < 1 ? 1 : n;
}

Convolver::Convolver(int n0, int n1, int n2) : n0_(n0), n1_(n1), n2_(n2) {
    real_ = static_cast<double *>(fftw_malloc(sizeof(double) * real_size()));
    cplx_ = fftw_malloc(sizeof(fftw_complex) * complex_size());
    work_ = fftw_malloc(sizeof(fftw_complex) * complex_size());
    if (!real_ || !cplx_ || !work_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    prepare_planner();
    fwd_ = fftw_plan_dft_r2c_3d(n0, n1, n2, real_, static_cast<fftw_complex *>(cplx_), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_3d(n0, n1, n2, static_cast<fftw_complex *>(work_), real_, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("FFTW planning failed");
}

Convolver::~Convolver() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(real_);
    fftw_free(cplx_);
    fftw_free(work_);
}

Spectrum Convolver::spectrum(const std::vector<double> &lattice, double scale) {
    if (lattice.size() != real_size()) throw std::invalid_argument("Convolver: lattice size mismatch");
    std::copy(lattice.begin(), lattice.end(), real_);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    Spectrum out(complex_size());
    const auto *c = static_cast<const fftw_complex *>(cplx_);
    const double norm = scale / static_cast<double>(real_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {c[i][0] * norm, c[i][1] * norm};
    return out;
}

void Convolver::apply(const double *f, int nx, int nz, const std::vector<const Spectrum *> &specs,
                      const std::vector<double *> &outs) {
    if (specs.size() != outs.size()) throw std::invalid_argument("Convolver: spectra/outputs mismatch");
    if (nx > n0_ || nx > n1_ || nz != n2_) throw std::invalid_argument("Convolver: field does not fit the lattice");
    std::fill(real_, real_ + real_size(), 0.0);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j) {
            const double *src = f + (static_cast<std::size_t>(i) * nx + j) * nz;
            double *dst = real_ + (static_cast<std::size_t>(i) * n1_ + j) * n2_;
            std::copy(src, src + nz, dst);
        }
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const std::size_t nc = complex_size();
    for (std::size_t m = 0; m < specs.size(); ++m) {
        if (specs[m]->size() != nc) throw std::invalid_argument("Convolver: spectrum size mismatch");
        auto *w = static_cast<double *>(work_);
        std::copy(static_cast<const double *>(cplx_), static_cast<const double *>(cplx_) + 2 * nc, w);
        simd::cmul(w, reinterpret_cast<const double *>(specs[m]->data()), nc);
        fftw_execute(static_cast<fftw_plan>(inv_));
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nx; ++j) {
                const double *src = real_ + (static_cast<std::size_t>(i) * n1_ + j) * n2_;
                double *dst = outs[m] + (static_cast<std::size_t>(i) * nx + j) * nz;
                std::copy(src, src + nz, dst);
            }
    }
}

Convolver &convolver_for(const GridSpec &g) {
    thread_local std::map<std::tuple<int, int, int>, std::unique_ptr<Convolver>> cache;
    const auto key = std::make_tuple(2 * g.nx, 2 * g.nx, g.nz);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Convolver>(2 * g.nx, 2 * g.nx, g.nz)).first;
    return *it->second;
}

HelmholtzSolver::HelmholtzSolver(const GridSpec &g) : g_(g) {
    const int n = g.nx;
    lam_x_.resize(n);
    for (int m = 0; m < n; ++m)
        lam_x_[m] = (2.0 - 2.0 * std::cos(3.14159265358979323846 * (m + 1) / (n + 1))) / (g.hx() * g.hx());
    lam_z_.assign(g.nz, 0.0);
    if (!g.planar)
        for (int q = 0; q < g.nz; ++q) {
            const int k = q <= g.nz / 2 ? q : g.nz - q;
            lam_z_[q] = (2.0 - 2.0 * std::cos(2.0 * 3.14159265358979323846 * k / g.nz)) / (g.hz() * g.hz());
        }
    buf_ = static_cast<double *>(fftw_malloc(sizeof(double) * g.size()));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    prepare_planner();
    const fftw_r2r_kind fk[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_R2HC};
    const fftw_r2r_kind ik[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_HC2R};
    fwd_ = fftw_plan_r2r_3d(n, n, g.nz, buf_, buf_, fk[0], fk[1], fk[2], FFTW_ESTIMATE);
    inv_ = fftw_plan_r2r_3d(n, n, g.nz, buf_, buf_, ik[0], ik[1], ik[2], FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("FFTW planning failed");
}

HelmholtzSolver::~HelmholtzSolver() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(buf_);
}

void HelmholtzSolver::solve(const double *rhs, double shift, double *out) {
    const int n = g_.nx, nz = g_.nz;
    std::copy(rhs, rhs + g_.size(), buf_);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const double norm = 1.0 / (4.0 * (n + 1.0) * (n + 1.0) * nz);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double *row = buf_ + (static_cast<std::size_t>(i) * n + j) * nz;
            const double lxy = lam_x_[i] + lam_x_[j] + shift;
            for (int q = 0; q < nz; ++q) row[q] *= norm / (lxy + lam_z_[q]);
        }
    fftw_execute(static_cast<fftw_plan>(inv_));
    std::copy(buf_, buf_ + g_.size(), out);
}

} // namespace chain
