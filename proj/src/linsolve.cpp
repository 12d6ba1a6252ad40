#include "chain/linsolve.hpp"

#include "chain/fields.hpp"
#include "chain/simd.hpp"

#include <algorithm>
#include <cmath>

namespace chain {

ShiftedLaplacian::ShiftedLaplacian(const GridSpec &g, std::vector<double> a, double rel_tol, int max_iter)
    : g_(g), a_(std::move(a)), tol_(rel_tol), max_iter_(max_iter), fast_(g) {
    if (a_.size() != g.size()) throw std::invalid_argument("ShiftedLaplacian: coefficient size mismatch");
    const auto [lo, hi] = std::minmax_element(a_.begin(), a_.end());
    if (!(*lo > 0.0)) throw std::invalid_argument("ShiftedLaplacian: coefficient must be positive");
    constant_ = *lo == *hi;
    a_ref_ = std::sqrt(*lo * *hi);
}

void ShiftedLaplacian::apply(const double *x, double *out) const {
    neg_laplacian(g_, x, out);
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] += a_[i] * x[i];
}

void ShiftedLaplacian::solve(const double *b, double *x) {
    const std::size_t n = g_.size();
    if (constant_) {
        fast_.solve(b, a_[0], x);
        last_iters_ = 1;
        return;
    }
    std::vector<double> r(b, b + n), z(n), p(n), q(n);
    std::fill(x, x + n, 0.0);
    const double bnorm = std::sqrt(simd::dot(b, b, n));
    if (bnorm == 0.0) {
        last_iters_ = 0;
        return;
    }
    fast_.solve(r.data(), a_ref_, z.data());
    p = z;
    double rz = simd::dot(r.data(), z.data(), n);
    for (int it = 1; it <= max_iter_; ++it) {
        apply(p.data(), q.data());
        const double alpha = rz / simd::dot(p.data(), q.data(), n);
        simd::axpy(alpha, p.data(), x, n);
        simd::axpy(-alpha, q.data(), r.data(), n);
        const double rn = std::sqrt(simd::dot(r.data(), r.data(), n));
        if (rn <= tol_ * bnorm) {
            last_iters_ = it;
            return;
        }
        fast_.solve(r.data(), a_ref_, z.data());
        const double rz_new = simd::dot(r.data(), z.data(), n);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    const double rn = std::sqrt(simd::dot(r.data(), r.data(), n));
    throw LinearSolveError("preconditioned CG did not converge", rn / bnorm);
}

Field discrete_poisson_solve(const Field &f) {
    HelmholtzSolver hs(f.grid);
    Field w(f.grid, f.tag);
    std::vector<double> rhs(f.v.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -f.v[i];
    hs.solve(rhs.data(), 0.0, w.v.data());
    return w;
}

} // namespace chain
