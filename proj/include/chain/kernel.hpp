#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chain {

using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

struct SlabParams {
    double ell = 1.0;
    // Planar Fourier transform convention: F[f](xi) = (1/2pi) * int f(x) e^{-i x.xi} dx.
    static constexpr double fourier_prefactor = 1.0 / (2.0 * kPi);

    void validate() const;
};

struct KernelValue {
    double k1 = 0.0;
    double k2 = 0.0;
    double total = 0.0;
};

// Quadrature failed to reach tolerance; carries the error estimate.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string &what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

// Total kernel requested at offset 0; the smooth part is still available.
class SingularOffset : public std::domain_error {
public:
    explicit SingularOffset(double k2) : std::domain_error("kernel total is singular at offset 0"), k2_(k2) {}
    double k2() const { return k2_; }

private:
    double k2_;
};

// Reduces a vertical offset into [-ell, ell] using 2*ell periodicity.
double reduce_dz(double dz, double ell);

// Periodic Green function of u'' - r^2 u = f/(2 pi) on (-ell, ell).
double ode_green(double r, double ell, double t, double s);

// Applies the periodic Green operator to samples on t_j = -ell + j*2ell/N.
// Trapezoid rule plus the correction for the derivative kink at t = s.
std::vector<double> ode_apply(double r, double ell, std::span<const double> f);
// Same, with explicit abscissae; rejects a grid that is not uniform and periodic.
std::vector<double> ode_apply(double r, double ell, std::span<const double> t, std::span<const double> f);

// Per-mode kernel value h_{|xi|}(dz, 0).
double spectral_kernel(double xi_mag, double dz, double ell);

// Pole-subtracted Hankel integrand averaged over t in [a, b] (a == b gives the point value):
// avg cosh(s t)/(e^{2 ell s} - 1) - e^{-s}/(2 ell s).
double hankel_remainder(double s, double a, double b, double ell);

// Logarithm left by the finite-part treatment of the 1/|xi|^2 pole, before calibration.
double pole_log_term(double rho, double ell);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// int_0^inf hankel_remainder(s, a, b) J0(s rho) ds by composite Gauss-Kronrod.
QuadResult hankel_quadrature(double rho, double a, double b, double ell);

// Smooth part without the additive calibration constant.
double k2_raw(double rho, double t, double ell, double tol = 1e-9);

// Constant that makes the x3-average of K equal log|x'|/(4 pi ell); from one line average.
double line_average_calibration(double ell);

// Smooth part at an offset; default calibration is the line-average constant for ell.
double k2_eval(const Vec3 &offset, double ell);
double k2_eval(const Vec3 &offset, double ell, double calibration);

KernelValue k_eval(const Vec3 &offset, double ell);
KernelValue k_eval(const Vec3 &offset, double ell, double calibration);

struct ImageSum {
    double value = 0.0;
    double error = 0.0;  // Richardson difference between N and N/2
};

// Renormalized sum over vertical images plus an integral tail, equal to K up to a global constant.
ImageSum image_sum_oracle(const Vec3 &offset, double ell, long n_images = 10000);

// Exact integrals used for cell averages.
// int over the box of 1/|x|.
double box_integral_inv_r(double x0, double x1, double y0, double y1, double z0, double z1);
// int over the rectangle of log(x^2 + y^2).
double rect_integral_log_r2(double x0, double x1, double y0, double y1);

// Composite Gauss-Kronrod (7/15) rule on [0, s_max] with fixed panels, shared by many radii.
class HankelRule {
public:
    HankelRule(double ell, double rho_max);

    std::size_t size() const { return nodes_.size(); }
    std::size_t panels() const { return nodes_.size() / 15; }
    const std::vector<double> &nodes() const { return nodes_; }
    const std::vector<double> &kronrod_weights() const { return wk_; }
    const std::vector<double> &gauss_weights() const { return wg_; }
    double ell() const { return ell_; }

private:
    double ell_;
    std::vector<double> nodes_, wk_, wg_;
};

// Evaluates many (radius set, t-range) combinations of the smooth part against one rule.
// Each radius set is a list of (rho, weight) with weights summing to one; the result is the
// weighted average. Each t-range [a, b] produces one output.
class HankelBatch {
public:
    HankelBatch(double ell, double rho_max, const std::vector<std::array<double, 2>> &t_ranges);

    std::size_t ranges() const { return nrange_; }
    // out[j] = raw smooth part averaged over the radius set and range j; err[j] its estimate.
    void eval(std::span<const double> rho, std::span<const double> weight, double *out, double *err) const;

private:
    HankelRule rule_;
    std::size_t nrange_;
    std::vector<double> rmat_;  // range-major remainder samples
};

} // namespace chain
