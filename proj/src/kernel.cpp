#include "chain/kernel.hpp"

#include "chain/simd.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace chain {

namespace {

using NoPromote = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

inline double bessel_j0(double x) { return boost::math::cyl_bessel_j(0, x, NoPromote()); }

// Half-rule of G7/K15: abscissae x_m >= 0, Kronrod weights, Gauss weights (0 on Kronrod-only nodes).
struct GK15 {
    std::array<double, 8> x{}, wk{}, wg{};
    GK15() {
        using K = boost::math::quadrature::gauss_kronrod<double, 15>;
        using G = boost::math::quadrature::gauss<double, 7>;
        const auto &kx = K::abscissa();
        const auto &kw = K::weights();
        const auto &gx = G::abscissa();
        const auto &gw = G::weights();
        for (int m = 0; m < 8; ++m) {
            x[m] = kx[m];
            wk[m] = kw[m];
            wg[m] = 0.0;
        }
        for (std::size_t m = 0; m < gx.size(); ++m) {
            if (std::abs(kx[2 * m] - gx[m]) > 1e-14) throw std::logic_error("unexpected Gauss-Kronrod node order");
            wg[2 * m] = gw[m];
        }
    }
};

const GK15 &gk15() {
    static const GK15 rule;
    return rule;
}

double panel_width(double ell, double rho_max) {
    double w = std::min(0.5, kPi / (4.0 * ell));
    if (rho_max > 0.0) w = std::min(w, kPi / rho_max);
    return w;
}

double upper_limit(double ell) { return 38.0 / std::min(1.0, ell); }

void check_ell(double ell) {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw std::invalid_argument("ell must be positive and finite");
}

// Corner function of the 1/|x| box integral, for x, y, z >= 0.
double inv_r_corner(double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r == 0.0) return 0.0;
    double f = 0.0;
    if (y > 0.0 && z > 0.0) f += y * z * std::log(x + r);
    if (x > 0.0 && z > 0.0) f += x * z * std::log(y + r);
    if (x > 0.0 && y > 0.0) f += x * y * std::log(z + r);
    if (x > 0.0) f -= 0.5 * x * x * std::atan(y * z / (x * r));
    if (y > 0.0) f -= 0.5 * y * y * std::atan(x * z / (y * r));
    if (z > 0.0) f -= 0.5 * z * z * std::atan(x * y / (z * r));
    return f;
}

// Corner function of the log(x^2+y^2) rectangle integral, for x, y >= 0.
double log_corner(double x, double y) {
    if (x == 0.0 || y == 0.0) return 0.0;
    return x * y * (std::log(x * x + y * y) - 3.0) + x * x * std::atan(y / x) + y * y * std::atan(x / y);
}

// Splits [a, b] into pieces [p, q] with 0 <= p <= q, valid for integrands even in the variable.
int even_pieces(double a, double b, std::array<std::array<double, 2>, 2> &out) {
    if (a > b) std::swap(a, b);
    if (a >= 0.0) {
        out[0] = {a, b};
        return 1;
    }
    if (b <= 0.0) {
        out[0] = {-b, -a};
        return 1;
    }
    out[0] = {0.0, -a};
    out[1] = {0.0, b};
    return 2;
}

} // namespace

void SlabParams::validate() const { check_ell(ell); }

double reduce_dz(double dz, double ell) {
    const double p = 2.0 * ell;
    double r = std::fmod(dz + ell, p);
    if (r < 0.0) r += p;
    return r - ell;
}

double ode_green(double r, double ell, double t, double s) {
    check_ell(ell);
    if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("ode_green: r must be positive and finite");
    const double slack = 1e-12 * ell;
    if (std::abs(t) > ell + slack || std::abs(s) > ell + slack)
        throw std::domain_error("ode_green: t and s must lie in [-ell, ell]");
    const double d = std::min(std::abs(t - s), 2.0 * ell);
    const double denom = 4.0 * kPi * r * (-std::expm1(-2.0 * ell * r));
    return -(std::exp(-r * (2.0 * ell - d)) + std::exp(-r * d)) / denom;
}

std::vector<double> ode_apply(double r, double ell, std::span<const double> f) {
    check_ell(ell);
    const std::size_t n = f.size();
    if (n < 2) throw std::invalid_argument("ode_apply: need at least two samples");
    const double h = 2.0 * ell / static_cast<double>(n);
    std::vector<double> g(n);
    for (std::size_t m = 0; m < n; ++m) g[m] = ode_green(r, ell, -ell + static_cast<double>(m) * h, -ell);
    std::vector<double> u(n, 0.0);
    const double kink = h * h / 12.0 / (2.0 * kPi);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[(i + n - j) % n] * f[j];
        u[i] = h * acc + kink * f[i];
    }
    return u;
}

std::vector<double> ode_apply(double r, double ell, std::span<const double> t, std::span<const double> f) {
    check_ell(ell);
    const std::size_t n = t.size();
    if (n != f.size() || n < 2) throw std::invalid_argument("ode_apply: abscissae and samples differ in length");
    const double h = 2.0 * ell / static_cast<double>(n);
    const double tol = 1e-9 * h;
    if (std::abs(t[0] + ell) > tol) throw std::invalid_argument("ode_apply: grid must start at -ell");
    for (std::size_t j = 1; j < n; ++j)
        if (std::abs((t[j] - t[j - 1]) - h) > tol) throw std::invalid_argument("ode_apply: grid is not uniform and periodic");
    return ode_apply(r, ell, f);
}

double spectral_kernel(double xi_mag, double dz, double ell) {
    check_ell(ell);
    if (!(xi_mag > 0.0)) throw std::domain_error("spectral_kernel: xi_mag must be positive");
    const double d = std::abs(reduce_dz(dz, ell));
    return ode_green(xi_mag, ell, d - ell, -ell);
}

double hankel_remainder(double s, double a, double b, double ell) {
    const double width = b - a;
    double phi = 1.0;
    if (width > 0.0) {
        const double x = s * width;
        phi = x < 1e-8 ? 1.0 - 0.5 * x : -std::expm1(-x) / x;
    }
    const double denom = 2.0 * (-std::expm1(-2.0 * ell * s));
    const double bulk = (std::exp(-s * (2.0 * ell - b)) + std::exp(-s * (2.0 * ell + a))) * phi / denom;
    return bulk - std::exp(-s) / (2.0 * ell * s);
}

double pole_log_term(double rho, double ell) {
    const double q = std::sqrt(1.0 + rho * rho);
    return std::log1p(rho * rho / (2.0 * (q + 1.0))) / (4.0 * kPi * ell);
}

QuadResult hankel_quadrature(double rho, double a, double b, double ell) {
    check_ell(ell);
    const auto &rule = gk15();
    const double smax = upper_limit(ell);
    const double w0 = panel_width(ell, rho);
    const long np = static_cast<long>(std::ceil(smax / w0));
    const double w = smax / static_cast<double>(np);
    const double hw = 0.5 * w;
    QuadResult out;
    for (long p = np - 1; p >= 0; --p) {
        const double c = (static_cast<double>(p) + 0.5) * w;
        double k = 0.0, g = 0.0;
        for (int m = 0; m < 8; ++m) {
            const int sides = m == 0 ? 1 : 2;
            for (int sgn = 0; sgn < sides; ++sgn) {
                const double s = sgn == 0 ? c + hw * rule.x[m] : c - hw * rule.x[m];
                const double v = hankel_remainder(s, a, b, ell) * bessel_j0(s * rho);
                k += rule.wk[m] * v;
                g += rule.wg[m] * v;
            }
        }
        out.value += hw * k;
        out.error += hw * std::abs(k - g);
    }
    return out;
}

double k2_raw(double rho, double t, double ell, double tol) {
    const double tr = std::abs(reduce_dz(t, ell));
    const QuadResult q = hankel_quadrature(rho, tr, tr, ell);
    if (q.error > tol) throw QuadratureError("k2 quadrature did not converge", q.error);
    return pole_log_term(rho, ell) - q.value / (2.0 * kPi);
}

double line_average_calibration(double ell) {
    check_ell(ell);
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(ell);
        if (it != cache.end()) return it->second;
    }
    const double rho = ell;
    const double avg_k1 = -std::asinh(ell / rho) / (4.0 * kPi * ell);
    const QuadResult q = hankel_quadrature(rho, 0.0, ell, ell);
    if (q.error > 1e-9) throw QuadratureError("line-average quadrature did not converge", q.error);
    const double avg_k2 = pole_log_term(rho, ell) - q.value / (2.0 * kPi);
    const double c = std::log(rho) / (4.0 * kPi * ell) - avg_k1 - avg_k2;
    std::lock_guard<std::mutex> lock(mu);
    cache[ell] = c;
    return c;
}

double k2_eval(const Vec3 &offset, double ell) { return k2_eval(offset, ell, line_average_calibration(ell)); }

double k2_eval(const Vec3 &offset, double ell, double calibration) {
    check_ell(ell);
    const double rho = std::hypot(offset[0], offset[1]);
    return k2_raw(rho, offset[2], ell) + calibration;
}

KernelValue k_eval(const Vec3 &offset, double ell) { return k_eval(offset, ell, line_average_calibration(ell)); }

KernelValue k_eval(const Vec3 &offset, double ell, double calibration) {
    KernelValue v;
    v.k2 = k2_eval(offset, ell, calibration);
    const double rho = std::hypot(offset[0], offset[1]);
    const double t = reduce_dz(offset[2], ell);
    const double d = std::hypot(rho, t);
    if (d == 0.0) throw SingularOffset(v.k2);
    v.k1 = -1.0 / (4.0 * kPi * d);
    v.total = v.k1 + v.k2;
    return v;
}

namespace {

double image_partial(double rho, double z, double ell, long n) {
    const double c = 1.0 / (4.0 * kPi);
    double acc = 0.0;
    for (long k = n; k >= 1; --k) {
        const double shift = 2.0 * ell * static_cast<double>(k);
        const double a = std::hypot(rho, z - shift);
        const double b = std::hypot(rho, z + shift);
        acc += -c / a - c / b + 1.0 / (4.0 * kPi * ell * static_cast<double>(k));
    }
    const double m = static_cast<double>(n) + 0.5;
    const double p = 2.0 * ell * m - z, q = 2.0 * ell * m + z;
    const double tail = (std::log(p + std::hypot(p, rho)) + std::log(q + std::hypot(q, rho))) / (8.0 * kPi * ell) -
                        std::log(4.0 * ell * m) / (4.0 * kPi * ell);
    return acc + tail - c / std::hypot(rho, z);
}

} // namespace

ImageSum image_sum_oracle(const Vec3 &offset, double ell, long n_images) {
    check_ell(ell);
    if (n_images < 2) throw std::invalid_argument("image_sum_oracle: need at least two images");
    const double rho = std::hypot(offset[0], offset[1]);
    const double z = reduce_dz(offset[2], ell);
    if (rho == 0.0 && z == 0.0) throw std::domain_error("image_sum_oracle: offset coincides with an image");
    ImageSum out;
    out.value = image_partial(rho, z, ell, n_images);
    out.error = std::abs(out.value - image_partial(rho, z, ell, n_images / 2));
    return out;
}

double box_integral_inv_r(double x0, double x1, double y0, double y1, double z0, double z1) {
    std::array<std::array<double, 2>, 2> px{}, py{}, pz{};
    const int nx = even_pieces(x0, x1, px), ny = even_pieces(y0, y1, py), nz = even_pieces(z0, z1, pz);
    double total = 0.0;
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b)
            for (int c = 0; c < nz; ++c) {
                double s = 0.0;
                for (int m = 0; m < 8; ++m) {
                    const double x = px[a][(m >> 2) & 1], y = py[b][(m >> 1) & 1], z = pz[c][m & 1];
                    const int parity = ((m >> 2) & 1) + ((m >> 1) & 1) + (m & 1);
                    s += (parity % 2 == 1 ? 1.0 : -1.0) * inv_r_corner(x, y, z);
                }
                total += s;
            }
    return total;
}

double rect_integral_log_r2(double x0, double x1, double y0, double y1) {
    std::array<std::array<double, 2>, 2> px{}, py{};
    const int nx = even_pieces(x0, x1, px), ny = even_pieces(y0, y1, py);
    double total = 0.0;
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b)
            total += log_corner(px[a][1], py[b][1]) - log_corner(px[a][0], py[b][1]) -
                     log_corner(px[a][1], py[b][0]) + log_corner(px[a][0], py[b][0]);
    return total;
}

HankelRule::HankelRule(double ell, double rho_max) : ell_(ell) {
    check_ell(ell);
    const auto &rule = gk15();
    const double smax = upper_limit(ell);
    const long np = static_cast<long>(std::ceil(smax / panel_width(ell, rho_max)));
    const double w = smax / static_cast<double>(np);
    const double hw = 0.5 * w;
    nodes_.reserve(static_cast<std::size_t>(np) * 15);
    for (long p = 0; p < np; ++p) {
        const double c = (static_cast<double>(p) + 0.5) * w;
        for (int m = 7; m >= 1; --m) {
            nodes_.push_back(c - hw * rule.x[m]);
            wk_.push_back(hw * rule.wk[m]);
            wg_.push_back(hw * rule.wg[m]);
        }
        for (int m = 0; m <= 7; ++m) {
            nodes_.push_back(c + hw * rule.x[m]);
            wk_.push_back(hw * rule.wk[m]);
            wg_.push_back(hw * rule.wg[m]);
        }
    }
}

HankelBatch::HankelBatch(double ell, double rho_max, const std::vector<std::array<double, 2>> &t_ranges)
    : rule_(ell, rho_max), nrange_(t_ranges.size()) {
    const std::size_t n = rule_.size();
    rmat_.resize(nrange_ * n);
    for (std::size_t j = 0; j < nrange_; ++j)
        for (std::size_t k = 0; k < n; ++k)
            rmat_[j * n + k] = hankel_remainder(rule_.nodes()[k], t_ranges[j][0], t_ranges[j][1], ell);
}

void HankelBatch::eval(std::span<const double> rho, std::span<const double> weight, double *out, double *err) const {
    const std::size_t n = rule_.size();
    const auto &s = rule_.nodes();
    const auto &wk = rule_.kronrod_weights();
    const auto &wg = rule_.gauss_weights();
    std::vector<double> jbar(n, 0.0);
    double log_avg = 0.0;
    for (std::size_t g = 0; g < rho.size(); ++g) {
        log_avg += weight[g] * pole_log_term(rho[g], rule_.ell());
        for (std::size_t k = 0; k < n; ++k) jbar[k] += weight[g] * bessel_j0(s[k] * rho[g]);
    }
    std::vector<double> vk(n), vd(n);
    for (std::size_t k = 0; k < n; ++k) {
        vk[k] = wk[k] * jbar[k];
        vd[k] = (wk[k] - wg[k]) * jbar[k];
    }
    const double inv2pi = 1.0 / (2.0 * kPi);
    for (std::size_t j = 0; j < nrange_; ++j) {
        const double *row = rmat_.data() + j * n;
        out[j] = log_avg - simd::dot(vk.data(), row, n) * inv2pi;
        double e = 0.0;
        for (std::size_t p = 0; p < n; p += 15) e += std::abs(simd::dot(vd.data() + p, row + p, 15));
        err[j] = e * inv2pi;
    }
}

} // namespace chain
