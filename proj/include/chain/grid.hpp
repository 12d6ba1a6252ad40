#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace chain {

// Truncated slab [-L, L)^2 x [-ell, ell). Planar nodes are cell centers, x3 is periodic.
// A planar grid has nz = 1 and unit vertical weight.
struct GridSpec {
    double L = 12.0;
    int nx = 64;
    double ell = 1.0;
    int nz = 32;
    bool planar = false;

    static GridSpec make_planar(double L, int nx);

    double hx() const { return 2.0 * L / nx; }
    double hz() const { return planar ? 1.0 : 2.0 * ell / nz; }
    double dV() const { return hx() * hx() * hz(); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * nx * nz; }
    double x(int i) const { return -L + (i + 0.5) * hx(); }
    double z(int k) const { return planar ? 0.0 : -ell + k * hz(); }
    std::size_t idx(int i, int j, int k) const { return (static_cast<std::size_t>(i) * nx + j) * nz + k; }

    // The planar grid underlying this slab grid.
    GridSpec plane() const { return make_planar(L, nx); }

    void validate() const;
    bool operator==(const GridSpec &o) const = default;
};

enum class Symmetry : std::uint8_t { general = 0, radial = 1, g_invariant = 2, planar_constant = 3 };

const char *to_string(Symmetry s);
Symmetry symmetry_from_string(const std::string &s);

struct Field {
    GridSpec grid;
    std::vector<double> v;
    Symmetry tag = Symmetry::general;

    Field() = default;
    explicit Field(const GridSpec &g, Symmetry s = Symmetry::general) : grid(g), v(g.size(), 0.0), tag(s) {}

    double &operator()(int i, int j, int k) { return v[grid.idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v[grid.idx(i, j, k)]; }
};

// Samples f(x1, x2, x3) on the grid.
Field sample(const GridSpec &g, const std::function<double(double, double, double)> &f,
             Symmetry tag = Symmetry::general);

// Repeats a planar field along x3.
Field extend_constant(const Field &planar, const GridSpec &slab);
// Restricts a field to one x3 level as a planar field.
Field restrict_level(const Field &u, int k);

// Coefficient a(x', x3) with a positive infimum. Radial in x'.
struct PotentialSpec {
    std::function<double(double rho, double x3)> eval;
    double a_min = 1.0;
    bool radial = true;
    bool z_independent = true;
    std::string description;

    static PotentialSpec constant(double a0);
    // a0 - depth * exp(-rho^2 / width^2)
    static PotentialSpec well(double a0, double depth, double width);
    // a0 + amp * cos(2 pi x3 / period)
    static PotentialSpec zmod(double a0, double amp, double period);

    // Samples on the grid; throws if a_min <= 0 or a sample falls below a_min.
    std::vector<double> sample(const GridSpec &g) const;
    void validate() const;
};

} // namespace chain
