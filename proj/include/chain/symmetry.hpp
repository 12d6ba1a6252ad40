#pragma once

#include "chain/grid.hpp"

namespace chain {

// Average over planar rotations at each (|x'|, x3). Grid points are grouped by their exact
// squared radius, so the result is invariant under the square's rotations and reflections.
Field radialize(const Field &u);

// (sigma u)(x', x3) = -u(x', x3 - ell): circular shift by nz/2 and a sign flip.
Field sigma_apply(const Field &u);

// Projection onto sigma-fixed radial fields: radialize((u + sigma u) / 2).
Field project_G(const Field &u);

// int |d3 u|^2 / int |grad u|^2 with the discrete gradient; throws if grad u = 0.
double d3_energy_fraction(const Field &u);

// Max |u - radialize(u)| and max |u - sigma u|, scaled by max |u|.
double radial_defect(const Field &u);
double sigma_defect(const Field &u);

// Enforces the invariant of a tag (general: identity).
Field project_to(const Field &u, Symmetry s);

} // namespace chain
