#pragma once

#include "mdopt/grid.hpp"
#include "mdopt/linsolve.hpp"

namespace mdopt {

struct SolverOptions {
  double pressure_tol = 1e-12;
  double transport_tol = 1e-13;
  long max_iter_factor = 50;  // iteration cap = factor * num_cells

  long max_iterations(const Grid& grid) const { return max_iter_factor * grid.num_cells(); }
};

/// Harmonic-mean permeability on interior faces; boundary faces are zero,
/// which encodes the no-flux boundary exactly.
FaceField harmonic_face_permeability(const Grid& grid, const ScalarField& perm);

/// y = -div(K grad x) per unit volume, two-point fluxes, zero-flux boundary.
void apply_neumann_diffusion(const Grid& grid, const FaceField& face_perm, const ScalarField& x,
                             ScalarField& y);

/// Solves -div(K grad p) = rhs with zero-flux boundary and zero-mean p.
/// Requires the discrete compatibility sum(rhs)*vol = 0 within
/// 1e-10 * ||rhs||_L2; CG + Jacobi with the constant mode projected out.
/// `initial_guess` (optional) warm-starts the iteration.
ScalarField solve_pressure(const Grid& grid, const MediumFields& medium, const ScalarField& rhs,
                           const SolverOptions& opts = {},
                           const ScalarField* initial_guess = nullptr);

struct DarcyVelocity {
  FaceField face;    // face-normal fluxes, exactly zero on the boundary
  VectorField cell;  // per-axis average of the two opposing faces
};

/// v = -K grad p with harmonic face permeability.
DarcyVelocity compute_darcy_velocity(const Grid& grid, const MediumFields& medium,
                                     const ScalarField& p);

}  // namespace mdopt
