#pragma once

#include "mdopt/grid.hpp"
#include "mdopt/pressure.hpp"

namespace mdopt {

/// Per-cell gradient: centered in the interior, one-sided at boundary cells.
VectorField cell_gradient(const Grid& grid, const ScalarField& f);

/// Same, but the boundary-normal component at boundary cells is forced to
/// zero (matching the zero-normal-derivative boundary conditions).
VectorField cell_gradient_tangential(const Grid& grid, const ScalarField& f);

/// Precomputed face data for one implicit transport step. The dispersion
/// tensor is evaluated per interior face from the arithmetic average of the
/// adjacent cell-centered velocities; row a holds D(a,:) there. Boundary
/// faces carry no flux at all.
struct TransportStencil {
  double dt = 0.0;
  ScalarField phi_over_dt;                                // per cell
  FaceField disp_normal;                                  // D_aa per face
  std::array<std::vector<std::array<double, 3>>, 3> row;  // D(a,:) per face
  FaceField vel;                                          // face-normal velocity
};

TransportStencil build_transport_stencil(const Grid& grid, const MediumFields& medium,
                                         const DarcyVelocity& velocity, double dt);

/// y = (phi/dt) x - div(D_nn grad x) + div(x v), upwind advection.
void transport_apply(const Grid& grid, const TransportStencil& st, const ScalarField& x,
                     ScalarField& y);

/// Exact transpose of transport_apply: the advection part becomes the
/// upwind discretization of -v.grad(x) against the flow.
void transport_apply_adjoint(const Grid& grid, const TransportStencil& st, const ScalarField& x,
                             ScalarField& y);

/// Shared Jacobi diagonal (transposition preserves it).
ScalarField transport_diagonal(const Grid& grid, const TransportStencil& st);

/// Per-volume divergence of the off-diagonal dispersive fluxes built from
/// the supplied cell gradients; the deferred-correction right-hand side.
ScalarField cross_dispersion_divergence(const Grid& grid, const TransportStencil& st,
                                        const VectorField& grad);

/// One backward Euler step of
///   phi dc/dt - div(D(v) grad c) + div(c v) = rhs,
/// normal dispersive fluxes and advection implicit, cross-dispersion
/// deferred from c_old, all boundary fluxes zero.
ScalarField advance_concentration(const Grid& grid, const MediumFields& medium,
                                  const ScalarField& c_old, const DarcyVelocity& velocity,
                                  const ScalarField& rhs, double dt,
                                  const SolverOptions& opts = {});

}  // namespace mdopt
