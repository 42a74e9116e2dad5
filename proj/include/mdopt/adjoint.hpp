#pragma once

#include "mdopt/forward.hpp"

namespace mdopt {

/// Adjoint states on the forward time mesh. psi_c^N = 0 (terminal
/// condition); every psi_p slice has zero mean.
struct AdjointTrajectory {
  std::vector<ScalarField> psi_c;
  std::vector<ScalarField> psi_p;
};

/// Backward-in-time implicit solve of
///   -phi d(psi)/dt - div(D(v) grad psi) + K grad p . grad psi = c - c_target
/// with zero dispersive boundary flux. Step n uses the forward velocity v^n
/// and the mismatch at slice n; the advective term is the exact transpose of
/// the forward conservative upwind operator (upwinding against the reversed
/// flow). Cross-dispersion is deferred from the previously solved slice.
std::vector<ScalarField> solve_adjoint_concentration(const Grid& grid, const MediumFields& medium,
                                                     const StateTrajectory& states,
                                                     const std::vector<ScalarField>& c_target,
                                                     const SolverOptions& opts = {});

/// Per-cell flux F = K (Ehat (x) grad_c) grad_psi with the velocity Jacobian
/// evaluated at the cell velocity. Gradients are centered inside, one-sided
/// at boundary cells with the boundary-normal component zeroed.
VectorField assemble_Ehat_flux(const Grid& grid, const MediumFields& medium,
                               const VectorField& v_cell, const ScalarField& c,
                               const ScalarField& psi_c, double eps_reg);

/// Conservative divergence of a cell-centered flux: face values are the
/// adjacent-cell averages and boundary faces carry none.
ScalarField divergence_of_cell_flux(const Grid& grid, const VectorField& flux);

/// Solves -div(K grad psi_p) = alpha (p - p_target) - div(F_Ehat)
///        + div(c K grad psi_c), zero-flux boundary, zero-mean psi_p.
/// The alpha term is mean-corrected; the flux divergences are conservative
/// and hence mean-free already. The face concentration in the advective
/// source is upwinded by the forward face velocity, mirroring the forward
/// advective flux whose velocity sensitivity this term represents.
ScalarField solve_adjoint_pressure(const Grid& grid, const MediumFields& medium,
                                   const ScalarField& p, const DarcyVelocity& velocity,
                                   const ScalarField& c, const ScalarField& psi_c,
                                   const ScalarField& p_target, double alpha, double eps_reg,
                                   const SolverOptions& opts = {});

/// Full adjoint sweep. The adjoint-pressure alpha source is weighted zero on
/// the terminal slice, matching the left-endpoint objective quadrature that
/// never samples p^N.
AdjointTrajectory run_adjoint(const Grid& grid, const MediumFields& medium,
                              const StateTrajectory& states,
                              const std::vector<ScalarField>& c_target,
                              const std::vector<ScalarField>& p_target, double alpha,
                              double eps_reg, const SolverOptions& opts = {});

}  // namespace mdopt
