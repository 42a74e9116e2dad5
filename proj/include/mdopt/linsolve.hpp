#pragma once

#include <functional>

#include "mdopt/grid.hpp"

namespace mdopt {

using ApplyFn = std::function<void(const ScalarField&, ScalarField&)>;

struct LinearSolveReport {
  long iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD (or SPSD-with-nullspace)
/// systems. With `project_zero_mean` the constant nullspace of a pure Neumann
/// operator is removed from b and from the iterate every iteration.
/// Throws IterationLimitError when the cap is hit.
LinearSolveReport pcg_solve(const ApplyFn& apply, const ScalarField& b, ScalarField& x,
                            const ScalarField& inv_diag, double rel_tol, long max_iter,
                            bool project_zero_mean);

/// Jacobi-preconditioned BiCGStab for the nonsymmetric transport systems.
LinearSolveReport bicgstab_solve(const ApplyFn& apply, const ScalarField& b, ScalarField& x,
                                 const ScalarField& inv_diag, double rel_tol, long max_iter);

}  // namespace mdopt
