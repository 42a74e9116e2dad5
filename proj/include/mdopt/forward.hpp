#pragma once

#include <vector>

#include "mdopt/pressure.hpp"
#include "mdopt/transport.hpp"

namespace mdopt {

/// Control slices h^0..h^N on the state time mesh; every slice must have
/// zero spatial mean (the admissible set).
struct ControlTrajectory {
  std::vector<ScalarField> slices;

  int n_steps() const { return static_cast<int>(slices.size()) - 1; }
  static ControlTrajectory zeros(const Grid& grid, int n_steps);
};

/// Forward states on t_n = n*dt, n = 0..N. c^0 = 0; p carries zero mean per
/// slice; velocities stored as both face fluxes and cell averages.
struct StateTrajectory {
  double dt = 0.0;
  std::vector<ScalarField> c;
  std::vector<ScalarField> p;
  std::vector<DarcyVelocity> v;

  int n_steps() const { return static_cast<int>(c.size()) - 1; }
};

/// Runs the coupled system: per step solve the Neumann pressure problem with
/// source q + h^n, form the Darcy velocity, and take one implicit transport
/// step with the same source. The pressure solve is skipped when the source
/// slice is unchanged (hash cache) since the pressure problem carries no
/// time derivative.
StateTrajectory run_forward(const Grid& grid, const MediumFields& medium, const ScalarField& q,
                            const ControlTrajectory& h, double total_time, int n_steps,
                            const SolverOptions& opts = {});

}  // namespace mdopt
