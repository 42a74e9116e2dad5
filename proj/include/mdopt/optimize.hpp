#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "mdopt/adjoint.hpp"
#include "mdopt/errors.hpp"

namespace mdopt {

/// Target trajectories and weights of the tracking objective.
struct ObjectiveSpec {
  std::vector<ScalarField> c_target;
  std::vector<ScalarField> p_target;  // may be empty when alpha = 0
  double alpha = 0.0;
  double gamma = 1e-6;
};

/// Left-endpoint rectangle in time, cell sums in space:
///   J = sum_{n=0}^{N-1} dt [ 1/2|c^n-c_d^n|^2 + alpha/2|p^n-p_d^n|^2
///                            + gamma/2|h^n|^2 ].
double evaluate_objective(const Grid& grid, const StateTrajectory& states,
                          const ControlTrajectory& h, const ObjectiveSpec& objective);

/// Orthogonal projection onto the admissible set: per-slice mean removal.
ControlTrajectory project_admissible(const Grid& grid, ControlTrajectory h);

/// Pairing quadrature for gradients and optimality residuals: slices 1..N,
/// each weighted dt (the slice n control drives step n of the forward
/// model, so these are the samples the stepping actually sees).
double control_inner(const Grid& grid, double dt, const ControlTrajectory& a,
                     const ControlTrajectory& b);
double control_norm(const Grid& grid, double dt, const ControlTrajectory& a);

/// g^n = psi_c^n + psi_p^n + gamma h^n, projected slice-wise onto zero mean.
ControlTrajectory reduced_gradient(const Grid& grid, const AdjointTrajectory& adjoints,
                                   const ControlTrajectory& h, double gamma);

/// Everything needed to evaluate and differentiate the control objective.
struct Problem {
  Grid grid;
  MediumFields medium;
  ScalarField q;
  double total_time = 1.0;
  int n_steps = 1;
  ObjectiveSpec objective;
  double eps_reg = 1e-12;
  SolverOptions solver;

  StateTrajectory forward(const ControlTrajectory& h) const;
  double objective_value(const ControlTrajectory& h) const;
  /// Forward + adjoint sweep; returns the projected reduced gradient.
  ControlTrajectory gradient(const ControlTrajectory& h, StateTrajectory* states_out = nullptr,
                             double* objective_out = nullptr) const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int ls_trials = 0;
};

struct OptimizationReport {
  std::vector<IterationRecord> iterations;
  double final_objective = 0.0;
  double final_grad_norm = 0.0;
  double final_optimality = 0.0;  // max |<g, v-h>| / |v-h| over probe directions
  int total_iterations = 0;
  double wall_seconds = 0.0;
  bool converged = false;
  std::string stop_reason;
};

/// Carries the partial report out of a failed line search.
class OptimizeStagnation : public StagnationError {
 public:
  OptimizeStagnation(const std::string& what, OptimizationReport rep)
      : StagnationError(what), report(std::move(rep)) {}
  OptimizationReport report;
};

struct OptimizeOptions {
  int max_iters = 200;
  double tol_grad = 5e-5;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  std::uint64_t probe_seed = 1;  // for the final optimality residual
};

/// Projected gradient descent with Armijo backtracking; the step seed after
/// the first iteration is a Barzilai-Borwein estimate. Accepted iterates
/// strictly decrease J and every iterate is admissible.
std::pair<ControlTrajectory, OptimizationReport> optimize(const Problem& problem,
                                                          const ControlTrajectory& h0,
                                                          const OptimizeOptions& opts = {});

struct GradCheckRow {
  int direction = 0;
  double adjoint_value = 0.0;  // <g, dh> in the pairing quadrature
  double fd_value = 0.0;       // central difference of J along dh
  double rel_mismatch = 0.0;
};

/// Compares the adjoint directional derivative against a central finite
/// difference of J along random admissible unit directions.
std::vector<GradCheckRow> gradient_check(const Problem& problem, const ControlTrajectory& h,
                                         int n_directions, std::uint64_t seed, double fd_eps);

/// Random admissible control with unit pairing norm (probe directions).
ControlTrajectory random_admissible_direction(const Grid& grid, int n_steps, double dt,
                                              std::uint64_t seed);

/// max over probes v of |<g, v-h>| / |v-h|; the discrete first-order
/// optimality residual at h.
double optimality_residual(const Problem& problem, const ControlTrajectory& h,
                           const ControlTrajectory& g, int n_probes, std::uint64_t seed);

}  // namespace mdopt
