#include "mdopt/adjoint.hpp"

#include <stdexcept>

#include "mdopt/dispersion.hpp"
#include "mdopt/linsolve.hpp"

namespace mdopt {

std::vector<ScalarField> solve_adjoint_concentration(const Grid& grid, const MediumFields& medium,
                                                     const StateTrajectory& states,
                                                     const std::vector<ScalarField>& c_target,
                                                     const SolverOptions& opts) {
  const int n_steps = states.n_steps();
  if (static_cast<int>(c_target.size()) != n_steps + 1)
    throw std::invalid_argument("solve_adjoint_concentration: target length mismatch");
  const std::size_t cells = static_cast<std::size_t>(grid.num_cells());

  std::vector<ScalarField> psi(static_cast<std::size_t>(n_steps) + 1);
  psi[static_cast<std::size_t>(n_steps)] = ScalarField(cells, 0.0);

  for (int n = n_steps - 1; n >= 0; --n) {
    const TransportStencil st = build_transport_stencil(grid, medium, states.v[n], states.dt);
    const ScalarField& prev = psi[static_cast<std::size_t>(n) + 1];
    const VectorField grad_prev = cell_gradient(grid, prev);
    const ScalarField cross = cross_dispersion_divergence(grid, st, grad_prev);

    ScalarField b(cells);
    for (std::size_t c = 0; c < cells; ++c)
      b[c] = st.phi_over_dt[c] * prev[c] + (states.c[n][c] - c_target[n][c]) + cross[c];

    const ScalarField diag = transport_diagonal(grid, st);
    ScalarField inv_diag(cells);
    for (std::size_t c = 0; c < cells; ++c) inv_diag[c] = 1.0 / diag[c];

    ScalarField x = prev;
    const ApplyFn apply = [&](const ScalarField& in, ScalarField& out) {
      transport_apply_adjoint(grid, st, in, out);
    };
    bicgstab_solve(apply, b, x, inv_diag, opts.transport_tol, opts.max_iterations(grid));
    psi[static_cast<std::size_t>(n)] = std::move(x);
  }
  return psi;
}

VectorField assemble_Ehat_flux(const Grid& grid, const MediumFields& medium,
                               const VectorField& v_cell, const ScalarField& c,
                               const ScalarField& psi_c, double eps_reg) {
  const VectorField grad_c = cell_gradient_tangential(grid, c);
  const VectorField grad_psi = cell_gradient_tangential(grid, psi_c);
  VectorField flux = make_vector_field(grid);
  for (long cell = 0; cell < grid.num_cells(); ++cell) {
    Vec v = Vec::zero(grid.dim), gc = Vec::zero(grid.dim), gp = Vec::zero(grid.dim);
    for (int a = 0; a < grid.dim; ++a) {
      v[a] = v_cell.comp[a][cell];
      gc[a] = grad_c.comp[a][cell];
      gp[a] = grad_psi.comp[a][cell];
    }
    DispersionParams params;
    params.phi = medium.phi[cell];
    params.d_m = medium.d_m;
    params.d_t = medium.d_t;
    params.d_l = medium.d_l;
    const Tensor3 jac = eval_velocity_jacobian(params, v, eps_reg);
    const Vec f = kron_apply_Ehat(jac, gc, gp);
    for (int a = 0; a < grid.dim; ++a) flux.comp[a][cell] = medium.perm[cell] * f[a];
  }
  return flux;
}

ScalarField divergence_of_cell_flux(const Grid& grid, const VectorField& flux) {
  ScalarField div(grid.num_cells(), 0.0);
  const auto& n = grid.n;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          std::array<int, 3> c{i, j, k};
          if (c[axis] + 1 >= n[axis]) continue;
          std::array<int, 3> nb{i, j, k};
          nb[axis] += 1;
          const long left = grid.idx(i, j, k);
          const long right = grid.idx(nb[0], nb[1], nb[2]);
          const double face = 0.5 * (flux.comp[axis][left] + flux.comp[axis][right]);
          div[left] += face * inv_h;
          div[right] -= face * inv_h;
        }
  }
  return div;
}

ScalarField solve_adjoint_pressure(const Grid& grid, const MediumFields& medium,
                                   const ScalarField& p, const DarcyVelocity& velocity,
                                   const ScalarField& c, const ScalarField& psi_c,
                                   const ScalarField& p_target, double alpha, double eps_reg,
                                   const SolverOptions& opts) {
  const std::size_t cells = static_cast<std::size_t>(grid.num_cells());
  if (p.size() != cells || c.size() != cells || psi_c.size() != cells || p_target.size() != cells)
    throw std::invalid_argument("solve_adjoint_pressure: field size mismatch");

  ScalarField rhs(cells, 0.0);
  if (alpha != 0.0) {
    for (std::size_t i = 0; i < cells; ++i) rhs[i] = alpha * (p[i] - p_target[i]);
    subtract_mean(rhs);  // Neumann solvability; the mean is absorbed by the
                         // zero-mean constraint on psi_p
  }

  const VectorField ehat = assemble_Ehat_flux(grid, medium, velocity.cell, c, psi_c, eps_reg);
  const ScalarField div_ehat = divergence_of_cell_flux(grid, ehat);

  // conservative div(c K grad psi_c): arithmetic face c, harmonic face K
  const FaceField face_perm = harmonic_face_permeability(grid, medium.perm);
  ScalarField adv_div(cells, 0.0);
  const auto& n = grid.n;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          std::array<int, 3> cc{i, j, k};
          if (cc[axis] + 1 >= n[axis]) continue;
          std::array<int, 3> nb{i, j, k};
          nb[axis] += 1;
          std::array<int, 3> fc{i, j, k};
          fc[axis] += 1;
          const long left = grid.idx(i, j, k);
          const long right = grid.idx(nb[0], nb[1], nb[2]);
          const long f = grid.fidx(axis, fc[0], fc[1], fc[2]);
          const double kf = face_perm.axis[axis][f];
          // upwind the face concentration by the forward face velocity: the
          // forward advective flux is v_f c_up, so its velocity sensitivity
          // carries the upwind value, not the average
          const double vf = velocity.face.axis[axis][f];
          const double cf = vf >= 0.0 ? c[left] : c[right];
          const double flux = cf * kf * (psi_c[right] - psi_c[left]) * inv_h;
          adv_div[left] += flux * inv_h;
          adv_div[right] -= flux * inv_h;
        }
  }

  for (std::size_t i = 0; i < cells; ++i) rhs[i] += -div_ehat[i] + adv_div[i];
  return solve_pressure(grid, medium, rhs, opts);
}

AdjointTrajectory run_adjoint(const Grid& grid, const MediumFields& medium,
                              const StateTrajectory& states,
                              const std::vector<ScalarField>& c_target,
                              const std::vector<ScalarField>& p_target, double alpha,
                              double eps_reg, const SolverOptions& opts) {
  const int n_steps = states.n_steps();
  if (static_cast<int>(p_target.size()) != n_steps + 1 && alpha != 0.0)
    throw std::invalid_argument("run_adjoint: pressure target length mismatch");

  AdjointTrajectory adj;
  adj.psi_c = solve_adjoint_concentration(grid, medium, states, c_target, opts);
  adj.psi_p.resize(static_cast<std::size_t>(n_steps) + 1);
  const ScalarField zero(static_cast<std::size_t>(grid.num_cells()), 0.0);
  for (int n = 0; n <= n_steps; ++n) {
    const double alpha_n = (n < n_steps) ? alpha : 0.0;
    const ScalarField& pt = (alpha_n != 0.0) ? p_target[static_cast<std::size_t>(n)] : zero;
    adj.psi_p[static_cast<std::size_t>(n)] =
        solve_adjoint_pressure(grid, medium, states.p[n], states.v[n], states.c[n],
                               adj.psi_c[static_cast<std::size_t>(n)], pt, alpha_n, eps_reg, opts);
  }
  return adj;
}

}  // namespace mdopt
