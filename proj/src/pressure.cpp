#include "mdopt/pressure.hpp"

#include <cmath>

#include "mdopt/errors.hpp"

namespace mdopt {

FaceField harmonic_face_permeability(const Grid& grid, const ScalarField& perm) {
  FaceField f = make_face_field(grid);
  const auto& n = grid.n;
  for (int axis = 0; axis < grid.dim; ++axis) {
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          // interior face between cell (i,j,k) and its +axis neighbor
          std::array<int, 3> c{i, j, k};
          if (c[axis] + 1 >= n[axis]) continue;
          std::array<int, 3> nb{i, j, k};
          nb[axis] += 1;
          const double kl = perm[grid.idx(i, j, k)];
          const double kr = perm[grid.idx(nb[0], nb[1], nb[2])];
          std::array<int, 3> fc{i, j, k};
          fc[axis] += 1;
          f.axis[axis][grid.fidx(axis, fc[0], fc[1], fc[2])] = 2.0 * kl * kr / (kl + kr);
        }
  }
  return f;
}

void apply_neumann_diffusion(const Grid& grid, const FaceField& face_perm, const ScalarField& x,
                             ScalarField& y) {
  y.assign(x.size(), 0.0);
  const auto& n = grid.n;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h2 = 1.0 / (grid.h[axis] * grid.h[axis]);
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          std::array<int, 3> c{i, j, k};
          if (c[axis] + 1 >= n[axis]) continue;
          std::array<int, 3> nb{i, j, k};
          nb[axis] += 1;
          std::array<int, 3> fc{i, j, k};
          fc[axis] += 1;
          const double kf = face_perm.axis[axis][grid.fidx(axis, fc[0], fc[1], fc[2])];
          const long il = grid.idx(i, j, k);
          const long ir = grid.idx(nb[0], nb[1], nb[2]);
          const double flux = kf * (x[ir] - x[il]) * inv_h2;  // (K grad x)/h
          y[il] -= flux;
          y[ir] += flux;
        }
  }
}

ScalarField solve_pressure(const Grid& grid, const MediumFields& medium, const ScalarField& rhs,
                           const SolverOptions& opts, const ScalarField* initial_guess) {
  medium.validate(grid);
  if (rhs.size() != static_cast<std::size_t>(grid.num_cells()))
    throw std::invalid_argument("solve_pressure: rhs size does not match grid");

  const double vol = grid.cell_volume();
  const double total = field_sum(rhs) * vol;
  const double scale = field_l2(rhs) * std::sqrt(vol);
  if (std::abs(total) > 1e-10 * std::max(scale, 1e-300))
    throw CompatibilityError("solve_pressure: source does not integrate to zero (got " +
                             std::to_string(total) + ")");

  const FaceField face_perm = harmonic_face_permeability(grid, medium.perm);

  // Jacobi diagonal of -div(K grad)
  ScalarField diag(rhs.size(), 0.0);
  const auto& n = grid.n;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h2 = 1.0 / (grid.h[axis] * grid.h[axis]);
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          std::array<int, 3> c{i, j, k};
          if (c[axis] + 1 >= n[axis]) continue;
          std::array<int, 3> nb{i, j, k};
          nb[axis] += 1;
          std::array<int, 3> fc{i, j, k};
          fc[axis] += 1;
          const double kf = face_perm.axis[axis][grid.fidx(axis, fc[0], fc[1], fc[2])] * inv_h2;
          diag[grid.idx(i, j, k)] += kf;
          diag[grid.idx(nb[0], nb[1], nb[2])] += kf;
        }
  }
  ScalarField inv_diag(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;

  ScalarField p = initial_guess ? *initial_guess : ScalarField(rhs.size(), 0.0);
  const ApplyFn apply = [&](const ScalarField& x, ScalarField& y) {
    apply_neumann_diffusion(grid, face_perm, x, y);
  };
  pcg_solve(apply, rhs, p, inv_diag, opts.pressure_tol, opts.max_iterations(grid), true);
  subtract_mean(p);
  return p;
}

DarcyVelocity compute_darcy_velocity(const Grid& grid, const MediumFields& medium,
                                     const ScalarField& p) {
  DarcyVelocity v;
  v.face = make_face_field(grid);
  v.cell = make_vector_field(grid);
  const FaceField face_perm = harmonic_face_permeability(grid, medium.perm);
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
          std::array<int, 3> fc{i, j, k};
          fc[axis] += 1;
          const long f = grid.fidx(axis, fc[0], fc[1], fc[2]);
          v.face.axis[axis][f] = -face_perm.axis[axis][f] *
                                 (p[grid.idx(nb[0], nb[1], nb[2])] - p[grid.idx(i, j, k)]) * inv_h;
        }
    // cell centers: average of the two bounding faces along this axis
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          std::array<int, 3> lo{i, j, k};
          std::array<int, 3> hi{i, j, k};
          hi[axis] += 1;
          const double fl = v.face.axis[axis][grid.fidx(axis, lo[0], lo[1], lo[2])];
          const double fh = v.face.axis[axis][grid.fidx(axis, hi[0], hi[1], hi[2])];
          v.cell.comp[axis][grid.idx(i, j, k)] = 0.5 * (fl + fh);
        }
  }
  return v;
}

}  // namespace mdopt
