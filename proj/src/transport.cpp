#include "mdopt/transport.hpp"

#include <cmath>
#include <stdexcept>

#include "mdopt/dispersion.hpp"
#include "mdopt/linsolve.hpp"

namespace mdopt {

namespace {

VectorField gradient_impl(const Grid& grid, const ScalarField& f, bool zero_boundary_normal) {
  VectorField g = make_vector_field(grid);
  const auto& n = grid.n;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          std::array<int, 3> c{i, j, k};
          const long idx = grid.idx(i, j, k);
          double val;
          if (c[axis] == 0 || c[axis] == n[axis] - 1) {
            if (zero_boundary_normal) {
              val = 0.0;
            } else {
              std::array<int, 3> a{i, j, k}, b{i, j, k};
              if (c[axis] == 0)
                a[axis] += 1;
              else
                b[axis] -= 1;
              val = (f[grid.idx(a[0], a[1], a[2])] - f[grid.idx(b[0], b[1], b[2])]) * inv_h;
            }
          } else {
            std::array<int, 3> a{i, j, k}, b{i, j, k};
            a[axis] += 1;
            b[axis] -= 1;
            val = 0.5 * (f[grid.idx(a[0], a[1], a[2])] - f[grid.idx(b[0], b[1], b[2])]) * inv_h;
          }
          g.comp[axis][idx] = val;
        }
  }
  return g;
}

/// Visits interior faces of `axis` with the flat indices of the two cells.
template <typename F>
void for_interior_faces(const Grid& grid, int axis, F&& body) {
  const auto& n = grid.n;
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        std::array<int, 3> c{i, j, k};
        if (c[axis] + 1 >= n[axis]) continue;
        std::array<int, 3> nb{i, j, k};
        nb[axis] += 1;
        std::array<int, 3> fc{i, j, k};
        fc[axis] += 1;
        body(grid.fidx(axis, fc[0], fc[1], fc[2]), grid.idx(i, j, k),
             grid.idx(nb[0], nb[1], nb[2]));
      }
}

}  // namespace

VectorField cell_gradient(const Grid& grid, const ScalarField& f) {
  return gradient_impl(grid, f, false);
}

VectorField cell_gradient_tangential(const Grid& grid, const ScalarField& f) {
  return gradient_impl(grid, f, true);
}

TransportStencil build_transport_stencil(const Grid& grid, const MediumFields& medium,
                                         const DarcyVelocity& velocity, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_transport_stencil: dt must be positive");
  TransportStencil st;
  st.dt = dt;
  st.phi_over_dt.resize(grid.num_cells());
  for (long c = 0; c < grid.num_cells(); ++c) st.phi_over_dt[c] = medium.phi[c] / dt;
  st.disp_normal = make_face_field(grid);
  st.vel = velocity.face;
  for (int axis = 0; axis < grid.dim; ++axis) {
    st.row[axis].assign(grid.num_faces(axis), {0.0, 0.0, 0.0});
    for_interior_faces(grid, axis, [&](long f, long left, long right) {
      Vec v_face = Vec::zero(grid.dim);
      for (int b = 0; b < grid.dim; ++b)
        v_face[b] = 0.5 * (velocity.cell.comp[b][left] + velocity.cell.comp[b][right]);
      DispersionParams params;
      params.phi = 0.5 * (medium.phi[left] + medium.phi[right]);
      params.d_m = medium.d_m;
      params.d_t = medium.d_t;
      params.d_l = medium.d_l;
      const Mat d = eval_dispersion_tensor(params, v_face);
      for (int b = 0; b < grid.dim; ++b) st.row[axis][f][static_cast<std::size_t>(b)] = d(axis, b);
      st.disp_normal.axis[axis][f] = d(axis, axis);
    });
  }
  return st;
}

void transport_apply(const Grid& grid, const TransportStencil& st, const ScalarField& x,
                     ScalarField& y) {
  y.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) y[c] = st.phi_over_dt[c] * x[c];
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for_interior_faces(grid, axis, [&](long f, long left, long right) {
      const double diff = st.disp_normal.axis[axis][f] * (x[right] - x[left]) * inv_h;
      y[left] -= diff * inv_h;
      y[right] += diff * inv_h;
      const double vf = st.vel.axis[axis][f];
      const double adv = vf >= 0.0 ? vf * x[left] : vf * x[right];
      y[left] += adv * inv_h;
      y[right] -= adv * inv_h;
    });
  }
}

void transport_apply_adjoint(const Grid& grid, const TransportStencil& st, const ScalarField& x,
                             ScalarField& y) {
  y.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) y[c] = st.phi_over_dt[c] * x[c];
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for_interior_faces(grid, axis, [&](long f, long left, long right) {
      const double diff = st.disp_normal.axis[axis][f] * (x[right] - x[left]) * inv_h;
      y[left] -= diff * inv_h;
      y[right] += diff * inv_h;
      const double vf = st.vel.axis[axis][f];
      if (vf >= 0.0)
        y[left] += vf * (x[left] - x[right]) * inv_h;
      else
        y[right] += -vf * (x[right] - x[left]) * inv_h;
    });
  }
}

ScalarField transport_diagonal(const Grid& grid, const TransportStencil& st) {
  ScalarField diag = st.phi_over_dt;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for_interior_faces(grid, axis, [&](long f, long left, long right) {
      const double dcoef = st.disp_normal.axis[axis][f] * inv_h * inv_h;
      diag[left] += dcoef;
      diag[right] += dcoef;
      const double vf = st.vel.axis[axis][f];
      if (vf >= 0.0)
        diag[left] += vf * inv_h;
      else
        diag[right] += -vf * inv_h;
    });
  }
  return diag;
}

ScalarField cross_dispersion_divergence(const Grid& grid, const TransportStencil& st,
                                        const VectorField& grad) {
  ScalarField out(grid.num_cells(), 0.0);
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double inv_h = 1.0 / grid.h[axis];
    for_interior_faces(grid, axis, [&](long f, long left, long right) {
      double flux = 0.0;
      for (int b = 0; b < grid.dim; ++b) {
        if (b == axis) continue;
        const double gb = 0.5 * (grad.comp[b][left] + grad.comp[b][right]);
        flux += st.row[axis][f][static_cast<std::size_t>(b)] * gb;
      }
      out[left] += flux * inv_h;
      out[right] -= flux * inv_h;
    });
  }
  return out;
}

ScalarField advance_concentration(const Grid& grid, const MediumFields& medium,
                                  const ScalarField& c_old, const DarcyVelocity& velocity,
                                  const ScalarField& rhs, double dt, const SolverOptions& opts) {
  if (c_old.size() != static_cast<std::size_t>(grid.num_cells()) || rhs.size() != c_old.size())
    throw std::invalid_argument("advance_concentration: field size does not match grid");
  const TransportStencil st = build_transport_stencil(grid, medium, velocity, dt);

  const VectorField grad_old = cell_gradient(grid, c_old);
  const ScalarField cross = cross_dispersion_divergence(grid, st, grad_old);

  ScalarField b(c_old.size());
  for (std::size_t c = 0; c < b.size(); ++c)
    b[c] = st.phi_over_dt[c] * c_old[c] + rhs[c] + cross[c];

  const ScalarField diag = transport_diagonal(grid, st);
  ScalarField inv_diag(diag.size());
  for (std::size_t c = 0; c < diag.size(); ++c) inv_diag[c] = 1.0 / diag[c];

  ScalarField c_new = c_old;
  const ApplyFn apply = [&](const ScalarField& x, ScalarField& y) {
    transport_apply(grid, st, x, y);
  };
  bicgstab_solve(apply, b, c_new, inv_diag, opts.transport_tol, opts.max_iterations(grid));
  return c_new;
}

}  // namespace mdopt
