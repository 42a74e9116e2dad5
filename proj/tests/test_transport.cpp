#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mdopt/forward.hpp"

using namespace mdopt;

namespace {

constexpr double kPi = 3.14159265358979323846;

DarcyVelocity zero_velocity(const Grid& grid) {
  DarcyVelocity v;
  v.face = make_face_field(grid);
  v.cell = make_vector_field(grid);
  return v;
}

/// Heat-equation manufactured solution c* = sin(w t) cos(pi x) cos(pi y),
/// c*(0) = 0; returns the L2 error at t = T for an n x n grid with n_steps.
double heat_mms_error(int n, int n_steps) {
  const Grid grid = Grid::box_2d(n, n, 1.0, 1.0);
  const double phi = 0.8, dm = 0.05;
  const MediumFields medium = MediumFields::uniform(grid, phi, 1.0, dm, 0.0, 0.0);
  const double total_time = 0.5, w = 2.0;
  const double dt = total_time / n_steps;
  const DarcyVelocity v = zero_velocity(grid);

  ScalarField c(grid.num_cells(), 0.0);
  ScalarField rhs(grid.num_cells());
  for (int step = 1; step <= n_steps; ++step) {
    const double t = step * dt;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec x = grid.cell_center(i, j);
        const double shape = std::cos(kPi * x[0]) * std::cos(kPi * x[1]);
        rhs[grid.idx(i, j)] =
            phi * (w * std::cos(w * t) + dm * 2.0 * kPi * kPi * std::sin(w * t)) * shape;
      }
    c = advance_concentration(grid, medium, c, v, rhs, dt);
  }
  double err2 = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec x = grid.cell_center(i, j);
      const double exact =
          std::sin(w * total_time) * std::cos(kPi * x[0]) * std::cos(kPi * x[1]);
      const double d = c[grid.idx(i, j)] - exact;
      err2 += d * d * grid.cell_volume();
    }
  return std::sqrt(err2);
}

ScalarField dipole(const Grid& grid, double magnitude) {
  ScalarField q(grid.num_cells(), 0.0);
  q[grid.idx(grid.n[0] / 4, grid.n[1] / 2)] = magnitude;
  q[grid.idx(grid.n[0] - 1 - grid.n[0] / 4, grid.n[1] / 2)] = -magnitude;
  return q;
}

}  // namespace

TEST_CASE("zero state and source stay zero") {
  const Grid grid = Grid::box_2d(8, 8, 1.0, 1.0);
  const MediumFields medium = MediumFields::uniform(grid, 1.0, 1.0, 1e-2, 0.1, 0.5);
  const ScalarField c = advance_concentration(grid, medium, ScalarField(grid.num_cells(), 0.0),
                                              zero_velocity(grid), ScalarField(grid.num_cells(), 0.0),
                                              0.1);
  CHECK(field_max_abs(c) == 0.0);
}

TEST_CASE("pure diffusion manufactured solution decays under refinement") {
  const double e1 = heat_mms_error(16, 10);
  const double e2 = heat_mms_error(32, 20);
  CHECK(e2 < e1);
  CHECK(e1 / e2 >= 1.6);  // combined first-order-in-time, second-order-in-space
}

TEST_CASE("single step conserves phi-weighted mass against the source") {
  const Grid grid = Grid::box_2d(24, 24, 1.0, 1.0);
  MediumFields medium = MediumFields::uniform(grid, 0.6, 1.0, 1e-2, 0.1, 0.5);
  const ScalarField q = dipole(grid, 20.0);
  const ScalarField p = solve_pressure(grid, medium, q);
  const DarcyVelocity v = compute_darcy_velocity(grid, medium, p);

  ScalarField c(grid.num_cells());
  for (long i = 0; i < grid.num_cells(); ++i) c[i] = 0.3 + 0.01 * ((i * 97) % 13);
  const double dt = 0.05;
  const ScalarField c_new = advance_concentration(grid, medium, c, v, q, dt);

  double before = 0.0, after = 0.0;
  for (long i = 0; i < grid.num_cells(); ++i) {
    before += medium.phi[i] * c[i] * grid.cell_volume();
    after += medium.phi[i] * c_new[i] * grid.cell_volume();
  }
  const double injected = dt * field_sum(q) * grid.cell_volume();
  CHECK(std::abs(after - before - injected) <= 1e-10 * field_l1(c_new) * grid.cell_volume());
}

TEST_CASE("upwind advection moves mass downstream") {
  const Grid grid = Grid::box_2d(16, 4, 1.0, 0.25);
  const MediumFields medium = MediumFields::uniform(grid, 1.0, 1.0, 1e-14, 0.0, 0.0);
  // uniform rightward velocity imposed directly on interior faces
  DarcyVelocity v = zero_velocity(grid);
  for (int j = 0; j < grid.n[1]; ++j)
    for (int i = 1; i < grid.n[0]; ++i) v.face.axis[0][grid.fidx(0, i, j)] = 1.0;
  for (int j = 0; j < grid.n[1]; ++j)
    for (int i = 0; i < grid.n[0]; ++i)
      v.cell.comp[0][grid.idx(i, j)] =
          0.5 * (v.face.axis[0][grid.fidx(0, i, j)] + v.face.axis[0][grid.fidx(0, i + 1, j)]);

  ScalarField c(grid.num_cells(), 0.0);
  for (int j = 0; j < grid.n[1]; ++j) c[grid.idx(2, j)] = 1.0;
  const ScalarField c_new = advance_concentration(grid, medium, c, v, ScalarField(grid.num_cells(), 0.0), 0.02);

  double left = 0.0, right = 0.0;
  for (int j = 0; j < grid.n[1]; ++j)
    for (int i = 0; i < grid.n[0]; ++i) {
      (i <= 2 ? left : right) += c_new[grid.idx(i, j)];
    }
  CHECK(right > 0.0);
  CHECK(left < field_sum(c));
  // nothing flows upstream of the blob
  for (int j = 0; j < grid.n[1]; ++j)
    for (int i = 0; i < 2; ++i) CHECK(c_new[grid.idx(i, j)] <= 1e-10);
}

TEST_CASE("nonnegativity for diagonal dispersion and nonnegative source") {
  const Grid grid = Grid::box_2d(16, 16, 1.0, 1.0);
  MediumFields medium = MediumFields::uniform(grid, 0.5, 1.0, 1e-2, 0.2, 0.2);
  const ScalarField q = dipole(grid, 10.0);
  const ScalarField p = solve_pressure(grid, medium, q);
  const DarcyVelocity v = compute_darcy_velocity(grid, medium, p);
  ScalarField src(grid.num_cells(), 0.0);
  src[grid.idx(4, 8)] = 5.0;  // nonnegative source only
  ScalarField c(grid.num_cells(), 0.0);
  for (int step = 0; step < 10; ++step) c = advance_concentration(grid, medium, c, v, src, 0.05);
  double lowest = 0.0;
  for (double x : c) lowest = std::min(lowest, x);
  CHECK(lowest >= -1e-10);
}

TEST_CASE("forward run: zero inputs give identically zero trajectory") {
  const Grid grid = Grid::box_2d(8, 8, 1.0, 1.0);
  const MediumFields medium = MediumFields::uniform(grid, 1.0, 1.0, 1e-2, 0.1, 0.5);
  const StateTrajectory traj = run_forward(grid, medium, ScalarField(grid.num_cells(), 0.0),
                                           ControlTrajectory::zeros(grid, 5), 1.0, 5);
  for (int n = 0; n <= 5; ++n) {
    CHECK(field_max_abs(traj.c[n]) == 0.0);
    CHECK(field_max_abs(traj.p[n]) == 0.0);
    CHECK(field_max_abs(traj.v[n].face.axis[0]) == 0.0);
  }
}

TEST_CASE("forward run conserves mass at every step") {
  const Grid grid = Grid::box_2d(24, 24, 1.0, 1.0);
  MediumFields medium = MediumFields::uniform(grid, 0.5, 1.0, 2e-2, 0.05, 0.3);
  const ScalarField q = dipole(grid, 30.0);
  ControlTrajectory h = ControlTrajectory::zeros(grid, 12);
  // admissible time-varying control: zero-mean cosine pattern
  for (int n = 0; n <= 12; ++n)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int i = 0; i < grid.n[0]; ++i) {
        const Vec x = grid.cell_center(i, j);
        h.slices[n][grid.idx(i, j)] =
            5.0 * std::sin(kPi * n / 12.0) * std::cos(kPi * x[0]) * std::cos(kPi * x[1]);
      }
  const StateTrajectory traj = run_forward(grid, medium, q, h, 0.6, 12);

  double max_l1 = 0.0;
  for (const auto& c : traj.c) max_l1 = std::max(max_l1, field_l1(c) * grid.cell_volume());
  for (const auto& c : traj.c) {
    double mass = 0.0;
    for (long i = 0; i < grid.num_cells(); ++i)
      mass += medium.phi[i] * c[i] * grid.cell_volume();
    CHECK(std::abs(mass) <= 1e-10 * std::max(max_l1, 1e-12));
  }
}

TEST_CASE("time-constant sources keep the pressure constant across steps") {
  const Grid grid = Grid::box_2d(16, 16, 1.0, 1.0);
  const MediumFields medium = MediumFields::uniform(grid, 1.0, 1.0, 1e-2, 0.1, 0.5);
  const ScalarField q = dipole(grid, 8.0);
  const StateTrajectory traj = run_forward(grid, medium, q, ControlTrajectory::zeros(grid, 6), 0.3, 6);
  for (int n = 1; n <= 6; ++n) {
    double worst = 0.0;
    for (long c = 0; c < grid.num_cells(); ++c)
      worst = std::max(worst, std::abs(traj.p[n][c] - traj.p[0][c]));
    CHECK(worst <= 1e-12 * std::max(1.0, field_max_abs(traj.p[0])));
  }
}

TEST_CASE("forward run in 3D conserves mass") {
  const Grid grid = Grid::box_3d(8, 8, 8, 1.0, 1.0, 1.0);
  MediumFields medium = MediumFields::uniform(grid, 0.7, 1.0, 1e-2, 0.05, 0.2);
  ScalarField q(grid.num_cells(), 0.0);
  q[grid.idx(2, 4, 4)] = 40.0;
  q[grid.idx(5, 4, 4)] = -40.0;
  const StateTrajectory traj = run_forward(grid, medium, q, ControlTrajectory::zeros(grid, 5), 0.25, 5);
  double max_l1 = 1e-12;
  for (const auto& c : traj.c) max_l1 = std::max(max_l1, field_l1(c) * grid.cell_volume());
  for (const auto& c : traj.c) {
    double mass = 0.0;
    for (long i = 0; i < grid.num_cells(); ++i)
      mass += medium.phi[i] * c[i] * grid.cell_volume();
    CHECK(std::abs(mass) <= 1e-10 * max_l1);
  }
}
