#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mdopt/optimize.hpp"
#include "mdopt/rng.hpp"

using namespace mdopt;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScalarField dipole(const Grid& grid, double magnitude) {
  ScalarField q(grid.num_cells(), 0.0);
  q[grid.idx(grid.n[0] / 4, grid.n[1] / 2)] = magnitude;
  q[grid.idx(grid.n[0] - 1 - grid.n[0] / 4, grid.n[1] / 2)] = -magnitude;
  return q;
}

/// Smooth admissible reference control used to manufacture targets.
ControlTrajectory reference_control(const Grid& grid, int n_steps, double amplitude) {
  ControlTrajectory h = ControlTrajectory::zeros(grid, n_steps);
  for (int n = 0; n <= n_steps; ++n)
    for (int k = 0; k < grid.n[2]; ++k)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int i = 0; i < grid.n[0]; ++i) {
          const Vec x = grid.cell_center(i, j, k);
          double shape = std::cos(kPi * x[0] / grid.length[0]) *
                         std::cos(kPi * x[1] / grid.length[1]);
          h.slices[n][grid.idx(i, j, k)] =
              amplitude * std::sin(kPi * n / std::max(1, n_steps)) * shape;
        }
  return project_admissible(grid, std::move(h));
}

/// 2D fixture with targets manufactured from a known admissible control.
Problem self_consistent_problem(int n, int n_steps, double gamma, double amplitude) {
  Problem prob;
  prob.grid = Grid::box_2d(n, n, 1.0, 1.0);
  prob.medium = MediumFields::uniform(prob.grid, 0.5, 1.0, 2e-2, 0.1, 0.5);
  prob.q = dipole(prob.grid, 30.0);
  prob.total_time = 0.5;
  prob.n_steps = n_steps;
  prob.eps_reg = 1e-12;
  const ControlTrajectory h_star = reference_control(prob.grid, n_steps, amplitude);
  const StateTrajectory ref = prob.forward(h_star);
  prob.objective.c_target = ref.c;
  prob.objective.p_target = ref.p;
  prob.objective.alpha = 0.0;
  prob.objective.gamma = gamma;
  return prob;
}

}  // namespace

TEST_CASE("objective trivial values") {
  Problem prob = self_consistent_problem(8, 4, 1e-6, 4.0);
  // c = c_target, p = p_target, h = 0 => J = 0
  StateTrajectory states;
  states.dt = prob.total_time / prob.n_steps;
  states.c = prob.objective.c_target;
  states.p = prob.objective.p_target;
  states.v.assign(states.c.size(), DarcyVelocity{});
  const ControlTrajectory zero = ControlTrajectory::zeros(prob.grid, prob.n_steps);
  CHECK(evaluate_objective(prob.grid, states, zero, prob.objective) == 0.0);
}

TEST_CASE("objective: constant unit mismatch integrates to one half") {
  // unit square, T = 1, alpha = gamma = 0, c - c_d = 1 everywhere
  const Grid grid = Grid::box_2d(8, 8, 1.0, 1.0);
  const int n_steps = 5;
  StateTrajectory states;
  states.dt = 1.0 / n_steps;
  ObjectiveSpec objective;
  objective.alpha = 0.0;
  objective.gamma = 0.0;
  for (int n = 0; n <= n_steps; ++n) {
    states.c.emplace_back(grid.num_cells(), 1.0);
    states.p.emplace_back(grid.num_cells(), 0.0);
    states.v.push_back(DarcyVelocity{});
    objective.c_target.emplace_back(grid.num_cells(), 0.0);
    objective.p_target.emplace_back(grid.num_cells(), 0.0);
  }
  const ControlTrajectory h = ControlTrajectory::zeros(grid, n_steps);
  CHECK(evaluate_objective(grid, states, h, objective) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("objective: control term is exactly quadratic") {
  Problem prob = self_consistent_problem(8, 4, 0.3, 4.0);
  prob.objective.alpha = 0.0;
  StateTrajectory states;
  states.dt = prob.total_time / prob.n_steps;
  states.c = prob.objective.c_target;
  states.p = prob.objective.p_target;
  states.v.assign(states.c.size(), DarcyVelocity{});
  ControlTrajectory h = reference_control(prob.grid, prob.n_steps, 2.0);
  const double j1 = evaluate_objective(prob.grid, states, h, prob.objective);
  for (auto& slice : h.slices)
    for (double& x : slice) x *= 2.0;
  const double j2 = evaluate_objective(prob.grid, states, h, prob.objective);
  CHECK(j2 == doctest::Approx(4.0 * j1).epsilon(1e-13));
}

TEST_CASE("projection is idempotent and kills constants") {
  const Grid grid = Grid::box_2d(6, 6, 1.0, 1.0);
  Rng rng(9);
  ControlTrajectory h = ControlTrajectory::zeros(grid, 3);
  for (auto& slice : h.slices)
    for (double& x : slice) x = rng.uniform(-5.0, 5.0);
  const ControlTrajectory p1 = project_admissible(grid, h);
  const ControlTrajectory p2 = project_admissible(grid, p1);
  for (std::size_t n = 0; n < p1.slices.size(); ++n) {
    CHECK(std::abs(field_sum(p1.slices[n])) <= 1e-12 * field_l1(h.slices[n]));
    for (std::size_t i = 0; i < p1.slices[n].size(); ++i)
      CHECK(p1.slices[n][i] == doctest::Approx(p2.slices[n][i]).epsilon(1e-15));
  }

  ControlTrajectory constant = ControlTrajectory::zeros(grid, 2);
  for (auto& slice : constant.slices) slice.assign(slice.size(), 42.0);
  const ControlTrajectory zeroed = project_admissible(grid, constant);
  for (const auto& slice : zeroed.slices) CHECK(field_max_abs(slice) <= 1e-12);
}

TEST_CASE("projection matches the brute-force least-squares oracle") {
  // min |h - z|^2 subject to sum z = 0 via the KKT system on a 4x4 grid,
  // solved densely by Gaussian elimination.
  const Grid grid = Grid::box_2d(4, 4, 1.0, 1.0);
  const int m = 16;
  Rng rng(31);
  ScalarField h(m);
  for (double& x : h) x = rng.uniform(-2.0, 2.0);

  // KKT: [2I 1; 1^T 0][z; lambda] = [2h; 0]
  const int dim = m + 1;
  std::vector<double> a(dim * dim, 0.0), b(dim, 0.0);
  for (int i = 0; i < m; ++i) {
    a[i * dim + i] = 2.0;
    a[i * dim + m] = 1.0;
    a[m * dim + i] = 1.0;
    b[i] = 2.0 * h[i];
  }
  for (int col = 0; col < dim; ++col) {
    int pivot = col;
    for (int r = col + 1; r < dim; ++r)
      if (std::abs(a[r * dim + col]) > std::abs(a[pivot * dim + col])) pivot = r;
    for (int c2 = 0; c2 < dim; ++c2) std::swap(a[col * dim + c2], a[pivot * dim + c2]);
    std::swap(b[col], b[pivot]);
    for (int r = 0; r < dim; ++r) {
      if (r == col || a[col * dim + col] == 0.0) continue;
      const double f = a[r * dim + col] / a[col * dim + col];
      for (int c2 = col; c2 < dim; ++c2) a[r * dim + c2] -= f * a[col * dim + c2];
      b[r] -= f * b[col];
    }
  }
  ScalarField oracle(m);
  for (int i = 0; i < m; ++i) oracle[i] = b[i] / a[i * dim + i];

  ControlTrajectory traj = ControlTrajectory::zeros(grid, 1);
  traj.slices[0] = h;
  traj.slices[1] = h;
  const ControlTrajectory projected = project_admissible(grid, traj);
  for (int i = 0; i < m; ++i)
    CHECK(projected.slices[0][i] == doctest::Approx(oracle[i]).epsilon(1e-12));
}

TEST_CASE("reduced gradient trivial forms") {
  const Grid grid = Grid::box_2d(6, 6, 1.0, 1.0);
  const int n_steps = 3;
  AdjointTrajectory adj;
  adj.psi_c.assign(n_steps + 1, ScalarField(grid.num_cells(), 0.0));
  adj.psi_p.assign(n_steps + 1, ScalarField(grid.num_cells(), 0.0));

  ControlTrajectory h = reference_control(grid, n_steps, 2.0);
  const double gamma = 0.7;
  const ControlTrajectory g = reduced_gradient(grid, adj, h, gamma);
  for (std::size_t n = 0; n < g.slices.size(); ++n)
    for (std::size_t i = 0; i < g.slices[n].size(); ++i)
      CHECK(g.slices[n][i] == doctest::Approx(gamma * h.slices[n][i]).epsilon(1e-13));

  // spatially constant adjoints project to zero
  for (auto& s : adj.psi_c) s.assign(s.size(), 3.0);
  for (auto& s : adj.psi_p) s.assign(s.size(), -1.25);
  const ControlTrajectory g2 =
      reduced_gradient(grid, adj, ControlTrajectory::zeros(grid, n_steps), gamma);
  for (const auto& s : g2.slices) CHECK(field_max_abs(s) <= 1e-14);
}

TEST_CASE("adjoint directional derivative matches finite differences") {
  Problem prob = self_consistent_problem(16, 8, 1e-6, 6.0);
  const ControlTrajectory h0 = ControlTrajectory::zeros(prob.grid, prob.n_steps);
  const auto rows = gradient_check(prob, h0, 4, 11, 1e-3);
  for (const auto& row : rows) {
    INFO("direction ", row.direction, " adjoint ", row.adjoint_value, " fd ", row.fd_value);
    CHECK(row.rel_mismatch <= 0.1);  // coarse grid; the acceptance suite tightens this
  }
}

TEST_CASE("strong regularization keeps the control near zero") {
  Problem prob = self_consistent_problem(12, 6, 1e3, 0.0);
  // targets from h* = 0, so the tracking part is already optimal at h = 0;
  // gamma dominates and the optimizer must stay there
  OptimizeOptions opts;
  opts.max_iters = 30;
  opts.tol_grad = 1e-10;
  auto [h, report] = optimize(prob, reference_control(prob.grid, prob.n_steps, 0.05), opts);
  const double dt = prob.total_time / prob.n_steps;
  CHECK(control_norm(prob.grid, dt, h) <= 1e-3);
  for (std::size_t i = 1; i < report.iterations.size(); ++i)
    CHECK(report.iterations[i].objective <= report.iterations[i - 1].objective);
}

TEST_CASE("optimizer reduces the self-consistent tracking objective") {
  Problem prob = self_consistent_problem(12, 6, 1e-6, 5.0);
  OptimizeOptions opts;
  opts.max_iters = 60;
  opts.tol_grad = 1e-12;
  auto [h, report] = optimize(prob, ControlTrajectory::zeros(prob.grid, prob.n_steps), opts);
  CHECK(report.iterations.front().objective > 0.0);
  CHECK(report.final_objective <= 0.05 * report.iterations.front().objective);
  // every iterate admissible
  for (const auto& slice : h.slices)
    CHECK(std::abs(field_sum(slice)) <= 1e-12 * std::max(1.0, field_l1(slice)));
  // J non-increasing
  for (std::size_t i = 1; i < report.iterations.size(); ++i)
    CHECK(report.iterations[i].objective <= report.iterations[i - 1].objective);
}

TEST_CASE("gamma must be positive") {
  Problem prob = self_consistent_problem(8, 4, 1e-6, 2.0);
  prob.objective.gamma = 0.0;
  CHECK_THROWS_AS(optimize(prob, ControlTrajectory::zeros(prob.grid, prob.n_steps), {}),
                  std::invalid_argument);
}

TEST_CASE("small 3D optimization smoke") {
  Problem prob;
  prob.grid = Grid::box_3d(6, 6, 6, 1.0, 1.0, 1.0);
  prob.medium = MediumFields::uniform(prob.grid, 0.5, 1.0, 2e-2, 0.1, 0.5);
  prob.q.assign(prob.grid.num_cells(), 0.0);
  prob.q[prob.grid.idx(1, 3, 3)] = 40.0;
  prob.q[prob.grid.idx(4, 3, 3)] = -40.0;
  prob.total_time = 0.2;
  prob.n_steps = 4;

  ControlTrajectory h_star = ControlTrajectory::zeros(prob.grid, prob.n_steps);
  for (int n = 0; n <= prob.n_steps; ++n)
    for (int k = 0; k < 6; ++k)
      for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i) {
          const Vec x = prob.grid.cell_center(i, j, k);
          h_star.slices[n][prob.grid.idx(i, j, k)] =
              3.0 * std::sin(kPi * n / 4.0) * std::cos(kPi * x[0]) * std::cos(kPi * x[2]);
        }
  h_star = project_admissible(prob.grid, std::move(h_star));
  const StateTrajectory ref = prob.forward(h_star);
  prob.objective.c_target = ref.c;
  prob.objective.p_target = ref.p;
  prob.objective.alpha = 0.0;
  prob.objective.gamma = 1e-6;

  OptimizeOptions opts;
  opts.max_iters = 10;
  opts.tol_grad = 1e-12;
  auto [h, report] = optimize(prob, ControlTrajectory::zeros(prob.grid, prob.n_steps), opts);
  CHECK(report.final_objective < report.iterations.front().objective);
  CHECK(report.iterations.size() >= 2);
}
