#include "mdopt/forward.hpp"

#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace mdopt {

namespace {

std::uint64_t fnv1a_hash(const ScalarField& f) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double x : f) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFFULL;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace

ControlTrajectory ControlTrajectory::zeros(const Grid& grid, int n_steps) {
  ControlTrajectory h;
  h.slices.assign(static_cast<std::size_t>(n_steps) + 1,
                  ScalarField(static_cast<std::size_t>(grid.num_cells()), 0.0));
  return h;
}

StateTrajectory run_forward(const Grid& grid, const MediumFields& medium, const ScalarField& q,
                            const ControlTrajectory& h, double total_time, int n_steps,
                            const SolverOptions& opts) {
  if (n_steps < 1) throw std::invalid_argument("run_forward: need at least one step");
  if (!(total_time > 0.0)) throw std::invalid_argument("run_forward: total_time must be positive");
  if (h.n_steps() != n_steps)
    throw std::invalid_argument("run_forward: control has wrong number of slices");
  const std::size_t cells = static_cast<std::size_t>(grid.num_cells());
  if (q.size() != cells) throw std::invalid_argument("run_forward: source size does not match grid");

  StateTrajectory traj;
  traj.dt = total_time / n_steps;
  traj.c.reserve(n_steps + 1);
  traj.p.reserve(n_steps + 1);
  traj.v.reserve(n_steps + 1);

  ScalarField rhs(cells);
  std::uint64_t cached_hash = 0;
  bool have_cache = false;

  auto pressure_for_slice = [&](int n) {
    for (std::size_t i = 0; i < cells; ++i) rhs[i] = q[i] + h.slices[static_cast<std::size_t>(n)][i];
    const std::uint64_t hash = fnv1a_hash(rhs);
    if (!have_cache || hash != cached_hash) {
      const ScalarField* warm = traj.p.empty() ? nullptr : &traj.p.back();
      traj.p.push_back(solve_pressure(grid, medium, rhs, opts, warm));
      traj.v.push_back(compute_darcy_velocity(grid, medium, traj.p.back()));
      cached_hash = hash;
      have_cache = true;
    } else {
      traj.p.push_back(traj.p.back());
      traj.v.push_back(traj.v.back());
    }
  };

  traj.c.emplace_back(cells, 0.0);
  pressure_for_slice(0);

  for (int n = 1; n <= n_steps; ++n) {
    pressure_for_slice(n);
    traj.c.push_back(
        advance_concentration(grid, medium, traj.c.back(), traj.v.back(), rhs, traj.dt, opts));
  }
  return traj;
}

}  // namespace mdopt
