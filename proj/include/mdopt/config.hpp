#pragma once

#include <cstdint>
#include <string>

#include "mdopt/optimize.hpp"

namespace mdopt {

/// Parsed and validated run configuration. Flat `key = value` text format,
/// one entry per line, `#` comments; unknown keys are rejected so typos
/// cannot silently fall back to defaults. File paths are resolved relative
/// to the config file location.
struct RunConfig {
  int dim = 2;
  int nx = 0, ny = 0, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;
  double total_time = 1.0;
  int n_steps = 1;

  std::string phi_spec;   // number | file:PATH
  std::string perm_spec;  // number | file:PATH
  std::string q_spec;     // file:PATH | dipole:i1,j1[,k1],i2,j2[,k2],MAG
  double d_m = 0.0, d_t = 0.0, d_l = 0.0;
  double eps_reg = 1e-12;

  double alpha = 0.0;
  double gamma = 0.0;
  std::string targets_spec = "none";  // none | self_consistent | files:C_PREFIX,P_PREFIX
  std::string hstar_spec = "none";    // none | pulse:AMPLITUDE | files:PREFIX

  double pressure_tol = 1e-12;
  double transport_tol = 1e-13;
  long max_iter_factor = 50;

  int max_iters = 200;
  double tol_grad = 5e-5;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;

  int grad_check_directions = 10;
  double grad_check_eps = 1e-3;
  double grad_check_tol = 5e-2;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int snapshot_stride = 0;  // 0: final step only

  // built during parsing
  Grid grid;
  MediumFields medium;
  ScalarField q;

  SolverOptions solver_options() const;
  OptimizeOptions optimize_options() const;
};

/// Throws ConfigError naming the offending key on any validation failure.
RunConfig parse_config(const std::string& path);

/// Canonical re-emission of every accepted key; parsing the emitted text
/// reproduces an equal configuration.
std::string canonical_config_text(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace mdopt
