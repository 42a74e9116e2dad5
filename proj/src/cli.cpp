#include "mdopt/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "mdopt/config.hpp"
#include "mdopt/errors.hpp"
#include "mdopt/io.hpp"

namespace mdopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TargetData {
  ObjectiveSpec objective;
  ControlTrajectory h_star;  // control used to manufacture self-consistent targets
  bool have_h_star = false;
};

ControlTrajectory build_hstar(const RunConfig& cfg) {
  if (cfg.hstar_spec.rfind("files:", 0) == 0)
    return read_control_series(cfg.hstar_spec.substr(6), cfg.grid, cfg.n_steps);
  if (cfg.hstar_spec.rfind("pulse:", 0) == 0) {
    const double amplitude = std::strtod(cfg.hstar_spec.c_str() + 6, nullptr);
    ControlTrajectory h = ControlTrajectory::zeros(cfg.grid, cfg.n_steps);
    for (int n = 0; n <= cfg.n_steps; ++n)
      for (int k = 0; k < cfg.grid.n[2]; ++k)
        for (int j = 0; j < cfg.grid.n[1]; ++j)
          for (int i = 0; i < cfg.grid.n[0]; ++i) {
            const Vec x = cfg.grid.cell_center(i, j, k);
            double shape = 1.0;
            for (int a = 0; a < cfg.grid.dim; ++a)
              shape *= std::cos(kPi * x[a] / cfg.grid.length[a]);
            h.slices[static_cast<std::size_t>(n)][cfg.grid.idx(i, j, k)] =
                amplitude * std::sin(kPi * n / cfg.n_steps) * shape;
          }
    return project_admissible(cfg.grid, std::move(h));
  }
  throw ConfigError("config: key 'hstar' does not define a control ('" + cfg.hstar_spec + "')");
}

TargetData build_targets(const RunConfig& cfg) {
  TargetData data;
  data.objective.alpha = cfg.alpha;
  data.objective.gamma = cfg.gamma;
  if (cfg.targets_spec == "self_consistent") {
    data.h_star = build_hstar(cfg);
    data.have_h_star = true;
    const StateTrajectory ref = run_forward(cfg.grid, cfg.medium, cfg.q, data.h_star,
                                            cfg.total_time, cfg.n_steps, cfg.solver_options());
    data.objective.c_target = ref.c;
    data.objective.p_target = ref.p;
    return data;
  }
  if (cfg.targets_spec.rfind("files:", 0) == 0) {
    const std::string body = cfg.targets_spec.substr(6);
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      throw ConfigError("config: key 'targets': files needs C_PREFIX,P_PREFIX");
    const ControlTrajectory c = read_control_series(body.substr(0, comma), cfg.grid, cfg.n_steps);
    const ControlTrajectory p = read_control_series(body.substr(comma + 1), cfg.grid, cfg.n_steps);
    data.objective.c_target = c.slices;
    data.objective.p_target = p.slices;
    return data;
  }
  throw ConfigError("config: key 'targets' must not be none for this subcommand");
}

Problem make_problem(const RunConfig& cfg, TargetData targets) {
  Problem prob;
  prob.grid = cfg.grid;
  prob.medium = cfg.medium;
  prob.q = cfg.q;
  prob.total_time = cfg.total_time;
  prob.n_steps = cfg.n_steps;
  prob.objective = std::move(targets.objective);
  prob.eps_reg = cfg.eps_reg;
  prob.solver = cfg.solver_options();
  return prob;
}

std::string snapshot_name(const std::string& stem, int n, const char* ext) {
  char suffix[24];
  std::snprintf(suffix, sizeof(suffix), "_%04d.%s", n, ext);
  return stem + suffix;
}

void write_snapshots(const std::string& out_dir, const Grid& grid, const std::string& stem,
                     const std::vector<ScalarField>& slices, int stride) {
  const int n_last = static_cast<int>(slices.size()) - 1;
  for (int n = 0; n <= n_last; ++n) {
    const bool selected = (stride > 0 && n % stride == 0) || n == n_last;
    if (!selected) continue;
    const std::string base = out_dir + "/" + stem;
    write_field_csv(snapshot_name(base, n, "csv"), grid, slices[static_cast<std::size_t>(n)]);
    write_vtk(snapshot_name(base, n, "vtk"), grid,
              {{stem, &slices[static_cast<std::size_t>(n)]}});
  }
}

int run_verify(int dim, long samples, std::uint64_t seed, const std::string& lemma,
               const std::string& out_dir) {
  std::vector<int> dims = dim == 0 ? std::vector<int>{2, 3} : std::vector<int>{dim};
  std::vector<IdentityReport> all;
  for (int d : dims) {
    IdentitySuiteOptions opts;
    opts.samples = samples;
    opts.seed = seed;
    if (!lemma.empty()) {
      const auto ids = identity_ids(d);
      bool known = false;
      for (const auto& id : ids) known = known || id == lemma;
      if (!known) continue;  // e.g. the 3D-only helper identity under dim 2
      opts.only_identity = lemma;
    }
    const auto reports = run_identity_suite(d, opts);
    all.insert(all.end(), reports.begin(), reports.end());
  }
  if (all.empty()) {
    std::cerr << "verify: no identity matches '" << lemma << "'\n";
    return 2;
  }
  std::filesystem::create_directories(out_dir);
  write_identity_reports_csv(out_dir + "/identity_report.csv", all);
  bool pass = true;
  std::printf("identity_id,dim,samples,max_abs,max_rel,pass\n");
  for (const auto& r : all) {
    std::printf("%s,%d,%ld,%s,%s,%d\n", r.identity_id.c_str(), r.dim, r.samples,
                format_double(r.max_abs).c_str(), format_double(r.max_rel).c_str(),
                r.pass ? 1 : 0);
    pass = pass && r.pass;
  }
  return pass ? 0 : 1;
}

int run_forward_cmd(const RunConfig& cfg) {
  ControlTrajectory h = cfg.hstar_spec == "none" ? ControlTrajectory::zeros(cfg.grid, cfg.n_steps)
                                                 : build_hstar(cfg);
  const StateTrajectory traj =
      run_forward(cfg.grid, cfg.medium, cfg.q, h, cfg.total_time, cfg.n_steps,
                  cfg.solver_options());
  std::filesystem::create_directories(cfg.out_dir);
  write_snapshots(cfg.out_dir, cfg.grid, "c", traj.c, cfg.snapshot_stride);
  write_snapshots(cfg.out_dir, cfg.grid, "p", traj.p, cfg.snapshot_stride);
  double mass = 0.0;
  for (long i = 0; i < cfg.grid.num_cells(); ++i)
    mass += cfg.medium.phi[i] * traj.c.back()[i] * cfg.grid.cell_volume();
  std::printf("forward: %d steps on %ld cells, final phi-weighted mass %s, snapshots in %s\n",
              cfg.n_steps, cfg.grid.num_cells(), format_double(mass).c_str(),
              cfg.out_dir.c_str());
  return 0;
}

int run_adjoint_cmd(const RunConfig& cfg) {
  const TargetData targets = build_targets(cfg);
  const ControlTrajectory h0 = ControlTrajectory::zeros(cfg.grid, cfg.n_steps);
  const StateTrajectory states = run_forward(cfg.grid, cfg.medium, cfg.q, h0, cfg.total_time,
                                             cfg.n_steps, cfg.solver_options());
  const AdjointTrajectory adj =
      run_adjoint(cfg.grid, cfg.medium, states, targets.objective.c_target,
                  targets.objective.p_target, cfg.alpha, cfg.eps_reg, cfg.solver_options());
  std::filesystem::create_directories(cfg.out_dir);
  write_snapshots(cfg.out_dir, cfg.grid, "c", states.c, cfg.snapshot_stride);
  write_snapshots(cfg.out_dir, cfg.grid, "psi_c", adj.psi_c, cfg.snapshot_stride);
  write_snapshots(cfg.out_dir, cfg.grid, "psi_p", adj.psi_p, cfg.snapshot_stride);
  std::printf("adjoint: wrote %d-step state and adjoint snapshots to %s\n", cfg.n_steps,
              cfg.out_dir.c_str());
  return 0;
}

int run_grad_check(const RunConfig& cfg, int directions) {
  const Problem prob = make_problem(cfg, build_targets(cfg));
  const ControlTrajectory h0 = ControlTrajectory::zeros(cfg.grid, cfg.n_steps);
  const auto rows =
      gradient_check(prob, h0, directions, cfg.seed, cfg.grad_check_eps);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream csv(cfg.out_dir + "/grad_check.csv");
  csv << "direction,adjoint,fd,rel_mismatch\n";
  std::printf("direction  adjoint        fd             rel_mismatch\n");
  bool pass = true;
  for (const auto& r : rows) {
    std::printf("%-9d  %-13.6e  %-13.6e  %-13.6e\n", r.direction, r.adjoint_value, r.fd_value,
                r.rel_mismatch);
    csv << r.direction << "," << format_double(r.adjoint_value) << ","
        << format_double(r.fd_value) << "," << format_double(r.rel_mismatch) << "\n";
    pass = pass && r.rel_mismatch <= cfg.grad_check_tol;
  }
  std::printf("threshold %s: %s\n", format_double(cfg.grad_check_tol).c_str(),
              pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

int run_optimize_cmd(const RunConfig& cfg) {
  const Problem prob = make_problem(cfg, build_targets(cfg));
  const ControlTrajectory h0 = ControlTrajectory::zeros(cfg.grid, cfg.n_steps);
  std::filesystem::create_directories(cfg.out_dir);
  try {
    auto [h, report] = optimize(prob, h0, cfg.optimize_options());
    write_optimization_report_csv(cfg.out_dir + "/optimization_report.csv", report);
    write_control_series(cfg.out_dir + "/control", cfg.grid, h);
    std::printf("optimize: %d iterations, J %s -> %s, grad norm %s, optimality %s (%s)\n",
                report.total_iterations,
                format_double(report.iterations.front().objective).c_str(),
                format_double(report.final_objective).c_str(),
                format_double(report.final_grad_norm).c_str(),
                format_double(report.final_optimality).c_str(), report.stop_reason.c_str());
    return 0;
  } catch (const OptimizeStagnation& e) {
    write_optimization_report_csv(cfg.out_dir + "/optimization_report.csv", e.report);
    std::cerr << "optimize: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"incompressible miscible displacement with velocity-dependent dispersion: "
               "identity verification, forward/adjoint solves, and optimal control"};
  app.name("mdopt");
  app.require_subcommand(1);

  std::string out_override;
  app.add_option("--out", out_override, "output directory (overrides the config's out_dir)");
  app.fallthrough();  // lets the global --out appear after the subcommand

  auto* verify = app.add_subcommand("verify", "randomized tensor/boundary identity suite");
  int dim = 0;
  long samples = 100000;
  std::uint64_t seed = 1;
  std::string lemma;
  verify->add_option("--dim", dim, "2 or 3 (default: both)")->check(CLI::IsMember({2, 3}));
  verify->add_option("--samples", samples, "samples per identity")->default_val(100000);
  verify->add_option("--seed", seed, "base rng seed")->default_val(1);
  verify->add_option("--lemma", lemma, "run a single identity by id");

  std::string config_path;
  auto* forward = app.add_subcommand("forward", "run the coupled pressure/transport model");
  forward->add_option("--config", config_path, "configuration file")->required();
  auto* adjoint = app.add_subcommand("adjoint", "run forward then the adjoint system");
  adjoint->add_option("--config", config_path, "configuration file")->required();
  auto* gradcheck = app.add_subcommand("grad-check", "adjoint-vs-FD directional derivatives");
  gradcheck->add_option("--config", config_path, "configuration file")->required();
  int directions = 0;
  gradcheck->add_option("--directions", directions, "number of probe directions");
  auto* optimize_cmd = app.add_subcommand("optimize", "projected gradient descent on the control");
  optimize_cmd->add_option("--config", config_path, "configuration file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints usage to stderr
    return 2;
  }

  try {
    if (verify->parsed()) {
      const std::string out_dir = out_override.empty() ? "out" : out_override;
      return run_verify(dim, samples, seed, lemma, out_dir);
    }
    RunConfig cfg = parse_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (forward->parsed()) return run_forward_cmd(cfg);
    if (adjoint->parsed()) return run_adjoint_cmd(cfg);
    if (gradcheck->parsed())
      return run_grad_check(cfg, directions > 0 ? directions : cfg.grad_check_directions);
    if (optimize_cmd->parsed()) return run_optimize_cmd(cfg);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mdopt
