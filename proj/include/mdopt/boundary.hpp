#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdopt/dispersion.hpp"

namespace mdopt {

/// Angle-parametrized boundary point: outward unit normal plus an
/// orthonormal tangent basis (1 vector in 2D, 2 in 3D).
struct BoundaryFrame {
  int dim = 2;
  double theta = 0.0;
  double phi = 0.0;  // polar angle, 3D only
  Vec normal;
  std::array<Vec, 2> tangents;

  static BoundaryFrame from_angle(double theta);
  static BoundaryFrame from_angles(double theta, double phi);
};

/// Magnitude windows for randomized sampling.
struct SampleRanges {
  double v_min = 0.1;
  double v_max = 100.0;
  double grad_max = 10.0;
  double phi_min = 0.2, phi_max = 0.9;
  double dm_min = 0.01, dm_max = 1.0;
  double dt_min = 0.1, dt_max = 0.5;
  double dl_min = 0.8, dl_max = 2.0;
  double pole_margin = 1e-3;  // excluded polar cap in 3D
};

/// One randomized realization of the boundary hypotheses: v and the
/// constrained gradients are tangential, grad_g is unconstrained.
struct BoundarySample {
  BoundaryFrame frame;
  DispersionParams params;
  Vec v;
  Vec grad_p;
  Vec grad_c;
  Vec grad_psi;
  Vec grad_g;
  double eps_reg = 1e-12;
};

/// Deterministic for a fixed seed. Rejection-resamples v until
/// v_min <= |v| <= v_max (bounded attempts, then throws).
BoundarySample sample_boundary(int dim, std::uint64_t seed, const SampleRanges& ranges = {});

/// Absolute and scale-normalized residual of one identity evaluation.
/// rel = abs / (1 + sum of magnitudes of the individual terms).
struct Residual {
  double abs = 0.0;
  double rel = 0.0;
};

/// |(D grad_g).n - (phi d_m + d_t |v|)(grad_g.n)|; zero for every grad_g
/// when v is tangential.
Residual check_flux_equivalence(const BoundarySample& s);

/// |[(E (x) grad_p) grad_c].n| under tangential v, grad_p, grad_c.
Residual check_E_boundary(const BoundarySample& s);

/// |[(Ehat (x) grad_c) grad_psi].n| under tangential v, grad_c, grad_psi.
/// grad_p plays no role here.
Residual check_Ehat_boundary(const BoundarySample& s);

/// Residuals of the three tangential-velocity relations used by the 3D
/// boundary analysis; requires dim == 3, tangential v and grad_psi.
std::array<Residual, 3> check_helper_relations_3d(const BoundarySample& s);

/// |[K (E (x) grad_p) grad_c].grad_psi - grad_p.[K (Ehat (x) grad_c) grad_psi]|.
/// Holds everywhere; no boundary constraints on any input.
Residual check_duality_interior(const DispersionParams& params, const Vec& v, const Vec& grad_p,
                                const Vec& grad_c, const Vec& grad_psi, double permeability,
                                double eps_reg = 1e-12);

/// Which constrained input a negative control pushes off the tangent plane.
enum class Perturb { none, v_normal, grad_p_normal, grad_c_normal, grad_psi_normal };

/// Adds 1.0 * n to the selected constrained vector.
void apply_perturbation(BoundarySample& s, Perturb which);

struct IdentityReport {
  std::string identity_id;
  int dim = 2;
  long samples = 0;
  double max_abs = 0.0;
  double max_rel = 0.0;
  bool pass = false;
};

struct IdentitySuiteOptions {
  long samples = 100000;
  std::uint64_t seed = 1;
  double tolerance = 1e-12;
  std::string only_identity;  // empty = all
  SampleRanges ranges;
};

/// Identity ids in report order: flux_equivalence, kron_E_boundary,
/// duality_interior, helper_relations_3d (3D only), kron_Ehat_boundary.
std::vector<std::string> identity_ids(int dim);

/// Runs every identity (or the selected one) over seeded samples and
/// reduces max residuals. Single pass, deterministic.
std::vector<IdentityReport> run_identity_suite(int dim, const IdentitySuiteOptions& opts);

/// Velocity window for hypothesis-breaking demonstrations. A unit normal
/// perturbation on a velocity of magnitude ~100 tilts it by only ~1e-2 (and
/// the 2D product identities respond cubically in v.n/|v|), so the breakage
/// is quantified where the perturbation is commensurate with |v|.
SampleRanges negative_control_ranges();

/// Fraction of samples on which the perturbed identity residual is at least
/// `threshold`. Used to show each boundary hypothesis is load-bearing.
double negative_control_fraction(int dim, const std::string& identity_id, Perturb which,
                                 long samples, std::uint64_t seed, double threshold = 1e-3,
                                 const SampleRanges& ranges = negative_control_ranges());

/// Perturbations that must break each identity.
std::vector<Perturb> breaking_perturbations(const std::string& identity_id);

}  // namespace mdopt
