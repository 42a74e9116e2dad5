#include "mdopt/boundary.hpp"

#include <cmath>
#include <stdexcept>

#include "mdopt/rng.hpp"

namespace mdopt {

BoundaryFrame BoundaryFrame::from_angle(double theta) {
  BoundaryFrame f;
  f.dim = 2;
  f.theta = theta;
  f.normal = Vec(std::cos(theta), std::sin(theta));
  f.tangents[0] = Vec(-std::sin(theta), std::cos(theta));
  f.tangents[1] = Vec::zero(2);
  return f;
}

BoundaryFrame BoundaryFrame::from_angles(double theta, double phi) {
  BoundaryFrame f;
  f.dim = 3;
  f.theta = theta;
  f.phi = phi;
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  f.normal = Vec(ct * sp, st * sp, cp);
  f.tangents[0] = Vec(-st, ct, 0.0);
  f.tangents[1] = Vec(ct * cp, st * cp, -sp);
  return f;
}

namespace {

Vec project_tangential(const Vec& x, const Vec& n) {
  Vec out = x;
  // two passes: the second removes the rounding residue of the first, which
  // matters when the draw is much larger than the projected result
  for (int pass = 0; pass < 2; ++pass) {
    const double xn = out.dot(n);
    for (int i = 0; i < x.dim; ++i) out[i] -= xn * n[i];
  }
  return out;
}

Vec draw_vec(Rng& rng, int dim, double mag) {
  Vec x = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.uniform(-mag, mag);
  return x;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

BoundarySample sample_boundary(int dim, std::uint64_t seed, const SampleRanges& ranges) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("sample_boundary: dim must be 2 or 3");
  Rng rng(seed);

  BoundarySample s;
  const double theta = rng.uniform(0.0, 2.0 * kPi);
  if (dim == 2) {
    s.frame = BoundaryFrame::from_angle(theta);
  } else {
    const double phi = rng.uniform(ranges.pole_margin, kPi - ranges.pole_margin);
    s.frame = BoundaryFrame::from_angles(theta, phi);
  }

  s.params.phi = rng.uniform(ranges.phi_min, ranges.phi_max);
  s.params.d_m = rng.uniform(ranges.dm_min, ranges.dm_max);
  s.params.d_t = rng.uniform(ranges.dt_min, ranges.dt_max);
  s.params.d_l = rng.uniform(ranges.dl_min, ranges.dl_max);

  // Tangential unit direction times a log-uniform speed, so the whole
  // [v_min, v_max] window is covered across scales.
  const Vec& n = s.frame.normal;
  const double speed =
      std::pow(10.0, rng.uniform(std::log10(ranges.v_min), std::log10(ranges.v_max)));
  bool accepted = false;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec dir = project_tangential(draw_vec(rng, dim, 1.0), n);
    const double len = dir.norm();
    if (len < 1e-6) continue;  // degenerate draw, resample
    dir *= speed / len;
    if (dir.norm() >= ranges.v_min && dir.norm() <= ranges.v_max * (1.0 + 1e-12)) {
      s.v = dir;
      accepted = true;
      break;
    }
  }
  if (!accepted) throw std::runtime_error("sample_boundary: velocity rejection sampling exhausted");

  s.grad_p = project_tangential(draw_vec(rng, dim, ranges.grad_max), n);
  s.grad_c = project_tangential(draw_vec(rng, dim, ranges.grad_max), n);
  s.grad_psi = project_tangential(draw_vec(rng, dim, ranges.grad_max), n);
  s.grad_g = draw_vec(rng, dim, ranges.grad_max);
  return s;
}

namespace {

/// Kron product together with the sum of term magnitudes per output row.
void kron_E_terms(const Tensor3& jac, const Vec& a, const Vec& b, Vec& out, Vec& mag) {
  const int d = jac.dim;
  out = Vec::zero(d);
  mag = Vec::zero(d);
  for (int r = 0; r < d; ++r) {
    for (int s = 0; s < d; ++s)
      for (int k = 0; k < d; ++k) {
        const double term = jac(r, s, k) * a[k] * b[s];
        out[r] += term;
        mag[r] += std::abs(term);
      }
  }
}

void kron_Ehat_terms(const Tensor3& jac, const Vec& a, const Vec& b, Vec& out, Vec& mag) {
  const int d = jac.dim;
  out = Vec::zero(d);
  mag = Vec::zero(d);
  for (int r = 0; r < d; ++r) {
    for (int s = 0; s < d; ++s)
      for (int k = 0; k < d; ++k) {
        const double term = jac(s, k, r) * a[k] * b[s];
        out[r] += term;
        mag[r] += std::abs(term);
      }
  }
}

// The denominator is 1 plus the magnitudes of the identity's terms, plus a
// small multiple of the internal product magnitudes. The latter keeps the
// measure from reporting pure floating-point cancellation noise as a residual
// when all leading terms vanish together; it is far too small to mask a
// genuinely broken hypothesis.
constexpr double kRoundoffGuard = 0.02;

Residual normal_component_residual(const Vec& field, const Vec& mag, const Vec& n) {
  double dot = 0.0, scale = 1.0;
  for (int i = 0; i < n.dim; ++i) {
    dot += field[i] * n[i];
    scale += std::abs(field[i] * n[i]) + kRoundoffGuard * mag[i] * std::abs(n[i]);
  }
  return Residual{std::abs(dot), std::abs(dot) / scale};
}

}  // namespace

Residual check_flux_equivalence(const BoundarySample& s) {
  const Mat D = eval_dispersion_tensor(s.params, s.v);
  const Vec& n = s.frame.normal;
  double lhs = 0.0, internal = 0.0;
  for (int i = 0; i < n.dim; ++i)
    for (int j = 0; j < n.dim; ++j) {
      const double term = D(i, j) * s.grad_g[j] * n[i];
      lhs += term;
      internal += std::abs(term);
    }
  const double coeff = s.params.phi * s.params.d_m + s.params.d_t * s.v.norm();
  double rhs = 0.0;
  for (int i = 0; i < n.dim; ++i) {
    const double term = coeff * s.grad_g[i] * n[i];
    rhs += term;
    internal += std::abs(term);
  }
  const double abs = std::abs(lhs - rhs);
  const double scale = 1.0 + std::abs(lhs) + std::abs(rhs) + kRoundoffGuard * internal;
  return Residual{abs, abs / scale};
}

Residual check_E_boundary(const BoundarySample& s) {
  const Tensor3 jac = eval_velocity_jacobian(s.params, s.v, s.eps_reg);
  Vec field, mag;
  kron_E_terms(jac, s.grad_p, s.grad_c, field, mag);
  return normal_component_residual(field, mag, s.frame.normal);
}

Residual check_Ehat_boundary(const BoundarySample& s) {
  const Tensor3 jac = eval_velocity_jacobian(s.params, s.v, s.eps_reg);
  Vec field, mag;
  kron_Ehat_terms(jac, s.grad_c, s.grad_psi, field, mag);
  return normal_component_residual(field, mag, s.frame.normal);
}

std::array<Residual, 3> check_helper_relations_3d(const BoundarySample& s) {
  if (s.frame.dim != 3)
    throw std::invalid_argument("check_helper_relations_3d: sample must be three-dimensional");
  const double v1 = s.v[0], v2 = s.v[1], v3 = s.v[2];
  const double px = s.grad_psi[0], py = s.grad_psi[1], pz = s.grad_psi[2];
  const double ct = std::cos(s.frame.theta), st = std::sin(s.frame.theta);
  const double sp = std::sin(s.frame.phi), cp = std::cos(s.frame.phi);

  auto residual = [](std::array<double, 3> lhs_terms, std::array<double, 2> rhs_factors,
                     std::array<double, 2> rhs_terms) {
    const double lhs = lhs_terms[0] + lhs_terms[1] + lhs_terms[2];
    const double rhs = (rhs_factors[0] + rhs_factors[1]) * (rhs_terms[0] + rhs_terms[1]);
    double internal = 0.0;
    for (double t : lhs_terms) internal += std::abs(t);
    internal += (std::abs(rhs_factors[0]) + std::abs(rhs_factors[1])) *
                (std::abs(rhs_terms[0]) + std::abs(rhs_terms[1]));
    const double abs = std::abs(lhs - rhs);
    const double scale = 1.0 + std::abs(lhs) + std::abs(rhs) + kRoundoffGuard * internal;
    return Residual{abs, abs / scale};
  };

  std::array<Residual, 3> out;
  out[0] = residual({ct * sp * (v2 * v2 + v3 * v3) * px, ct * sp * (-v1 * v2) * py,
                     ct * sp * (-v1 * v3) * pz},
                    {v2 * cp, -v3 * st * sp}, {v3 * py, -v2 * pz});
  out[1] = residual({st * sp * (-v1 * v2) * px, st * sp * (v1 * v1 + v3 * v3) * py,
                     st * sp * (-v2 * v3) * pz},
                    {v1 * cp, -v3 * ct * sp}, {v3 * px, -v1 * pz});
  out[2] = residual({cp * (-v1 * v3) * px, cp * (-v2 * v3) * py, cp * (v1 * v1 + v2 * v2) * pz},
                    {v1 * st * sp, -v2 * ct * sp}, {v2 * px, -v1 * py});
  return out;
}

Residual check_duality_interior(const DispersionParams& params, const Vec& v, const Vec& grad_p,
                                const Vec& grad_c, const Vec& grad_psi, double permeability,
                                double eps_reg) {
  const Tensor3 jac = eval_velocity_jacobian(params, v, eps_reg);
  Vec e_field, e_mag, ehat_field, ehat_mag;
  kron_E_terms(jac, grad_p, grad_c, e_field, e_mag);
  kron_Ehat_terms(jac, grad_c, grad_psi, ehat_field, ehat_mag);
  double lhs = 0.0, rhs = 0.0, internal = 0.0;
  for (int i = 0; i < v.dim; ++i) {
    lhs += permeability * e_field[i] * grad_psi[i];
    rhs += grad_p[i] * permeability * ehat_field[i];
    internal += std::abs(permeability) * e_mag[i] * std::abs(grad_psi[i]);
    internal += std::abs(grad_p[i]) * std::abs(permeability) * ehat_mag[i];
  }
  const double abs = std::abs(lhs - rhs);
  const double scale = 1.0 + std::abs(lhs) + std::abs(rhs) + kRoundoffGuard * internal;
  return Residual{abs, abs / scale};
}

void apply_perturbation(BoundarySample& s, Perturb which) {
  const Vec& n = s.frame.normal;
  Vec* target = nullptr;
  switch (which) {
    case Perturb::none: return;
    case Perturb::v_normal: target = &s.v; break;
    case Perturb::grad_p_normal: target = &s.grad_p; break;
    case Perturb::grad_c_normal: target = &s.grad_c; break;
    case Perturb::grad_psi_normal: target = &s.grad_psi; break;
  }
  for (int i = 0; i < n.dim; ++i) (*target)[i] += n[i];
}

std::vector<std::string> identity_ids(int dim) {
  std::vector<std::string> ids = {"flux_equivalence", "kron_E_boundary", "duality_interior"};
  if (dim == 3) ids.push_back("helper_relations_3d");
  ids.push_back("kron_Ehat_boundary");
  return ids;
}

std::vector<Perturb> breaking_perturbations(const std::string& identity_id) {
  if (identity_id == "flux_equivalence") return {Perturb::v_normal};
  if (identity_id == "kron_E_boundary")
    return {Perturb::v_normal, Perturb::grad_p_normal, Perturb::grad_c_normal};
  if (identity_id == "kron_Ehat_boundary")
    return {Perturb::v_normal, Perturb::grad_c_normal, Perturb::grad_psi_normal};
  if (identity_id == "helper_relations_3d") return {Perturb::v_normal, Perturb::grad_psi_normal};
  if (identity_id == "duality_interior") return {};
  throw std::invalid_argument("unknown identity id: " + identity_id);
}

namespace {

constexpr std::uint64_t kDualityStream = 0xA5A5A5A5A5A5A5A5ULL;

/// Residual of one identity on the sample with the given index/seed.
/// duality_interior draws its own unconstrained inputs from a side stream.
Residual evaluate_identity(const std::string& id, int dim, std::uint64_t sample_seed,
                           const SampleRanges& ranges, Perturb perturb) {
  if (id == "duality_interior") {
    Rng rng(sample_seed ^ kDualityStream);
    DispersionParams params;
    params.phi = rng.uniform(ranges.phi_min, ranges.phi_max);
    params.d_m = rng.uniform(ranges.dm_min, ranges.dm_max);
    params.d_t = rng.uniform(ranges.dt_min, ranges.dt_max);
    params.d_l = rng.uniform(ranges.dl_min, ranges.dl_max);
    Vec v = Vec::zero(dim);
    const double speed =
        std::pow(10.0, rng.uniform(std::log10(ranges.v_min), std::log10(ranges.v_max)));
    for (int attempt = 0; attempt < 1000; ++attempt) {
      v = draw_vec(rng, dim, 1.0);
      const double len = v.norm();
      if (len < 1e-6) continue;
      v *= speed / len;
      break;
    }
    const Vec gp = draw_vec(rng, dim, ranges.grad_max);
    const Vec gc = draw_vec(rng, dim, ranges.grad_max);
    const Vec gpsi = draw_vec(rng, dim, ranges.grad_max);
    const double K = rng.uniform(0.1, 10.0);
    return check_duality_interior(params, v, gp, gc, gpsi, K);
  }

  BoundarySample s = sample_boundary(dim, sample_seed, ranges);
  apply_perturbation(s, perturb);
  if (id == "flux_equivalence") return check_flux_equivalence(s);
  if (id == "kron_E_boundary") return check_E_boundary(s);
  if (id == "kron_Ehat_boundary") return check_Ehat_boundary(s);
  if (id == "helper_relations_3d") {
    const auto triple = check_helper_relations_3d(s);
    Residual worst = triple[0];
    for (const Residual& r : triple)
      if (r.rel > worst.rel) worst = r;
    return worst;
  }
  throw std::invalid_argument("unknown identity id: " + id);
}

}  // namespace

std::vector<IdentityReport> run_identity_suite(int dim, const IdentitySuiteOptions& opts) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("run_identity_suite: dim must be 2 or 3");
  std::vector<std::string> ids = identity_ids(dim);
  if (!opts.only_identity.empty()) {
    breaking_perturbations(opts.only_identity);  // validates the id
    if (opts.only_identity == "helper_relations_3d" && dim != 3)
      throw std::invalid_argument("helper_relations_3d requires dim 3");
    ids = {opts.only_identity};
  }

  std::vector<IdentityReport> reports;
  for (const std::string& id : ids) {
    IdentityReport rep;
    rep.identity_id = id;
    rep.dim = dim;
    rep.samples = opts.samples;
    for (long i = 0; i < opts.samples; ++i) {
      const std::uint64_t sample_seed = opts.seed ^ static_cast<std::uint64_t>(i);
      const Residual r = evaluate_identity(id, dim, sample_seed, opts.ranges, Perturb::none);
      rep.max_abs = std::max(rep.max_abs, r.abs);
      rep.max_rel = std::max(rep.max_rel, r.rel);
    }
    rep.pass = rep.max_rel <= opts.tolerance;
    reports.push_back(rep);
  }
  return reports;
}

SampleRanges negative_control_ranges() {
  SampleRanges r;
  r.v_max = 1.0;
  r.grad_max = 4.0;
  // Keep d_l - 2 d_t <= d_t / v_max^2: the tilted 2D adjoint-view identity
  // has a residual zero-crossing at |v| = sqrt(d_t / (d_l - 2 d_t)) which
  // must lie outside the sampling window for the breakage to register on
  // essentially every draw.
  r.dt_min = 0.45;
  r.dt_max = 0.55;
  r.dl_min = 0.85;
  r.dl_max = 1.0;
  return r;
}

double negative_control_fraction(int dim, const std::string& identity_id, Perturb which,
                                 long samples, std::uint64_t seed, double threshold,
                                 const SampleRanges& ranges) {
  long broken = 0;
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t sample_seed = seed ^ static_cast<std::uint64_t>(i);
    const Residual r = evaluate_identity(identity_id, dim, sample_seed, ranges, which);
    if (r.rel >= threshold) ++broken;
  }
  return static_cast<double>(broken) / static_cast<double>(samples);
}

}  // namespace mdopt
