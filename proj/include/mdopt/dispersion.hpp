#pragma once

#include "mdopt/tensor.hpp"

namespace mdopt {

/// Pointwise medium coefficients entering the dispersion tensor.
/// phi is the porosity at the evaluation point; d_m molecular diffusion,
/// d_t / d_l transverse / longitudinal dispersivities. All must be > 0.
struct DispersionParams {
  double phi = 1.0;
  double d_m = 1.0;
  double d_t = 0.1;
  double d_l = 1.0;

  /// Throws std::invalid_argument when a coefficient is out of range.
  void validate() const;
};

/// Velocity-dependent dispersion tensor
///   D(v) = phi*d_m*I + d_t*|v|*I + (d_l - d_t) v v^T / |v|,
/// with the exact limit D = phi*d_m*I at v = 0.
Mat eval_dispersion_tensor(const DispersionParams& params, const Vec& v);

/// Closed-form velocity Jacobian T(i,j,k) = dD(i,j)/dv_k. All |v| powers are
/// regularized as sqrt(|v|^2 + eps_reg^2); eps_reg = 0 with |v| = 0 throws.
Tensor3 eval_velocity_jacobian(const DispersionParams& params, const Vec& v, double eps_reg);

/// (E (x) a) b with E the row-blocked Jacobian view:
///   out[r] = sum_{s,k} T(r,s,k) a[k] b[s].
Vec kron_apply_E(const Tensor3& jac, const Vec& a, const Vec& b);

/// (Ehat (x) a) b with Ehat the view whose row index is the differentiation
/// index:  out[r] = sum_{s,k} T(s,k,r) a[k] b[s].
Vec kron_apply_Ehat(const Tensor3& jac, const Vec& a, const Vec& b);

}  // namespace mdopt
