#include "mdopt/dispersion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdopt {

void DispersionParams::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string("DispersionParams: ") + name + " must be positive and finite");
  };
  auto nonnegative = [](double x, const char* name) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string("DispersionParams: ") + name + " must be nonnegative and finite");
  };
  positive(phi, "phi");
  positive(d_m, "d_m");
  nonnegative(d_t, "d_t");
  nonnegative(d_l, "d_l");
}

Mat eval_dispersion_tensor(const DispersionParams& params, const Vec& v) {
  params.validate();
  if (!v.finite()) throw std::invalid_argument("eval_dispersion_tensor: non-finite velocity");

  const int d = v.dim;
  const double speed = v.norm();
  Mat out = Mat::zero(d);
  const double iso = params.phi * params.d_m + params.d_t * speed;
  for (int i = 0; i < d; ++i) out(i, i) = iso;
  if (speed > 0.0) {
    const double scale = (params.d_l - params.d_t) / speed;
    // fill the upper triangle and mirror so symmetry is bit-exact
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const double term = scale * v[i] * v[j];
        out(i, j) += term;
        if (j != i) out(j, i) = out(i, j);
      }
  }
  return out;
}

Tensor3 eval_velocity_jacobian(const DispersionParams& params, const Vec& v, double eps_reg) {
  params.validate();
  if (!v.finite() || !std::isfinite(eps_reg) || eps_reg < 0.0)
    throw std::invalid_argument("eval_velocity_jacobian: non-finite input");
  const double speed2 = v.dot(v);
  if (speed2 == 0.0 && eps_reg == 0.0)
    throw std::invalid_argument("eval_velocity_jacobian: singular velocity (|v| = 0 with eps_reg = 0)");

  const int d = v.dim;
  const double se = std::sqrt(speed2 + eps_reg * eps_reg);
  const double inv_se = 1.0 / se;
  const double inv_se3 = inv_se * inv_se * inv_se;
  const double dl_minus_dt = params.d_l - params.d_t;

  Tensor3 out = Tensor3::zero(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        double val = 0.0;
        if (i == j) val += params.d_t * v[k] * inv_se;
        double rank1 = 0.0;
        if (i == k) rank1 += v[j];
        if (j == k) rank1 += v[i];
        val += dl_minus_dt * (rank1 * inv_se - v[i] * v[j] * v[k] * inv_se3);
        out(i, j, k) = val;
      }
    }
  }
#ifdef MDOPT_MUTATE_E
  // test hook: flip one off-diagonal entry family so the proved boundary
  // cancellations no longer hold
  for (int k = 0; k < d; ++k) out(0, 1, k) = -out(0, 1, k);
#endif
  return out;
}

static void require_dim(const Tensor3& jac, const Vec& a, const Vec& b) {
  if (a.dim != jac.dim || b.dim != jac.dim)
    throw std::invalid_argument("kron_apply: vector dimension does not match Jacobian dimension");
}

Vec kron_apply_E(const Tensor3& jac, const Vec& a, const Vec& b) {
  require_dim(jac, a, b);
  const int d = jac.dim;
  Vec out = Vec::zero(d);
  for (int r = 0; r < d; ++r) {
    double acc = 0.0;
    for (int s = 0; s < d; ++s)
      for (int k = 0; k < d; ++k) acc += jac(r, s, k) * a[k] * b[s];
    out[r] = acc;
  }
  return out;
}

Vec kron_apply_Ehat(const Tensor3& jac, const Vec& a, const Vec& b) {
  require_dim(jac, a, b);
  const int d = jac.dim;
  Vec out = Vec::zero(d);
  for (int r = 0; r < d; ++r) {
    double acc = 0.0;
    for (int s = 0; s < d; ++s)
      for (int k = 0; k < d; ++k) acc += jac(s, k, r) * a[k] * b[s];
    out[r] = acc;
  }
  return out;
}

}  // namespace mdopt
