#include "mdopt/linsolve.hpp"

#include <cmath>

#include "mdopt/errors.hpp"

namespace mdopt {

namespace {

double dot(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LinearSolveReport pcg_solve(const ApplyFn& apply, const ScalarField& b_in, ScalarField& x,
                            const ScalarField& inv_diag, double rel_tol, long max_iter,
                            bool project_zero_mean) {
  const std::size_t n = b_in.size();
  ScalarField b = b_in;
  if (project_zero_mean) {
    subtract_mean(b);
    subtract_mean(x);
  }
  const double bnorm = field_l2(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    return {0, 0.0};
  }

  ScalarField r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  if (project_zero_mean) subtract_mean(r);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (long it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (pap == 0.0) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (project_zero_mean) {
      subtract_mean(x);
      subtract_mean(r);
    }
    const double rnorm = field_l2(r);
    if (rnorm <= rel_tol * bnorm) return {it, rnorm / bnorm};
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  // residual may have stagnated at rounding level; accept if close
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  if (project_zero_mean) subtract_mean(r);
  const double rnorm = field_l2(r);
  if (rnorm <= 10.0 * rel_tol * bnorm) return {max_iter, rnorm / bnorm};
  throw IterationLimitError("pcg_solve: no convergence within iteration cap (rel residual " +
                            std::to_string(rnorm / bnorm) + ")");
}

LinearSolveReport bicgstab_solve(const ApplyFn& apply, const ScalarField& b, ScalarField& x,
                                 const ScalarField& inv_diag, double rel_tol, long max_iter) {
  const std::size_t n = b.size();
  const double bnorm = field_l2(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    return {0, 0.0};
  }

  ScalarField r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  apply(x, v);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::fill(v.begin(), v.end(), 0.0);

  for (long it = 1; it <= max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) break;
    if (it == 1) {
      p = r;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) phat[i] = inv_diag[i] * p[i];
    apply(phat, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (field_l2(s) <= rel_tol * bnorm) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      return {it, field_l2(s) / bnorm};
    }
    for (std::size_t i = 0; i < n; ++i) shat[i] = inv_diag[i] * s[i];
    apply(shat, t);
    const double tt = dot(t, t);
    if (tt == 0.0) break;
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    const double rnorm = field_l2(r);
    if (rnorm <= rel_tol * bnorm) return {it, rnorm / bnorm};
    if (omega == 0.0) break;
  }
  apply(x, t);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
  const double rnorm = field_l2(r);
  if (rnorm <= 10.0 * rel_tol * bnorm) return {max_iter, rnorm / bnorm};
  throw IterationLimitError("bicgstab_solve: no convergence within iteration cap (rel residual " +
                            std::to_string(rnorm / bnorm) + ")");
}

}  // namespace mdopt
