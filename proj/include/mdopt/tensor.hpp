#pragma once

#include <array>
#include <cmath>

namespace mdopt {

/// Fixed-capacity vector for spatial dimension 2 or 3.
struct Vec {
  int dim = 2;
  std::array<double, 3> c{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double x, double y) : dim(2), c{x, y, 0.0} {}
  Vec(double x, double y, double z) : dim(3), c{x, y, z} {}

  static Vec zero(int d) {
    Vec v;
    v.dim = d;
    return v;
  }

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += c[static_cast<std::size_t>(i)] * o.c[static_cast<std::size_t>(i)];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim; ++i) (*this)[i] += o[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim; ++i) (*this)[i] -= o[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim; ++i) (*this)[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  bool finite() const {
    for (int i = 0; i < dim; ++i)
      if (!std::isfinite((*this)[i])) return false;
    return true;
  }
};

/// Dense d-by-d matrix, d in {2,3}.
struct Mat {
  int dim = 2;
  std::array<double, 9> m{};

  static Mat zero(int d) {
    Mat a;
    a.dim = d;
    return a;
  }
  static Mat identity(int d) {
    Mat a = zero(d);
    for (int i = 0; i < d; ++i) a(i, i) = 1.0;
    return a;
  }

  double& operator()(int i, int j) { return m[static_cast<std::size_t>(i * 3 + j)]; }
  double operator()(int i, int j) const { return m[static_cast<std::size_t>(i * 3 + j)]; }

  Vec apply(const Vec& x) const {
    Vec y = Vec::zero(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }
};

/// Rank-3 array T(i,j,k), the single store behind both Jacobian views.
struct Tensor3 {
  int dim = 2;
  std::array<double, 27> t{};

  static Tensor3 zero(int d) {
    Tensor3 a;
    a.dim = d;
    return a;
  }

  double& operator()(int i, int j, int k) { return t[static_cast<std::size_t>((i * 3 + j) * 3 + k)]; }
  double operator()(int i, int j, int k) const { return t[static_cast<std::size_t>((i * 3 + j) * 3 + k)]; }
};

}  // namespace mdopt
