#pragma once

#include <array>
#include <vector>

#include "mdopt/tensor.hpp"

namespace mdopt {

/// Cell-centered structured grid on an axis-aligned box, 2D or 3D.
/// Cells are indexed x-fastest; in 2D the z extent is a single slab.
struct Grid {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> length{1.0, 1.0, 1.0};
  std::array<double, 3> h{1.0, 1.0, 1.0};

  static Grid box_2d(int nx, int ny, double lx, double ly);
  static Grid box_3d(int nx, int ny, int nz, double lx, double ly, double lz);

  long num_cells() const {
    return static_cast<long>(n[0]) * n[1] * n[2];
  }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h[a];
    return v;
  }
  long idx(int i, int j, int k = 0) const {
    return i + static_cast<long>(n[0]) * (j + static_cast<long>(n[1]) * k);
  }

  /// Faces normal to `axis`; the axis index runs 0..n[axis] inclusive.
  long num_faces(int axis) const {
    long c = n[axis] + 1;
    for (int a = 0; a < 3; ++a)
      if (a != axis) c *= n[a];
    return c;
  }
  long fidx(int axis, int i, int j, int k = 0) const {
    const long nx = (axis == 0) ? n[0] + 1 : n[0];
    const long ny = (axis == 1) ? n[1] + 1 : n[1];
    return i + nx * (j + ny * k);
  }
  double face_area(int axis) const {
    double a = 1.0;
    for (int b = 0; b < dim; ++b)
      if (b != axis) a *= h[b];
    return a;
  }
  Vec cell_center(int i, int j, int k = 0) const {
    Vec x = Vec::zero(dim);
    const std::array<int, 3> ijk{i, j, k};
    for (int a = 0; a < dim; ++a) x[a] = (ijk[a] + 0.5) * h[a];
    return x;
  }
};

using ScalarField = std::vector<double>;

/// One value per cell and component.
struct VectorField {
  int dim = 2;
  std::array<ScalarField, 3> comp;
};

/// Face-normal values per axis; axis[a] is sized grid.num_faces(a).
struct FaceField {
  std::array<ScalarField, 3> axis;
};

FaceField make_face_field(const Grid& grid);
VectorField make_vector_field(const Grid& grid);

/// Porosity and permeability per cell plus the dispersivity constants.
struct MediumFields {
  ScalarField phi;
  ScalarField perm;
  double d_m = 1e-2;
  double d_t = 0.0;
  double d_l = 0.0;

  static MediumFields uniform(const Grid& grid, double phi_value, double perm_value, double dm,
                              double dt, double dl);
  /// Throws std::invalid_argument on size mismatch or out-of-range entries.
  void validate(const Grid& grid) const;
};

double field_sum(const ScalarField& f);
double field_l1(const ScalarField& f);
double field_l2(const ScalarField& f);
double field_max_abs(const ScalarField& f);

/// Subtracts the (uniform-cell) mean in place and returns the removed mean.
double subtract_mean(ScalarField& f);

}  // namespace mdopt
