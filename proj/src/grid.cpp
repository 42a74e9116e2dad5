#include "mdopt/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdopt {

namespace {

void check_extents(int dim, const std::array<int, 3>& n, const std::array<double, 3>& length) {
  for (int a = 0; a < dim; ++a) {
    if (n[a] < 4) throw std::invalid_argument("Grid: need at least 4 cells per axis");
    if (!(length[a] > 0.0) || !std::isfinite(length[a]))
      throw std::invalid_argument("Grid: domain lengths must be positive");
  }
}

}  // namespace

Grid Grid::box_2d(int nx, int ny, double lx, double ly) {
  Grid g;
  g.dim = 2;
  g.n = {nx, ny, 1};
  g.length = {lx, ly, 1.0};
  check_extents(2, g.n, g.length);
  g.h = {lx / nx, ly / ny, 1.0};
  return g;
}

Grid Grid::box_3d(int nx, int ny, int nz, double lx, double ly, double lz) {
  Grid g;
  g.dim = 3;
  g.n = {nx, ny, nz};
  g.length = {lx, ly, lz};
  check_extents(3, g.n, g.length);
  g.h = {lx / nx, ly / ny, lz / nz};
  return g;
}

FaceField make_face_field(const Grid& grid) {
  FaceField f;
  for (int a = 0; a < grid.dim; ++a) f.axis[a].assign(grid.num_faces(a), 0.0);
  return f;
}

VectorField make_vector_field(const Grid& grid) {
  VectorField v;
  v.dim = grid.dim;
  for (int a = 0; a < grid.dim; ++a) v.comp[a].assign(grid.num_cells(), 0.0);
  return v;
}

MediumFields MediumFields::uniform(const Grid& grid, double phi_value, double perm_value,
                                   double dm, double dt, double dl) {
  MediumFields m;
  m.phi.assign(grid.num_cells(), phi_value);
  m.perm.assign(grid.num_cells(), perm_value);
  m.d_m = dm;
  m.d_t = dt;
  m.d_l = dl;
  m.validate(grid);
  return m;
}

void MediumFields::validate(const Grid& grid) const {
  const std::size_t cells = static_cast<std::size_t>(grid.num_cells());
  if (phi.size() != cells || perm.size() != cells)
    throw std::invalid_argument("MediumFields: field size does not match grid");
  for (std::size_t i = 0; i < cells; ++i) {
    if (!(phi[i] > 0.0) || !std::isfinite(phi[i]))
      throw std::invalid_argument("MediumFields: phi must be positive everywhere (cell " +
                                  std::to_string(i) + ")");
    if (!(perm[i] > 0.0) || !std::isfinite(perm[i]))
      throw std::invalid_argument("MediumFields: K must be positive everywhere (cell " +
                                  std::to_string(i) + ")");
  }
  if (!(d_m > 0.0)) throw std::invalid_argument("MediumFields: d_m must be positive");
  if (!(d_t >= 0.0) || !(d_l >= 0.0))
    throw std::invalid_argument("MediumFields: dispersivities must be nonnegative");
}

double field_sum(const ScalarField& f) {
  double s = 0.0;
  for (double x : f) s += x;
  return s;
}

double field_l1(const ScalarField& f) {
  double s = 0.0;
  for (double x : f) s += std::abs(x);
  return s;
}

double field_l2(const ScalarField& f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return std::sqrt(s);
}

double field_max_abs(const ScalarField& f) {
  double s = 0.0;
  for (double x : f) s = std::max(s, std::abs(x));
  return s;
}

double subtract_mean(ScalarField& f) {
  if (f.empty()) return 0.0;
  const double mean = field_sum(f) / static_cast<double>(f.size());
  for (double& x : f) x -= mean;
  return mean;
}

}  // namespace mdopt
