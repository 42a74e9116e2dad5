#include "mdopt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdopt/errors.hpp"

namespace mdopt {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  return out;
}

std::string grid_header(const Grid& grid) {
  std::ostringstream os;
  os << "# " << grid.dim << " " << grid.n[0] << " " << grid.n[1];
  if (grid.dim == 3) os << " " << grid.n[2];
  os << " " << format_double(grid.length[0]) << " " << format_double(grid.length[1]);
  if (grid.dim == 3) os << " " << format_double(grid.length[2]);
  return os.str();
}

}  // namespace

void write_field_csv(const std::string& path, const Grid& grid, const ScalarField& field) {
  if (field.size() != static_cast<std::size_t>(grid.num_cells()))
    throw FormatError("write_field_csv: field size does not match grid");
  std::ofstream out = open_out(path);
  out << grid_header(grid) << "\n";
  for (int k = 0; k < grid.n[2]; ++k)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int i = 0; i < grid.n[0]; ++i) {
        const Vec x = grid.cell_center(i, j, k);
        out << format_double(x[0]) << "," << format_double(x[1]);
        if (grid.dim == 3) out << "," << format_double(x[2]);
        out << "," << format_double(field[grid.idx(i, j, k)]) << "\n";
      }
}

ScalarField read_field_csv(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open field file: " + path);
  std::string header;
  std::getline(in, header);
  if (header != grid_header(grid))
    throw FormatError("field file header does not match the grid: " + path + " (got '" + header +
                      "', expected '" + grid_header(grid) + "')");
  ScalarField field(grid.num_cells());
  std::string line;
  long row = 0;
  const int coords = grid.dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= grid.num_cells()) throw FormatError("too many rows in field file: " + path);
    std::istringstream ls(line);
    std::string tok;
    double value = 0.0;
    for (int c = 0; c <= coords; ++c) {
      if (!std::getline(ls, tok, ',')) throw FormatError("short row in field file: " + path);
      if (c == coords) value = std::strtod(tok.c_str(), nullptr);
    }
    field[row++] = value;
  }
  if (row != grid.num_cells()) throw FormatError("missing rows in field file: " + path);
  return field;
}

void write_vtk(const std::string& path, const Grid& grid,
               const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "mdopt field snapshot\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << grid.n[0] << " " << grid.n[1] << " " << grid.n[2] << "\n";
  out << "ORIGIN " << format_double(0.5 * grid.h[0]) << " " << format_double(0.5 * grid.h[1])
      << " " << format_double(grid.dim == 3 ? 0.5 * grid.h[2] : 0.0) << "\n";
  out << "SPACING " << format_double(grid.h[0]) << " " << format_double(grid.h[1]) << " "
      << format_double(grid.dim == 3 ? grid.h[2] : 1.0) << "\n";
  out << "POINT_DATA " << grid.num_cells() << "\n";
  for (const auto& [name, field] : fields) {
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int k = 0; k < grid.n[2]; ++k)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int i = 0; i < grid.n[0]; ++i)
          out << format_double((*field)[grid.idx(i, j, k)]) << "\n";
  }
}

void write_identity_reports_csv(const std::string& path,
                                const std::vector<IdentityReport>& reports) {
  std::ofstream out = open_out(path);
  out << "identity_id,dim,samples,max_abs,max_rel,pass\n";
  for (const auto& r : reports)
    out << r.identity_id << "," << r.dim << "," << r.samples << "," << format_double(r.max_abs)
        << "," << format_double(r.max_rel) << "," << (r.pass ? 1 : 0) << "\n";
}

void write_optimization_report_csv(const std::string& path, const OptimizationReport& report) {
  std::ofstream out = open_out(path);
  out << "iter,J,grad_norm,step,ls_trials\n";
  for (const auto& it : report.iterations)
    out << it.iteration << "," << format_double(it.objective) << ","
        << format_double(it.grad_norm) << "," << format_double(it.step) << "," << it.ls_trials
        << "\n";
  out << "# final_objective=" << format_double(report.final_objective)
      << " final_grad_norm=" << format_double(report.final_grad_norm)
      << " final_optimality=" << format_double(report.final_optimality)
      << " iterations=" << report.total_iterations
      << " wall_seconds=" << format_double(report.wall_seconds)
      << " converged=" << (report.converged ? 1 : 0) << " stop_reason=" << report.stop_reason
      << "\n";
}

namespace {

std::string slice_path(const std::string& prefix, int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%04d.csv", n);
  return prefix + buf;
}

}  // namespace

void write_control_series(const std::string& prefix, const Grid& grid,
                          const ControlTrajectory& h) {
  for (int n = 0; n < static_cast<int>(h.slices.size()); ++n)
    write_field_csv(slice_path(prefix, n), grid, h.slices[static_cast<std::size_t>(n)]);
}

ControlTrajectory read_control_series(const std::string& prefix, const Grid& grid, int n_steps) {
  ControlTrajectory h;
  for (int n = 0; n <= n_steps; ++n)
    h.slices.push_back(read_field_csv(slice_path(prefix, n), grid));
  return h;
}

}  // namespace mdopt
