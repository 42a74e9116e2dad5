#pragma once

#include <string>
#include <vector>

#include "mdopt/boundary.hpp"
#include "mdopt/forward.hpp"
#include "mdopt/optimize.hpp"

namespace mdopt {

/// Cell-centered field as CSV: header `# dim nx ny [nz] Lx Ly [Lz]`, then one
/// row per cell in x-fastest order holding the cell-center coordinates and
/// the value, all printed with 17 significant digits (lossless for doubles).
void write_field_csv(const std::string& path, const Grid& grid, const ScalarField& field);

/// Reads a field written by write_field_csv; throws FormatError when the
/// header does not match the expected grid.
ScalarField read_field_csv(const std::string& path, const Grid& grid);

/// Legacy ASCII structured-points snapshot holding one scalar array per
/// named field, points at the cell centers.
void write_vtk(const std::string& path, const Grid& grid,
               const std::vector<std::pair<std::string, const ScalarField*>>& fields);

/// One CSV row per identity: identity_id,dim,samples,max_abs,max_rel,pass.
void write_identity_reports_csv(const std::string& path,
                                const std::vector<IdentityReport>& reports);

/// Per-iteration rows: iter,J,grad_norm,step,ls_trials.
void write_optimization_report_csv(const std::string& path, const OptimizationReport& report);

/// Control slices as prefix_NNNN.csv, one file per time slice.
void write_control_series(const std::string& prefix, const Grid& grid,
                          const ControlTrajectory& h);
ControlTrajectory read_control_series(const std::string& prefix, const Grid& grid, int n_steps);

std::string format_double(double x);  // %.17g

}  // namespace mdopt
