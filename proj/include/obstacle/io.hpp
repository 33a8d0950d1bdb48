#pragma once

#include <array>
#include <string>
#include <vector>

#include "obstacle/error_metrics.hpp"
#include "obstacle/fields.hpp"
#include "obstacle/mesh.hpp"

namespace obstacle {

/// Shortest round-trip decimal formatting ("%.17g"), used by every writer
/// so identical runs produce bitwise-identical files.
std::string format_double(double x);

void write_mesh_csv(const RectMesh& mesh, const std::string& nodes_path,
                    const std::string& elements_path);

/// Legacy-ASCII VTK unstructured grid of the active elements; point data
/// fields are nodal, cell data fields per active element.
struct VtkField {
    std::string name;
    std::vector<double> values;
};

void write_vtk(const RectMesh& mesh, const std::string& path,
               const std::vector<VtkField>& point_data,
               const std::vector<VtkField>& cell_data);

extern const char* const kReportHeader;

std::string report_csv_row(const MajorantReport& r);

std::vector<MajorantReport> read_report_csv(const std::string& path);

/// Aligned convergence table with err^2(h)/err^2(h/2) ratios per benchmark.
std::string convergence_table(const std::vector<MajorantReport>& rows);

} // namespace obstacle
