#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "mesh.hpp"
#include "postprocess.hpp"

namespace idqd {

//! Round-trip formatting: 17 significant digits.
inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/*!
 * One row per sample: x_nm,y_nm,z_nm,phi_V[,Ex,Ey,Ez]. The optional comment
 * becomes a leading "# ..." line.
 */
inline void write_probe_csv(std::ostream& os, ProbeResult const& r, std::string const& comment = {})
{
    if (!comment.empty()) os << "# " << comment << "\n";
    bool const with_field = !r.field.empty();
    os << "x_nm,y_nm,z_nm,phi_V" << (with_field ? ",Ex,Ey,Ez" : "") << "\n";
    for (std::size_t i = 0; i < r.positions.size(); ++i)
    {
        auto const& p = r.positions[i];
        os << format_real(p[0]) << ',' << format_real(p[1]) << ',' << format_real(p[2]) << ','
           << format_real(r.potential[i]);
        if (with_field)
        {
            for (int a = 0; a < 3; ++a) os << ',' << format_real(r.field[i][a]);
        }
        os << "\n";
    }
}

namespace detail {

inline void vtk_header(std::ostream& os, std::string const& title)
{
    os << "# vtk DataFile Version 3.0\n";
    os << (title.empty() ? std::string("idqd") : title.substr(0, 255)) << "\n";
    os << "ASCII\n";
}

inline void vtk_unstructured_geometry(std::ostream& os, Mesh const& mesh)
{
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.node_count() << " double\n";
    for (Index n = 0; n < mesh.node_count(); ++n)
    {
        auto p = mesh.node_position(n);
        os << format_real(p[0]) << ' ' << format_real(p[1]) << ' ' << format_real(p[2]) << "\n";
    }
    std::size_t const ne = mesh.element_count();
    os << "CELLS " << ne << ' ' << ne * 9 << "\n";
    for (Index e = 0; e < ne; ++e)
    {
        os << 8;
        for (Index n : mesh.element_nodes(e)) os << ' ' << n;
        os << "\n";
    }
    os << "CELL_TYPES " << ne << "\n";
    for (Index e = 0; e < ne; ++e) os << "12\n";  // VTK_HEXAHEDRON
}

inline void vtk_cell_materials(std::ostream& os, Mesh const& mesh)
{
    os << "CELL_DATA " << mesh.element_count() << "\n";
    os << "SCALARS relative_permittivity double 1\nLOOKUP_TABLE default\n";
    for (Index e = 0; e < mesh.element_count(); ++e) os << format_real(mesh.element_permittivity(e)) << "\n";
    os << "SCALARS active int 1\nLOOKUP_TABLE default\n";
    for (Index e = 0; e < mesh.element_count(); ++e) os << (mesh.element_active(e) ? 1 : 0) << "\n";
}

inline void vtk_node_boundary(std::ostream& os, Mesh const& mesh)
{
    os << "SCALARS node_kind int 1\nLOOKUP_TABLE default\n";
    for (Index n = 0; n < mesh.node_count(); ++n) os << static_cast<int>(mesh.node_kind(n)) << "\n";
    os << "SCALARS dirichlet_voltage double 1\nLOOKUP_TABLE default\n";
    auto const& v = mesh.source_voltages();
    for (Index n = 0; n < mesh.node_count(); ++n)
    {
        auto const s = mesh.node_source(n);
        os << format_real(s >= 0 ? v[s] : 0.0) << "\n";
    }
}

}  // namespace detail

//! Mesh as a legacy VTK unstructured grid (node kind 0 free, 1 Dirichlet, 2 conductor).
inline void write_mesh_vtk(std::ostream& os, Mesh const& mesh, std::string const& title = {})
{
    detail::vtk_header(os, title);
    detail::vtk_unstructured_geometry(os, mesh);
    detail::vtk_cell_materials(os, mesh);
    os << "POINT_DATA " << mesh.node_count() << "\n";
    detail::vtk_node_boundary(os, mesh);
}

//! Full solution: potential, recovered nodal field and element-centre field.
inline void write_field_vtk(std::ostream& os, SolutionField const& field, std::string const& title = {})
{
    auto const& mesh = *field.mesh;
    detail::vtk_header(os, title);
    detail::vtk_unstructured_geometry(os, mesh);
    detail::vtk_cell_materials(os, mesh);
    os << "VECTORS E_element double\n";
    for (auto const& E : element_fields(field))
    {
        os << format_real(E[0]) << ' ' << format_real(E[1]) << ' ' << format_real(E[2]) << "\n";
    }
    os << "POINT_DATA " << mesh.node_count() << "\n";
    os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
    for (double v : field.values) os << format_real(v) << "\n";
    detail::vtk_node_boundary(os, mesh);
    os << "VECTORS E double\n";
    for (auto const& E : nodal_field(field))
    {
        os << format_real(E[0]) << ' ' << format_real(E[1]) << ' ' << format_real(E[2]) << "\n";
    }
}

//! Plane slice as legacy VTK structured points (image data).
inline void write_slice_vtk(std::ostream& os, ProbeResult const& r, std::string const& title = {})
{
    if (r.kind != ProbeResult::Kind::plane) throw std::invalid_argument("write_slice_vtk needs a plane slice");
    detail::vtk_header(os, title);
    os << "DATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << r.grid_dims[0] << ' ' << r.grid_dims[1] << ' ' << r.grid_dims[2] << "\n";
    os << "ORIGIN " << format_real(r.origin[0]) << ' ' << format_real(r.origin[1]) << ' '
       << format_real(r.origin[2]) << "\n";
    os << "SPACING " << format_real(r.spacing[0]) << ' ' << format_real(r.spacing[1]) << ' '
       << format_real(r.spacing[2]) << "\n";
    os << "POINT_DATA " << r.positions.size() << "\n";
    os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
    for (double v : r.potential) os << format_real(v) << "\n";
    if (!r.field.empty())
    {
        os << "VECTORS E double\n";
        for (auto const& E : r.field)
        {
            os << format_real(E[0]) << ' ' << format_real(E[1]) << ' ' << format_real(E[2]) << "\n";
        }
    }
}

}  // namespace idqd
