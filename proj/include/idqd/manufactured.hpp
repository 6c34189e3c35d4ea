#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "device_solver.hpp"
#include "mesh.hpp"
#include "solver.hpp"

namespace idqd {

enum class ManufacturedCase
{
    quadratic_harmonic,  //!< phi = x^2 - y^2 on the unit cube, Dirichlet everywhere
    trilinear_exact,     //!< phi = xyz on the unit cube, Dirichlet everywhere
    layered_capacitor,   //!< SiO2 under Si between two plates, Neumann side walls
};

inline std::string to_string(ManufacturedCase c)
{
    switch (c)
    {
        case ManufacturedCase::quadratic_harmonic: return "quadratic-harmonic";
        case ManufacturedCase::trilinear_exact: return "trilinear-exact";
        case ManufacturedCase::layered_capacitor: return "layered-capacitor";
    }
    return {};
}

inline ManufacturedCase manufactured_case_from(std::string const& name)
{
    for (auto c : {ManufacturedCase::quadratic_harmonic, ManufacturedCase::trilinear_exact,
                   ManufacturedCase::layered_capacitor})
    {
        if (to_string(c) == name) return c;
    }
    throw ValidationError("unknown manufactured case '" + name + "'");
}

/*!
 * Two-layer parallel-plate capacitor along z: eps_lower on [0, d],
 * eps_upper on [d, L], phi(0) = 0, phi(L) = V. The exact potential is
 * piecewise linear with interface value V (d/e1) / (d/e1 + (L-d)/e2).
 */
struct LayeredCapacitor
{
    double length = 100.0;
    double interface = 40.0;
    double eps_lower = 4.5;  // SiO2
    double eps_upper = 11.0;  // Si
    double voltage = 1.0;
    double width = 20.0;

    double interface_potential() const
    {
        double const a = interface / eps_lower;
        double const b = (length - interface) / eps_upper;
        return voltage * a / (a + b);
    }

    double potential(double z) const
    {
        double const vi = interface_potential();
        if (z <= interface) return vi * z / interface;
        return vi + (voltage - vi) * (z - interface) / (length - interface);
    }

    //! Uniform cells in each layer; the interface is always a node plane.
    GridAxes axes(std::size_t lateral_cells, std::size_t cells_lower, std::size_t cells_upper) const
    {
        GridAxes ax;
        ax.coords[0] = uniform_coords(0.0, width, lateral_cells + 1);
        ax.coords[1] = uniform_coords(0.0, width, lateral_cells + 1);
        auto z = uniform_coords(0.0, interface, cells_lower + 1);
        auto const upper = uniform_coords(interface, length, cells_upper + 1);
        z.reserve(z.size() + cells_upper);
        for (std::size_t k = 1; k < upper.size(); ++k) z.push_back(upper[k]);
        ax.coords[2] = std::move(z);
        return ax;
    }

    Mesh mesh(GridAxes axes) const
    {
        return make_plain_mesh(std::move(axes),
                               [&](Vec3 const& c) { return c[2] < interface ? eps_lower : eps_upper; });
    }

    //! Plates at z = 0 and z = L; the side walls stay natural (zero flux).
    NodalConstraints constraints(Mesh const& mesh) const
    {
        NodalConstraints c(mesh.node_count());
        auto const nz = mesh.node_dims()[2];
        for (Index n = 0; n < mesh.node_count(); ++n)
        {
            auto const k = mesh.node_ijk(n)[2];
            if (k == 0) c[n] = 0.0;
            if (k == nz - 1) c[n] = voltage;
        }
        return c;
    }
};

//! Dirichlet data from `exact` on every boundary node of a plain mesh.
inline NodalConstraints boundary_constraints(Mesh const& mesh, std::function<double(Vec3 const&)> const& exact)
{
    NodalConstraints c(mesh.node_count());
    auto const nd = mesh.node_dims();
    for (Index n = 0; n < mesh.node_count(); ++n)
    {
        auto const ijk = mesh.node_ijk(n);
        bool on_boundary = false;
        for (int d = 0; d < 3; ++d) on_boundary = on_boundary || ijk[d] == 0 || ijk[d] == nd[d] - 1;
        if (on_boundary) c[n] = exact(mesh.node_position(n));
    }
    return c;
}

//! L2 norm of (phi_h - exact) with a 3x3x3 Gauss rule per element.
inline double l2_error(Mesh const& mesh, std::span<double const> nodal,
                       std::function<double(Vec3 const&)> const& exact)
{
    auto const rule = gauss_rule_3d(3);
    double sum = 0.0;
    for (Index e = 0; e < mesh.element_count(); ++e)
    {
        if (!mesh.element_active(e)) continue;
        auto const x = mesh.element_coords(e);
        auto const nodes = mesh.element_nodes(e);
        for (std::size_t q = 0; q < rule.points.size(); ++q)
        {
            auto const s = shape(rule.points[q]);
            double const det = jacobian(x, s).det;
            double phi = 0.0;
            Vec3 p{};
            for (int j = 0; j < 8; ++j)
            {
                phi += s.values[j] * nodal[nodes[j]];
                for (int a = 0; a < 3; ++a) p[a] += s.values[j] * x[j][a];
            }
            double const err = phi - exact(p);
            sum += rule.weights[q] * det * err * err;
        }
    }
    return std::sqrt(sum);
}

struct ConvergenceLevel
{
    std::size_t cells = 0;  //!< cells per axis (lateral for the capacitor)
    double h = 0.0;
    double l2_error = 0.0;
    double max_nodal_error = 0.0;
    SolveReport report;
};

struct ConvergenceReport
{
    ManufacturedCase problem{};
    std::vector<ConvergenceLevel> levels;
    double order = 0.0;      //!< least-squares slope of log(error) vs log(h)
    bool exact = false;      //!< every error is at the solver floor
    bool monotone = true;    //!< errors decrease strictly with h
};

//! Least-squares slope of log(e) against log(h).
inline double fitted_order(std::vector<double> const& h, std::vector<double> const& e)
{
    std::size_t const n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double const dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/*!
 * Solve one manufactured case on `levels` uniformly refined meshes, halving
 * h each time from `coarsest` cells per axis.
 */
inline ConvergenceReport run_convergence(ManufacturedCase problem, int levels, std::size_t coarsest = 4,
                                         SolverOptions solver = {1e-12, std::size_t{100000}})
{
    if (levels < 3) throw ValidationError("convergence studies need at least 3 levels");
    ConvergenceReport rep;
    rep.problem = problem;

    LayeredCapacitor cap;
    std::function<double(Vec3 const&)> exact;
    switch (problem)
    {
        case ManufacturedCase::quadratic_harmonic:
            exact = [](Vec3 const& p) { return p[0] * p[0] - p[1] * p[1]; };
            break;
        case ManufacturedCase::trilinear_exact:
            exact = [](Vec3 const& p) { return p[0] * p[1] * p[2]; };
            break;
        case ManufacturedCase::layered_capacitor:
            exact = [cap](Vec3 const& p) { return cap.potential(p[2]); };
            break;
    }

    double scale = 0.0;
    double l2_floor = 0.0;
    for (int l = 0; l < levels; ++l)
    {
        std::size_t const cells = coarsest << l;
        Mesh mesh;
        NodalConstraints fixed;
        double h = 0.0;
        if (problem == ManufacturedCase::layered_capacitor)
        {
            // 2:3 layer split keeps the interface on a node plane.
            mesh = cap.mesh(cap.axes(cells, 2 * cells, 3 * cells));
            fixed = cap.constraints(mesh);
            h = cap.length / static_cast<double>(5 * cells);
            scale = std::abs(cap.voltage);
        }
        else
        {
            GridAxes ax;
            for (int d = 0; d < 3; ++d) ax.coords[d] = uniform_coords(0.0, 1.0, cells + 1);
            mesh = make_plain_mesh(std::move(ax), [](Vec3 const&) { return 1.0; });
            fixed = boundary_constraints(mesh, exact);
            h = 1.0 / static_cast<double>(cells);
            scale = 1.0;
        }
        auto const sys = eliminate_dirichlet(assemble_global(mesh), fixed);
        auto const sol = pcg_solve(sys, solver);

        ConvergenceLevel lvl;
        lvl.cells = cells;
        lvl.h = h;
        lvl.report = sol.report;
        lvl.l2_error = l2_error(mesh, sol.values, exact);
        for (Index n = 0; n < mesh.node_count(); ++n)
        {
            lvl.max_nodal_error = std::max(lvl.max_nodal_error, std::abs(sol.values[n] - exact(mesh.node_position(n))));
        }
        rep.levels.push_back(lvl);
        auto const& ax = mesh.axes();
        double const volume = (ax.coords[0].back() - ax.coords[0].front()) * (ax.coords[1].back() - ax.coords[1].front())
                              * (ax.coords[2].back() - ax.coords[2].front());
        l2_floor = std::max(l2_floor, lvl.l2_error / std::sqrt(volume));
    }

    // Nodal agreement alone is not enough: x^2 - y^2 is nodally exact on uniform grids.
    double const floor = 1e-8 * std::max(1.0, scale);
    rep.exact = l2_floor <= floor;
    for (auto const& l : rep.levels) rep.exact = rep.exact && l.max_nodal_error <= floor;
    std::vector<double> hs, es;
    for (std::size_t i = 0; i < rep.levels.size(); ++i)
    {
        hs.push_back(rep.levels[i].h);
        es.push_back(std::max(rep.levels[i].l2_error, 1e-300));
        if (i > 0 && !(rep.levels[i].l2_error < rep.levels[i - 1].l2_error)) rep.monotone = false;
    }
    rep.order = fitted_order(hs, es);
    return rep;
}

}  // namespace idqd
