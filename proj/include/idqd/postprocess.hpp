#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "device_solver.hpp"
#include "element.hpp"
#include "mesh.hpp"

namespace idqd {

namespace detail {

//! Lowest-id active element containing p, else the lowest-id candidate.
inline Index pick_element(Mesh const& mesh, Vec3 const& p)
{
    auto cand = mesh.elements_containing(p);
    for (Index e : cand)
    {
        if (mesh.element_active(e)) return e;
    }
    return cand.front();
}

}  // namespace detail

//! Trilinear interpolation of the nodal potential. Conductor cells return the gate voltage.
inline double eval_potential(SolutionField const& field, Vec3 const& p)
{
    auto const& mesh = *field.mesh;
    Index const e = detail::pick_element(mesh, p);
    auto const s = shape(mesh.local_coordinates(e, p));
    auto const nodes = mesh.element_nodes(e);
    double phi = 0.0;
    for (int j = 0; j < 8; ++j) phi += s.values[j] * field.values[nodes[j]];
    return phi;
}

//! E = -grad phi inside one element at local coordinates `local` (V/nm).
inline Vec3 element_field(SolutionField const& field, Index e, Vec3 const& local)
{
    auto const& mesh = *field.mesh;
    auto const x = mesh.element_coords(e);
    auto const s = shape(local);
    auto const jac = jacobian(x, s);
    auto const nodes = mesh.element_nodes(e);
    Vec3 E{};
    for (int j = 0; j < 8; ++j)
    {
        auto const g = physical_gradient(jac, s.gradients[j]);
        for (int a = 0; a < 3; ++a) E[a] -= field.values[nodes[j]] * g[a];
    }
    return E;
}

/*!
 * Electric field at p. The gradient is discontinuous across element faces;
 * on a face the lowest-id active element is used.
 */
inline Vec3 eval_field(SolutionField const& field, Vec3 const& p)
{
    auto const& mesh = *field.mesh;
    Index const e = detail::pick_element(mesh, p);
    return element_field(field, e, mesh.local_coordinates(e, p));
}

//! Node field recovered by volume-weighted averaging over adjacent active elements.
inline std::vector<Vec3> nodal_field(SolutionField const& field)
{
    auto const& mesh = *field.mesh;
    std::vector<Vec3> E(mesh.node_count(), Vec3{});
    std::vector<double> w(mesh.node_count(), 0.0);
    for (Index e = 0; e < mesh.element_count(); ++e)
    {
        if (!mesh.element_active(e)) continue;
        auto const box = mesh.element_box(e);
        double const vol = box.extent(0) * box.extent(1) * box.extent(2);
        auto const nodes = mesh.element_nodes(e);
        for (int j = 0; j < 8; ++j)
        {
            Vec3 const corner{double(kCorners[j][0]), double(kCorners[j][1]), double(kCorners[j][2])};
            auto const Ee = element_field(field, e, corner);
            for (int a = 0; a < 3; ++a) E[nodes[j]][a] += vol * Ee[a];
            w[nodes[j]] += vol;
        }
    }
    for (Index n = 0; n < E.size(); ++n)
    {
        if (w[n] > 0.0) E[n] = (1.0 / w[n]) * E[n];
    }
    return E;
}

//! Element field at every element centre (zero in conductors).
inline std::vector<Vec3> element_fields(SolutionField const& field)
{
    auto const& mesh = *field.mesh;
    std::vector<Vec3> E(mesh.element_count(), Vec3{});
    for (Index e = 0; e < mesh.element_count(); ++e)
    {
        if (mesh.element_active(e)) E[e] = element_field(field, e, {0.0, 0.0, 0.0});
    }
    return E;
}

//---------------------------------------------------------------------------//
// Probes
//---------------------------------------------------------------------------//

struct ProbeResult
{
    enum class Kind
    {
        line,
        plane,
    };

    Kind kind = Kind::line;
    std::string description;
    std::vector<Vec3> positions;
    std::vector<double> potential;
    std::vector<Vec3> field;  //!< empty unless requested

    //! Regular sample grid for plane slices (one dimension is 1).
    std::array<std::size_t, 3> grid_dims{};
    Vec3 origin{};
    Vec3 spacing{};

    std::vector<double> source_voltages;
};

enum class SampleMode
{
    nodal,
    uniform,
};

/*!
 * Sample phi along a line parallel to `axis` through the two fixed
 * coordinates (given in increasing axis order). Nodal mode samples exactly
 * the mesh coordinates along the axis; uniform mode takes `count` points.
 */
inline ProbeResult line_probe(SolutionField const& field, Axis axis, std::array<double, 2> fixed,
                              SampleMode mode = SampleMode::nodal, std::size_t count = 0,
                              bool with_field = false)
{
    auto const& mesh = *field.mesh;
    int const a = to_int(axis);
    auto const& coords = mesh.axes()[a];
    ProbeResult r;
    r.kind = ProbeResult::Kind::line;
    r.source_voltages = field.source_voltages;

    std::vector<double> along;
    if (mode == SampleMode::nodal)
    {
        along = coords;
    }
    else
    {
        if (count < 2) throw DomainError("uniform line probes need at least 2 samples");
        along = uniform_coords(coords.front(), coords.back(), count);
    }

    Vec3 base{};
    for (int d = 0, k = 0; d < 3; ++d)
    {
        if (d != a) base[d] = fixed[k++];
    }
    {
        Vec3 probe = base;
        probe[a] = coords.front();
        (void)mesh.elements_containing(probe);  // domain check on the fixed coordinates
    }

    bool any_active = false;
    for (double t : along)
    {
        Vec3 p = base;
        p[a] = t;
        auto const cand = mesh.elements_containing(p);
        for (Index e : cand) any_active = any_active || mesh.element_active(e);
        r.positions.push_back(p);
        r.potential.push_back(eval_potential(field, p));
        if (with_field) r.field.push_back(eval_field(field, p));
    }
    if (!any_active) throw DomainError("line probe passes only through conductor cells");

    char buf[128];
    int const u = a == 0 ? 1 : 0;
    int const v = a == 2 ? 1 : 2;
    std::snprintf(buf, sizeof buf, "line along %c at %c=%.17g %c=%.17g", axis_name(axis),
                  axis_name(static_cast<Axis>(u)), fixed[0], axis_name(static_cast<Axis>(v)), fixed[1]);
    r.description = buf;
    return r;
}

/*!
 * Regular grid of phi samples on an axis-normal plane spanning the domain.
 * `resolution` gives the sample counts along the two in-plane axes in
 * increasing axis order; zeros default to the mesh node counts.
 */
inline ProbeResult plane_slice(SolutionField const& field, PlaneProbe plane,
                               std::array<std::size_t, 2> resolution = {0, 0}, bool with_field = false)
{
    auto const& mesh = *field.mesh;
    auto const& axes = mesh.axes();
    int const n = to_int(plane.normal);
    if (plane.offset < axes[n].front() || plane.offset > axes[n].back())
    {
        throw DomainError("slice plane does not intersect the domain");
    }
    int const u = n == 0 ? 1 : 0;
    int const v = n == 2 ? 1 : 2;
    if (resolution[0] == 0) resolution[0] = axes[u].size();
    if (resolution[1] == 0) resolution[1] = axes[v].size();
    if (resolution[0] < 2 || resolution[1] < 2) throw DomainError("slice resolution must be >= 2");

    ProbeResult r;
    r.kind = ProbeResult::Kind::plane;
    r.source_voltages = field.source_voltages;
    r.grid_dims = {1, 1, 1};
    r.grid_dims[u] = resolution[0];
    r.grid_dims[v] = resolution[1];
    r.origin[n] = plane.offset;
    r.origin[u] = axes[u].front();
    r.origin[v] = axes[v].front();
    r.spacing = {1.0, 1.0, 1.0};
    r.spacing[u] = (axes[u].back() - axes[u].front()) / static_cast<double>(resolution[0] - 1);
    r.spacing[v] = (axes[v].back() - axes[v].front()) / static_cast<double>(resolution[1] - 1);

    auto const cu = uniform_coords(axes[u].front(), axes[u].back(), resolution[0]);
    auto const cv = uniform_coords(axes[v].front(), axes[v].back(), resolution[1]);
    // VTK point order: first grid axis fastest.
    for (double tv : cv)
        for (double tu : cu)
        {
            Vec3 p{};
            p[n] = plane.offset;
            p[u] = tu;
            p[v] = tv;
            r.positions.push_back(p);
            r.potential.push_back(eval_potential(field, p));
            if (with_field) r.field.push_back(eval_field(field, p));
        }

    char buf[96];
    std::snprintf(buf, sizeof buf, "plane %c=%.17g", axis_name(plane.normal), plane.offset);
    r.description = buf;
    return r;
}

//---------------------------------------------------------------------------//
// Device-level quantities
//---------------------------------------------------------------------------//

/*!
 * d phi(probe) / d V_source by finite difference of two solves. The system is
 * linear, so the result does not depend on the base voltages or on delta.
 */
inline double coupling_factor(DeviceSolver const& solver, Vec3 const& probe, std::string const& source,
                              double delta, std::vector<double> base = {})
{
    if (delta == 0.0) throw ValidationError("coupling factor needs a nonzero voltage step");
    if (base.empty()) base = source_voltages(solver.spec());
    auto const idx = solver.source_index(source);
    auto const lo = solver.solve_sources(base);
    base[idx] += delta;
    auto const hi = solver.solve_sources(base);
    for (auto const* s : {&lo, &hi})
    {
        if (!s->report.converged) throw SolverError("coupling factor solve did not converge");
    }
    return (eval_potential(hi.field, probe) - eval_potential(lo.field, probe)) / delta;
}

inline double coupling_factor(DeviceSpec const& spec, MeshOptions const& mesh_opts,
                              SolverOptions const& solver_opts, Vec3 const& probe,
                              std::string const& gate, double delta)
{
    DeviceSolver solver(spec, mesh_opts, {}, solver_opts);
    return coupling_factor(solver, probe, gate, delta);
}

struct GradientResult
{
    double mean_gradient = 0.0;        //!< (phi(end) - phi(start)) / length, V/nm
    double max_field_component = 0.0;  //!< max |E . direction| over the samples, V/nm
    double length = 0.0;
};

//! Potential gradient between two points, e.g. the two dot centres.
inline GradientResult idqd_gradient(SolutionField const& field, Vec3 const& start, Vec3 const& end,
                                    std::size_t samples = 201)
{
    GradientResult g;
    auto const d = end - start;
    g.length = norm(d);
    if (!(g.length > 0.0)) throw DomainError("gradient line has zero length");
    g.mean_gradient = (eval_potential(field, end) - eval_potential(field, start)) / g.length;
    auto const dir = (1.0 / g.length) * d;
    for (std::size_t i = 0; i < std::max<std::size_t>(samples, 2); ++i)
    {
        double const t = static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(samples, 2) - 1);
        auto const E = eval_field(field, start + t * d);
        g.max_field_component = std::max(g.max_field_component, std::abs(dot(E, dir)));
    }
    return g;
}

}  // namespace idqd
