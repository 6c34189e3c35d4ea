#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "element.hpp"
#include "geometry.hpp"

namespace idqd {

//! Strictly increasing node coordinates along x, y and z (nm).
struct GridAxes
{
    std::array<std::vector<double>, 3> coords;

    std::vector<double> const& operator[](int d) const { return coords[d]; }
    std::vector<double> const& operator[](Axis a) const { return coords[to_int(a)]; }

    std::array<std::size_t, 3> node_dims() const
    {
        return {coords[0].size(), coords[1].size(), coords[2].size()};
    }
};

enum class NodeKind : std::uint8_t
{
    free,       //!< unknown in the linear system
    dirichlet,  //!< prescribed value on a gate surface or the base plane
    conductor,  //!< inside a gate; carries the gate voltage but is not in the solve
};

//! Exterior face of an active element that carries the Neumann flux.
struct NeumannFace
{
    Index element;
    int face;  //!< index into kFaceNodes
    double area;
};

//! Node shared by two Dirichlet sources; legal only while their voltages agree.
struct SharedNode
{
    Index node;
    std::int32_t first;
    std::int32_t second;
};

//! Per-node boundary classification. Source 0 is the base plane, source g+1 is gate g.
struct BoundaryData
{
    std::vector<NodeKind> kind;
    std::vector<std::int32_t> source;
    std::vector<std::string> source_labels;
    std::vector<double> source_voltages;
    std::vector<SharedNode> shared;
    std::vector<NeumannFace> neumann;
    double neumann_flux = 0.0;
};

//! Per-node prescribed values; nullopt marks an unknown.
using NodalConstraints = std::vector<std::optional<double>>;

//! Containing element and local coordinates in [-1, 1]^3.
struct Location
{
    Index element;
    Vec3 local;
};

//---------------------------------------------------------------------------//
/*!
 * Structured hexahedral mesh over a rectilinear grid.
 *
 * Node (i, j, k) has id i + nx (j + ny k); element (i, j, k) spans nodes
 * i..i+1, j..j+1, k..k+1 and has id i + (nx-1)(j + (ny-1) k). Immutable after
 * construction.
 */
class Mesh
{
  public:
    Mesh() = default;

    Mesh(GridAxes axes, std::vector<double> permittivity, std::vector<std::uint8_t> active,
         BoundaryData boundary = {}, std::vector<std::string> warnings = {})
        : axes_(std::move(axes)),
          eps_(std::move(permittivity)),
          active_(std::move(active)),
          bc_(std::move(boundary)),
          warnings_(std::move(warnings))
    {
        for (int d = 0; d < 3; ++d)
        {
            auto const& c = axes_.coords[d];
            if (c.size() < 2) throw MeshError("every axis needs at least two coordinates");
            for (std::size_t i = 1; i < c.size(); ++i)
            {
                if (!(c[i] > c[i - 1])) throw MeshError("axis coordinates must strictly increase");
            }
        }
        if (eps_.size() != element_count() || active_.size() != element_count())
        {
            throw MeshError("per-element arrays do not match the element count");
        }
        if (bc_.kind.empty())
        {
            bc_.kind.assign(node_count(), NodeKind::free);
            bc_.source.assign(node_count(), -1);
        }
        if (bc_.kind.size() != node_count() || bc_.source.size() != node_count())
        {
            throw MeshError("per-node arrays do not match the node count");
        }
    }

    //// STRUCTURE ////

    GridAxes const& axes() const noexcept { return axes_; }
    std::array<std::size_t, 3> node_dims() const noexcept { return axes_.node_dims(); }
    std::array<std::size_t, 3> element_dims() const noexcept
    {
        auto n = node_dims();
        return {n[0] - 1, n[1] - 1, n[2] - 1};
    }
    std::size_t node_count() const noexcept
    {
        auto n = node_dims();
        return n[0] * n[1] * n[2];
    }
    std::size_t element_count() const noexcept
    {
        auto n = element_dims();
        return n[0] * n[1] * n[2];
    }

    Index node_id(std::size_t i, std::size_t j, std::size_t k) const noexcept
    {
        auto n = node_dims();
        return i + n[0] * (j + n[1] * k);
    }
    std::array<std::size_t, 3> node_ijk(Index id) const noexcept
    {
        auto n = node_dims();
        return {id % n[0], (id / n[0]) % n[1], id / (n[0] * n[1])};
    }
    Index element_id(std::size_t i, std::size_t j, std::size_t k) const noexcept
    {
        auto n = element_dims();
        return i + n[0] * (j + n[1] * k);
    }
    std::array<std::size_t, 3> element_ijk(Index id) const noexcept
    {
        auto n = element_dims();
        return {id % n[0], (id / n[0]) % n[1], id / (n[0] * n[1])};
    }

    Vec3 node_position(Index id) const noexcept
    {
        auto ijk = node_ijk(id);
        return {axes_.coords[0][ijk[0]], axes_.coords[1][ijk[1]], axes_.coords[2][ijk[2]]};
    }

    std::array<Index, 8> element_nodes(Index e) const noexcept
    {
        auto ijk = element_ijk(e);
        std::array<Index, 8> out;
        for (int j = 0; j < 8; ++j)
        {
            out[j] = node_id(ijk[0] + (kCorners[j][0] > 0), ijk[1] + (kCorners[j][1] > 0),
                             ijk[2] + (kCorners[j][2] > 0));
        }
        return out;
    }

    Box element_box(Index e) const noexcept
    {
        auto ijk = element_ijk(e);
        Box b;
        for (int d = 0; d < 3; ++d)
        {
            b.lo[d] = axes_.coords[d][ijk[d]];
            b.hi[d] = axes_.coords[d][ijk[d] + 1];
        }
        return b;
    }

    ElementCoords element_coords(Index e) const noexcept
    {
        auto b = element_box(e);
        return brick_coords(b.lo, b.hi);
    }

    //// MATERIALS ////

    bool element_active(Index e) const noexcept { return active_[e] != 0; }
    double element_permittivity(Index e) const noexcept { return eps_[e]; }
    std::size_t active_element_count() const noexcept
    {
        return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), 1));
    }

    //// BOUNDARY ////

    NodeKind node_kind(Index n) const noexcept { return bc_.kind[n]; }
    std::int32_t node_source(Index n) const noexcept { return bc_.source[n]; }
    std::vector<std::string> const& source_labels() const noexcept { return bc_.source_labels; }
    std::vector<double> const& source_voltages() const noexcept { return bc_.source_voltages; }
    std::vector<NeumannFace> const& neumann_faces() const noexcept { return bc_.neumann; }
    double neumann_flux() const noexcept { return bc_.neumann_flux; }
    std::vector<std::string> const& warnings() const noexcept { return warnings_; }

    std::size_t count_nodes(NodeKind k) const noexcept
    {
        return static_cast<std::size_t>(std::count(bc_.kind.begin(), bc_.kind.end(), k));
    }

    //! Dirichlet nodes (gate surfaces and base) with their voltages.
    std::map<Index, double> dirichlet_nodes() const
    {
        std::map<Index, double> out;
        for (Index n = 0; n < node_count(); ++n)
        {
            if (bc_.kind[n] == NodeKind::dirichlet) out.emplace(n, bc_.source_voltages[bc_.source[n]]);
        }
        return out;
    }

    //! Prescribed values at the mesh's own source voltages.
    NodalConstraints constraints() const { return constraints_for(bc_.source_voltages); }

    //! Prescribed values for another assignment of source voltages (base first).
    NodalConstraints constraints_for(std::span<double const> voltages) const
    {
        if (voltages.size() != bc_.source_voltages.size())
        {
            throw MeshError("expected " + std::to_string(bc_.source_voltages.size())
                            + " source voltages");
        }
        for (auto const& s : bc_.shared)
        {
            if (voltages[s.first] != voltages[s.second])
            {
                throw MeshError("node " + std::to_string(s.node) + " is shared by '"
                                + bc_.source_labels[s.first] + "' and '"
                                + bc_.source_labels[s.second]
                                + "' at different voltages");
            }
        }
        NodalConstraints c(node_count());
        for (Index n = 0; n < node_count(); ++n)
        {
            if (bc_.kind[n] != NodeKind::free) c[n] = voltages[bc_.source[n]];
        }
        return c;
    }

    //// LOOKUP ////

    //! Candidate elements containing p, lowest id first (several on shared faces).
    std::vector<Index> elements_containing(Vec3 const& p) const
    {
        std::array<std::array<std::size_t, 2>, 3> cand{};
        std::array<int, 3> ncand{};
        for (int d = 0; d < 3; ++d)
        {
            auto const& c = axes_.coords[d];
            if (p[d] < c.front() || p[d] > c.back())
            {
                throw DomainError("point lies outside the mesh domain along "
                                  + std::string(1, axis_name(static_cast<Axis>(d))));
            }
            auto ub = std::upper_bound(c.begin(), c.end(), p[d]);
            std::size_t cell = static_cast<std::size_t>(ub - c.begin());
            cell = std::min(cell == 0 ? 0 : cell - 1, c.size() - 2);
            if (p[d] == c[cell] && cell > 0)
            {
                cand[d] = {cell - 1, cell};
                ncand[d] = 2;
            }
            else
            {
                cand[d] = {cell, cell};
                ncand[d] = 1;
            }
        }
        std::vector<Index> out;
        for (int c = 0; c < ncand[2]; ++c)
            for (int b = 0; b < ncand[1]; ++b)
                for (int a = 0; a < ncand[0]; ++a)
                    out.push_back(element_id(cand[0][a], cand[1][b], cand[2][c]));
        std::sort(out.begin(), out.end());
        return out;
    }

    Vec3 local_coordinates(Index e, Vec3 const& p) const noexcept
    {
        auto b = element_box(e);
        Vec3 xi;
        for (int d = 0; d < 3; ++d) xi[d] = 2.0 * (p[d] - b.lo[d]) / (b.hi[d] - b.lo[d]) - 1.0;
        return xi;
    }

    /*!
     * Locate the active element containing p. Points on shared faces resolve
     * to the lowest-id active candidate.
     */
    Location locate_element(Vec3 const& p) const
    {
        for (Index e : elements_containing(p))
        {
            if (element_active(e)) return {e, local_coordinates(e, p)};
        }
        throw DomainError("point lies inside a conductor (deactivated cell)");
    }

  private:
    GridAxes axes_;
    std::vector<double> eps_;
    std::vector<std::uint8_t> active_;
    BoundaryData bc_;
    std::vector<std::string> warnings_;
};

//---------------------------------------------------------------------------//
// Axis generation
//---------------------------------------------------------------------------//

struct MeshOptions
{
    //! Target node counts per axis; the result has at least this many.
    std::array<int, 3> nodes{2, 2, 2};
    std::optional<ZGrading> z_grading;
    //! Additional coordinates that must appear on each axis.
    std::array<std::vector<double>, 3> extra_coords;

    static MeshOptions from_spec(DeviceSpec const& spec)
    {
        MeshOptions o;
        if (spec.mesh)
        {
            o.nodes = spec.mesh->nodes;
            o.z_grading = spec.mesh->z_grading;
        }
        return o;
    }
};

/*!
 * Build one axis: keep every mandatory coordinate, then subdivide the gaps
 * between them so the total node count reaches at least `target_nodes`.
 *
 * With grading, gaps inside [lo, hi] count `ratio` times their length when
 * distributing cells, and the gaps touching the band grow geometrically away
 * from it.
 */
inline std::vector<double> make_axis(double lo, double hi, std::vector<double> mandatory,
                                     int target_nodes, std::optional<ZGrading> const& grading = {})
{
    mandatory.push_back(lo);
    mandatory.push_back(hi);
    if (grading)
    {
        mandatory.push_back(std::clamp(grading->lo, lo, hi));
        mandatory.push_back(std::clamp(grading->hi, lo, hi));
    }
    std::erase_if(mandatory, [&](double c) { return c < lo || c > hi; });
    std::sort(mandatory.begin(), mandatory.end());
    mandatory.erase(std::unique(mandatory.begin(), mandatory.end()), mandatory.end());

    std::size_t const ngaps = mandatory.size() - 1;
    auto in_band = [&](std::size_t g) {
        if (!grading) return false;
        double const mid = 0.5 * (mandatory[g] + mandatory[g + 1]);
        return mid > grading->lo && mid < grading->hi;
    };
    std::vector<double> weight(ngaps);
    double total = 0.0;
    for (std::size_t g = 0; g < ngaps; ++g)
    {
        weight[g] = (mandatory[g + 1] - mandatory[g]) * (in_band(g) ? grading->ratio : 1.0);
        total += weight[g];
    }

    std::size_t const target = static_cast<std::size_t>(std::max(target_nodes, 2)) - 1;
    auto cells_for = [&](double h) {
        std::vector<std::size_t> n(ngaps);
        for (std::size_t g = 0; g < ngaps; ++g)
        {
            double const r = weight[g] / h * (1.0 - 1e-12);
            n[g] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r)));
        }
        return n;
    };
    auto sum = [](std::vector<std::size_t> const& n) {
        std::size_t s = 0;
        for (auto v : n) s += v;
        return s;
    };

    std::vector<std::size_t> cells(ngaps, 1);
    if (ngaps < target)
    {
        // Largest spacing that still reaches the target count.
        double h_ok = total / static_cast<double>(target);
        double h_bad = *std::max_element(weight.begin(), weight.end()) * 2.0;
        for (int it = 0; it < 200; ++it)
        {
            double const mid = 0.5 * (h_ok + h_bad);
            if (sum(cells_for(mid)) >= target)
                h_ok = mid;
            else
                h_bad = mid;
        }
        cells = cells_for(h_ok);
    }

    std::vector<double> out;
    out.push_back(mandatory.front());
    for (std::size_t g = 0; g < ngaps; ++g)
    {
        double const a = mandatory[g], b = mandatory[g + 1];
        std::size_t const n = cells[g];
        bool const touches_lo = grading && !in_band(g) && b == grading->lo;
        bool const touches_hi = grading && !in_band(g) && a == grading->hi;
        if (n > 1 && grading && grading->ratio > 1.0 && (touches_lo || touches_hi))
        {
            // Geometric cells, finest next to the band, ratio between ends.
            double const q = std::pow(grading->ratio, 1.0 / static_cast<double>(n - 1));
            std::vector<double> sizes(n);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                sizes[i] = std::pow(q, static_cast<double>(i));
                s += sizes[i];
            }
            if (touches_lo) std::reverse(sizes.begin(), sizes.end());
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i)
            {
                acc += sizes[i];
                out.push_back(a + (b - a) * (acc / s));
            }
        }
        else
        {
            for (std::size_t i = 1; i < n; ++i)
            {
                out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
            }
        }
        out.push_back(b);
    }
    return out;
}

//! Every box face and probe coordinate that must appear on the mesh axes.
inline std::array<std::vector<double>, 3> interface_coordinates(DeviceSpec const& spec)
{
    std::array<std::vector<double>, 3> c;
    auto add_box = [&](Box const& b) {
        for (int d = 0; d < 3; ++d)
        {
            c[d].push_back(b.lo[d]);
            c[d].push_back(b.hi[d]);
        }
    };
    add_box(spec.domain);
    for (auto const& r : spec.regions) add_box(r.box);
    for (auto const& g : spec.gates) add_box(g.box);
    auto add_point = [&](Vec3 const& p) {
        for (int d = 0; d < 3; ++d) c[d].push_back(p[d]);
    };
    if (spec.probes.idqd_center) add_point(*spec.probes.idqd_center);
    for (auto const& p : spec.probes.dot_centers) add_point(p);
    if (auto const& l = spec.probes.line)
    {
        int k = 0;
        for (int d = 0; d < 3; ++d)
        {
            if (d != to_int(l->axis)) c[d].push_back(l->fixed[k++]);
        }
    }
    for (auto const& s : spec.probes.slices) c[to_int(s.normal)].push_back(s.offset);
    return c;
}

//---------------------------------------------------------------------------//
// Device mesh construction
//---------------------------------------------------------------------------//

namespace detail {

inline Mesh build_mesh_impl(DeviceSpec const& spec, MeshOptions const& opts)
{
    validate(spec);
    auto mandatory = interface_coordinates(spec);
    GridAxes axes;
    std::vector<std::string> warnings;
    for (int d = 0; d < 3; ++d)
    {
        auto m = mandatory[d];
        m.insert(m.end(), opts.extra_coords[d].begin(), opts.extra_coords[d].end());
        std::optional<ZGrading> grading = d == 2 ? opts.z_grading : std::nullopt;
        axes.coords[d] = make_axis(spec.domain.lo[d], spec.domain.hi[d], m, opts.nodes[d], grading);

        double const nominal = spec.domain.extent(d) / static_cast<double>(std::max(opts.nodes[d], 2) - 1);
        auto warn_thin = [&](std::string const& name, Box const& b) {
            double const t = b.extent(d);
            if (t > 0.0 && t < nominal)
            {
                warnings.push_back(name + " is thinner than one nominal cell along "
                                   + std::string(1, axis_name(static_cast<Axis>(d)))
                                   + "; its faces were kept as extra coordinates");
            }
        };
        for (auto const& r : spec.regions) warn_thin("region '" + r.name + "'", r.box);
        for (auto const& g : spec.gates) warn_thin("gate '" + g.label + "'", g.box);
    }

    std::size_t const nelem = (axes.coords[0].size() - 1) * (axes.coords[1].size() - 1)
                              * (axes.coords[2].size() - 1);
    std::vector<double> eps(nelem, 0.0);
    std::vector<std::uint8_t> active(nelem, 0);
    {
        Mesh grid(axes, eps, active);
        for (Index e = 0; e < nelem; ++e)
        {
            auto medium = material_at(spec, grid.element_box(e).center());
            if (!medium.is_conductor())
            {
                eps[e] = medium.material.relative_permittivity;
                active[e] = 1;
            }
        }
    }

    Mesh const mesh(axes, eps, active);
    BoundaryData bc;
    std::size_t const nnode = mesh.node_count();
    bc.kind.assign(nnode, NodeKind::free);
    bc.source.assign(nnode, -1);
    auto const nd = mesh.node_dims();

    bc.source_labels.push_back("base");
    bc.source_voltages.push_back(spec.base_voltage);
    for (auto const& g : spec.gates)
    {
        bc.source_labels.push_back(g.label);
        bc.source_voltages.push_back(g.voltage);
    }
    bc.neumann_flux = spec.neumann_flux;

    std::vector<std::uint8_t> supported(nnode, 0);
    for (Index e = 0; e < nelem; ++e)
    {
        if (!mesh.element_active(e)) continue;
        for (Index n : mesh.element_nodes(e)) supported[n] = 1;
    }

    auto assign = [&](Index n, std::int32_t src, NodeKind kind) {
        if (bc.source[n] < 0)
        {
            bc.source[n] = src;
            bc.kind[n] = kind;
            return;
        }
        if (bc.source[n] == src) return;
        if (bc.source_voltages[bc.source[n]] != bc.source_voltages[src])
        {
            auto p = mesh.node_position(n);
            throw MeshError("conflicting Dirichlet values at node " + std::to_string(n) + " ("
                            + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", "
                            + std::to_string(p[2]) + "): '" + bc.source_labels[bc.source[n]]
                            + "' vs '" + bc.source_labels[src] + "'");
        }
        bc.shared.push_back({n, bc.source[n], src});
    };

    for (std::size_t j = 0; j < nd[1]; ++j)
        for (std::size_t i = 0; i < nd[0]; ++i)
        {
            Index n = mesh.node_id(i, j, 0);
            if (supported[n]) assign(n, 0, NodeKind::dirichlet);
        }

    auto index_range = [&](int d, double lo, double hi) {
        auto const& c = mesh.axes().coords[d];
        auto a = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), lo) - c.begin());
        auto b = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), hi) - c.begin());
        return std::pair{a, b};
    };
    for (std::size_t g = 0; g < spec.gates.size(); ++g)
    {
        auto const& box = spec.gates[g].box;
        auto [i0, i1] = index_range(0, box.lo[0], box.hi[0]);
        auto [j0, j1] = index_range(1, box.lo[1], box.hi[1]);
        auto [k0, k1] = index_range(2, box.lo[2], box.hi[2]);
        auto const src = static_cast<std::int32_t>(g + 1);
        for (std::size_t k = k0; k < k1; ++k)
            for (std::size_t j = j0; j < j1; ++j)
                for (std::size_t i = i0; i < i1; ++i)
                {
                    Index n = mesh.node_id(i, j, k);
                    assign(n, src, supported[n] ? NodeKind::dirichlet : NodeKind::conductor);
                }
    }

    // Exterior faces of the active region that are not gate surfaces.
    auto const ed = mesh.element_dims();
    for (Index e = 0; e < nelem; ++e)
    {
        if (!mesh.element_active(e)) continue;
        auto ijk = mesh.element_ijk(e);
        auto nodes = mesh.element_nodes(e);
        auto box = mesh.element_box(e);
        for (int f = 0; f < 6; ++f)
        {
            int const d = f / 2;
            bool const upper = (f % 2) == 1;
            bool exterior = upper ? ijk[d] + 1 == ed[d] : ijk[d] == 0;
            if (!exterior)
            {
                auto nb = ijk;
                nb[d] = upper ? nb[d] + 1 : nb[d] - 1;
                if (mesh.element_active(mesh.element_id(nb[0], nb[1], nb[2]))) continue;
            }
            bool all_fixed = true;
            for (int v : kFaceNodes[f]) all_fixed = all_fixed && bc.kind[nodes[v]] != NodeKind::free;
            if (all_fixed) continue;
            double area = 1.0;
            for (int a = 0; a < 3; ++a)
            {
                if (a != d) area *= box.extent(a);
            }
            bc.neumann.push_back({e, f, area});
        }
    }
    return Mesh(std::move(axes), std::move(eps), std::move(active), std::move(bc),
                std::move(warnings));
}

}  // namespace detail

/*!
 * Mesh a device: rectilinear axes through every interface, element
 * permittivity sampled at element centres, gate interiors deactivated, and
 * boundary nodes classified.
 */
inline Mesh build_mesh(DeviceSpec const& spec, MeshOptions const& opts)
{
    return detail::build_mesh_impl(spec, opts);
}

inline Mesh build_mesh(DeviceSpec const& spec)
{
    return detail::build_mesh_impl(spec, MeshOptions::from_spec(spec));
}

//! Mesh without boundary data, for manufactured problems and tests.
template <class EpsFn>
Mesh make_plain_mesh(GridAxes axes, EpsFn&& eps_at)
{
    std::size_t const nelem = (axes.coords[0].size() - 1) * (axes.coords[1].size() - 1)
                              * (axes.coords[2].size() - 1);
    std::vector<double> eps(nelem, 1.0);
    std::vector<std::uint8_t> active(nelem, 1);
    Mesh grid(axes, eps, active);
    for (Index e = 0; e < nelem; ++e) eps[e] = eps_at(grid.element_box(e).center());
    return Mesh(std::move(axes), std::move(eps), std::move(active));
}

//! n uniformly spaced coordinates on [lo, hi].
inline std::vector<double> uniform_coords(double lo, double hi, std::size_t n)
{
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        c[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    c.back() = hi;
    return c;
}

}  // namespace idqd
