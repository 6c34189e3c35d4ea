#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace idqd {

/// Vacuum permittivity in F/m. Solutions depend only on relative permittivity
/// ratios, so this factor cancels out of the stiffness system entirely.
inline constexpr double kVacuumPermittivity = 8.85e-12;

struct Material
{
    std::string name;
    double relative_permittivity = 1.0;

    double absolute_permittivity() const noexcept
    {
        return relative_permittivity * kVacuumPermittivity;
    }

    friend bool operator==(Material const&, Material const&) = default;
};

namespace materials {
inline Material air() { return {"air", 1.0}; }
inline Material silicon() { return {"Si", 11.0}; }
inline Material silicon_dioxide() { return {"SiO2", 4.5}; }
}  // namespace materials

//---------------------------------------------------------------------------//
/*!
 * Axis-aligned box in nm. Containment is closed on both ends.
 */
struct Box
{
    Vec3 lo{};
    Vec3 hi{};

    bool contains(Vec3 const& p) const noexcept
    {
        for (int d = 0; d < 3; ++d)
        {
            if (p[d] < lo[d] || p[d] > hi[d]) return false;
        }
        return true;
    }

    bool contains(Box const& other) const noexcept
    {
        return contains(other.lo) && contains(other.hi);
    }

    //! Number of axes along which the box has zero extent.
    int flat_axes() const noexcept
    {
        int n = 0;
        for (int d = 0; d < 3; ++d) n += (lo[d] == hi[d]) ? 1 : 0;
        return n;
    }

    bool ordered() const noexcept
    {
        for (int d = 0; d < 3; ++d)
        {
            if (!(lo[d] <= hi[d])) return false;
        }
        return true;
    }

    double extent(int d) const noexcept { return hi[d] - lo[d]; }

    Vec3 center() const noexcept
    {
        return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
    }

    friend bool operator==(Box const&, Box const&) = default;
};

struct Region
{
    std::string name;
    Box box;
    Material material;

    friend bool operator==(Region const&, Region const&) = default;
};

//! Perfectly conducting electrode held at a fixed voltage. A gate box may be
//! flat along one axis, which models a sheet electrode.
struct Gate
{
    std::string label;
    Box box;
    double voltage = 0.0;

    friend bool operator==(Gate const&, Gate const&) = default;
};

struct LineProbe
{
    Axis axis = Axis::y;
    //! Coordinates on the two fixed axes, in increasing axis order.
    std::array<double, 2> fixed{};

    friend bool operator==(LineProbe const&, LineProbe const&) = default;
};

struct PlaneProbe
{
    Axis normal = Axis::z;
    double offset = 0.0;

    friend bool operator==(PlaneProbe const&, PlaneProbe const&) = default;
};

//! Named probe locations documented alongside the geometry.
struct ProbeSet
{
    std::optional<Vec3> idqd_center;
    std::vector<Vec3> dot_centers;
    std::optional<LineProbe> line;
    std::vector<PlaneProbe> slices;

    bool empty() const noexcept
    {
        return !idqd_center && dot_centers.empty() && !line && slices.empty();
    }

    friend bool operator==(ProbeSet const&, ProbeSet const&) = default;
};

//! Refine spacing inside [lo, hi] along z by `ratio`.
struct ZGrading
{
    double lo = 0.0;
    double hi = 0.0;
    double ratio = 1.0;

    friend bool operator==(ZGrading const&, ZGrading const&) = default;
};

struct MeshHints
{
    std::array<int, 3> nodes{2, 2, 2};
    std::optional<ZGrading> z_grading;

    friend bool operator==(MeshHints const&, MeshHints const&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * Declarative device description.
 *
 * Regions are painted in order over the background material, so a later
 * region wins where boxes overlap. Gates are conductors and take precedence
 * over every dielectric region. The base plane z = domain.lo[2] is held at
 * `base_voltage`; every other exterior surface carries the uniform normal
 * flux `neumann_flux` (C/m^2).
 */
struct DeviceSpec
{
    Box domain;
    Material background = materials::air();
    std::vector<Material> materials;
    std::vector<Region> regions;
    std::vector<Gate> gates;
    double base_voltage = 0.0;
    double neumann_flux = 0.0;
    std::optional<MeshHints> mesh;
    ProbeSet probes;

    std::optional<std::size_t> find_gate(std::string const& label) const
    {
        for (std::size_t i = 0; i < gates.size(); ++i)
        {
            if (gates[i].label == label) return i;
        }
        return std::nullopt;
    }

    //! Copy with one gate voltage replaced; unknown labels are an error.
    DeviceSpec with_gate_voltage(std::string const& label, double volts) const
    {
        auto idx = find_gate(label);
        if (!idx) throw ValidationError("unknown gate label '" + label + "'");
        DeviceSpec out = *this;
        out.gates[*idx].voltage = volts;
        return out;
    }

    std::vector<double> gate_voltages() const
    {
        std::vector<double> v;
        v.reserve(gates.size());
        for (auto const& g : gates) v.push_back(g.voltage);
        return v;
    }

    friend bool operator==(DeviceSpec const&, DeviceSpec const&) = default;
};

//! What occupies a point: a dielectric, or a conductor (gate index set).
struct Medium
{
    Material material;
    std::optional<std::size_t> gate;

    bool is_conductor() const noexcept { return gate.has_value(); }
};

inline void validate(DeviceSpec const& spec)
{
    auto box_str = [](Box const& b) {
        auto f = [](Vec3 const& v) {
            return "(" + std::to_string(v[0]) + ", " + std::to_string(v[1]) + ", "
                   + std::to_string(v[2]) + ")";
        };
        return f(b.lo) + "-" + f(b.hi);
    };
    if (!spec.domain.ordered() || spec.domain.flat_axes() != 0)
    {
        throw ValidationError("domain box must have positive extent on every axis");
    }
    auto check_material = [](Material const& m, std::string const& where) {
        if (!(m.relative_permittivity > 0.0) || !std::isfinite(m.relative_permittivity))
        {
            throw ValidationError(where + ": relative permittivity must be positive");
        }
    };
    check_material(spec.background, "background material '" + spec.background.name + "'");
    for (auto const& m : spec.materials)
    {
        check_material(m, "material '" + m.name + "'");
    }
    for (auto const& r : spec.regions)
    {
        check_material(r.material, "region '" + r.name + "'");
        if (!r.box.ordered() || r.box.flat_axes() != 0)
        {
            throw ValidationError("region '" + r.name + "' must have positive volume");
        }
        if (!spec.domain.contains(r.box))
        {
            throw ValidationError("region '" + r.name + "' box " + box_str(r.box)
                                  + " lies outside the domain");
        }
    }
    std::set<std::string> labels;
    for (auto const& g : spec.gates)
    {
        if (g.label.empty()) throw ValidationError("gate label must not be empty");
        if (!labels.insert(g.label).second)
        {
            throw ValidationError("duplicate gate label '" + g.label + "'");
        }
        if (!g.box.ordered() || g.box.flat_axes() > 1)
        {
            throw ValidationError("gate '" + g.label
                                  + "' must be a solid box or a sheet flat along one axis");
        }
        if (!spec.domain.contains(g.box))
        {
            throw ValidationError("gate '" + g.label + "' box " + box_str(g.box)
                                  + " extends past the domain");
        }
        if (!std::isfinite(g.voltage))
        {
            throw ValidationError("gate '" + g.label + "' voltage must be finite");
        }
    }
    if (!std::isfinite(spec.base_voltage) || !std::isfinite(spec.neumann_flux))
    {
        throw ValidationError("base_voltage and neumann_flux must be finite");
    }
    if (spec.mesh)
    {
        for (int n : spec.mesh->nodes)
        {
            if (n < 2) throw ValidationError("mesh node targets must be >= 2 per axis");
        }
        if (auto const& zg = spec.mesh->z_grading)
        {
            if (!(zg->lo < zg->hi) || !(zg->ratio >= 1.0))
            {
                throw ValidationError("z_grading needs lo < hi and ratio >= 1");
            }
        }
    }
    auto check_point = [&](Vec3 const& p, char const* what) {
        if (!spec.domain.contains(p))
        {
            throw ValidationError(std::string("probe '") + what + "' lies outside the domain");
        }
    };
    if (spec.probes.idqd_center) check_point(*spec.probes.idqd_center, "idqd_center");
    for (auto const& p : spec.probes.dot_centers) check_point(p, "dot_centers");
}

/*!
 * Resolve the medium at a point.
 *
 * Gates are checked first (closed boxes); otherwise the last region whose
 * closed box contains the point wins, falling back to the background.
 */
inline Medium material_at(DeviceSpec const& spec, Vec3 const& point)
{
    if (!spec.domain.contains(point))
    {
        throw DomainError("point (" + std::to_string(point[0]) + ", " + std::to_string(point[1])
                          + ", " + std::to_string(point[2]) + ") is outside the device domain");
    }
    for (std::size_t g = 0; g < spec.gates.size(); ++g)
    {
        if (spec.gates[g].box.contains(point)) return {Material{spec.gates[g].label, 0.0}, g};
    }
    for (auto it = spec.regions.rbegin(); it != spec.regions.rend(); ++it)
    {
        if (it->box.contains(point)) return {it->material, std::nullopt};
    }
    return {spec.background, std::nullopt};
}

//---------------------------------------------------------------------------//
/*!
 * Rectangular approximation of a trench-isolated double quantum dot with a
 * capacitively coupled SET and four in-plane gates.
 *
 * Plan view (x right, y up), all Si features 150 nm tall on the buried oxide:
 *
 *        y=380 +-----------------------------------------------+
 *              |          lead                                 |
 *              |          |  |                    [G3]         |
 *              |   [G4]  [SET]     (dot 2)        [G2]         |
 *              |          |  |     (dot 1)        [G1]         |
 *              |          lead                                 |
 *        y=0   +-----------------------------------------------+
 *              x=0                x=320                    x=520
 *
 * The device is mirror symmetric about y = 190 nm with G1 <-> G3. The IDQD is
 * a 150 nm long oxide-clad pillar centred at (x, y) = (320, 190); its two Si
 * dots are joined by a 20 nm long, 20 nm wide constriction. The oxide cladding
 * meets the surrounding air at y = 115 and y = 265 on the line x = 320.
 *
 * Every footprint below is an estimate; only the 150 nm pillar height, the
 * 20 nm constriction, the probe coordinates and the two air/oxide crossings
 * are fixed by measurement.
 */
inline DeviceSpec canonical_idqd_device()
{
    constexpr double oxide_top = 345.0;
    constexpr double pillar_top = oxide_top + 150.0;
    constexpr double clad = 10.0;

    DeviceSpec s;
    s.domain = {{0.0, 0.0, 0.0}, {520.0, 380.0, 645.0}};
    s.background = materials::air();
    s.materials = {materials::air(), materials::silicon(), materials::silicon_dioxide()};

    auto si = materials::silicon();
    auto ox = materials::silicon_dioxide();
    auto pillar = [&](double x0, double x1, double y0, double y1) {
        return Box{{x0, y0, oxide_top}, {x1, y1, pillar_top}};
    };
    s.regions = {
        {"buried_oxide", {{0.0, 0.0, 0.0}, {520.0, 380.0, oxide_top}}, ox},
        {"idqd_cladding", {{270.0, 115.0, oxide_top}, {370.0, 265.0, pillar_top + clad}}, ox},
        {"dot_1", pillar(280.0, 360.0, 125.0, 180.0), si},
        {"constriction", pillar(310.0, 330.0, 180.0, 200.0), si},
        {"dot_2", pillar(280.0, 360.0, 200.0, 255.0), si},
        {"set_island", pillar(150.0, 230.0, 150.0, 230.0), si},
        {"set_source", pillar(170.0, 210.0, 0.0, 150.0), si},
        {"set_drain", pillar(170.0, 210.0, 230.0, 380.0), si},
    };
    s.gates = {
        {"G1", pillar(400.0, 460.0, 50.0, 110.0), 1.0},
        {"G2", pillar(400.0, 460.0, 160.0, 220.0), 2.0},
        {"G3", pillar(400.0, 460.0, 270.0, 330.0), -1.0},
        {"G4", pillar(40.0, 100.0, 160.0, 220.0), -4.8},
    };
    s.base_voltage = 0.0;
    s.neumann_flux = 0.0;
    s.mesh = MeshHints{{107, 77, 9}, ZGrading{oxide_top, pillar_top + clad, 2.0}};
    s.probes.idqd_center = Vec3{320.0, 190.0, 420.0};
    s.probes.dot_centers = {Vec3{320.0, 152.5, 420.0}, Vec3{320.0, 227.5, 420.0}};
    s.probes.line = LineProbe{Axis::y, {320.0, 420.0}};
    s.probes.slices = {PlaneProbe{Axis::z, 420.0}, PlaneProbe{Axis::y, 190.0}};
    return s;
}

}  // namespace idqd
