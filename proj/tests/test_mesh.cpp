#include <random>
#include <set>

#include <gtest/gtest.h>

#include "idqd/idqd.hpp"
#include "support.hpp"

using namespace idqd;

namespace {

DeviceSpec unit_cube_top_gate(double volts = 1.0)
{
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {1, 1, 1}};
    s.gates = {{"top", {{0, 0, 1}, {1, 1, 1}}, volts}};
    return s;
}

Mesh const& canonical_mesh()
{
    static Mesh const mesh = build_mesh(canonical_idqd_device());
    return mesh;
}

bool on_axis(std::vector<double> const& c, double v)
{
    return std::binary_search(c.begin(), c.end(), v);
}

}  // namespace

TEST(BuildMesh, UnitCubeSmallestMesh)
{
    auto const mesh = build_mesh(unit_cube_top_gate());
    EXPECT_EQ(mesh.node_count(), 8u);
    EXPECT_EQ(mesh.element_count(), 1u);
    EXPECT_TRUE(mesh.element_active(0));
    auto const fixed = mesh.dirichlet_nodes();
    ASSERT_EQ(fixed.size(), 8u);
    int top = 0, base = 0;
    for (auto [n, v] : fixed)
    {
        if (mesh.node_position(n)[2] == 1.0)
        {
            EXPECT_EQ(v, 1.0);
            ++top;
        }
        else
        {
            EXPECT_EQ(v, 0.0);
            ++base;
        }
    }
    EXPECT_EQ(top, 4);
    EXPECT_EQ(base, 4);
    EXPECT_TRUE(mesh.neumann_faces().empty());
}

TEST(BuildMesh, CountsMatchAxisProducts)
{
    auto const& mesh = canonical_mesh();
    auto const nd = mesh.node_dims();
    EXPECT_EQ(mesh.node_count(), nd[0] * nd[1] * nd[2]);
    EXPECT_EQ(mesh.element_count(), (nd[0] - 1) * (nd[1] - 1) * (nd[2] - 1));
}

TEST(BuildMesh, CanonicalReachesTargetsAndAlignsInterfaces)
{
    auto const spec = canonical_idqd_device();
    auto const& mesh = canonical_mesh();
    auto const nd = mesh.node_dims();
    EXPECT_GE(nd[0], 107u);
    EXPECT_GE(nd[1], 77u);
    EXPECT_GE(nd[2], 9u);
    for (auto const& r : spec.regions)
        for (int d = 0; d < 3; ++d)
        {
            EXPECT_TRUE(on_axis(mesh.axes()[d], r.box.lo[d])) << r.name << " axis " << d;
            EXPECT_TRUE(on_axis(mesh.axes()[d], r.box.hi[d])) << r.name << " axis " << d;
        }
    for (auto const& g : spec.gates)
        for (int d = 0; d < 3; ++d)
        {
            EXPECT_TRUE(on_axis(mesh.axes()[d], g.box.lo[d])) << g.label;
            EXPECT_TRUE(on_axis(mesh.axes()[d], g.box.hi[d])) << g.label;
        }
    EXPECT_TRUE(on_axis(mesh.axes()[0], 320.0));
    EXPECT_TRUE(on_axis(mesh.axes()[1], 190.0));
    EXPECT_TRUE(on_axis(mesh.axes()[2], 420.0));
}

TEST(BuildMesh, AxesStrictlyIncreasing)
{
    auto const& mesh = canonical_mesh();
    for (int d = 0; d < 3; ++d)
    {
        auto const& c = mesh.axes()[d];
        for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c[i - 1], c[i]);
    }
}

TEST(BuildMesh, ZGradingRefinesActiveBand)
{
    auto const& z = canonical_mesh().axes()[2];
    double band_max = 0.0, outside_min = 1e9;
    for (std::size_t i = 1; i < z.size(); ++i)
    {
        double const h = z[i] - z[i - 1], mid = 0.5 * (z[i] + z[i - 1]);
        if (mid > 345.0 && mid < 505.0)
            band_max = std::max(band_max, h);
        else
            outside_min = std::min(outside_min, h);
    }
    EXPECT_LT(band_max, outside_min);
}

TEST(BuildMesh, RefinementIsMonotone)
{
    auto spec = canonical_idqd_device();
    auto opts = MeshOptions::from_spec(spec);
    auto const coarse = build_mesh(spec, opts);
    for (auto& n : opts.nodes) n *= 2;
    auto const fine = build_mesh(spec, opts);
    for (int d = 0; d < 3; ++d)
    {
        EXPECT_GT(fine.axes()[d].size(), coarse.axes()[d].size());
        EXPECT_GE(fine.node_dims()[d], static_cast<std::size_t>(opts.nodes[d]));
    }
}

TEST(BuildMesh, ElementsNeverStraddleLayers)
{
    LayeredCapacitor const cap;
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {cap.width, cap.width, cap.length}};
    s.regions = {{"lower", {{0, 0, 0}, {cap.width, cap.width, cap.interface}}, materials::silicon_dioxide()},
                 {"upper", {{0, 0, cap.interface}, {cap.width, cap.width, cap.length}}, materials::silicon()}};
    s.gates = {{"plate", {{0, 0, cap.length}, {cap.width, cap.width, cap.length}}, 1.0}};
    s.mesh = MeshHints{{4, 4, 8}, std::nullopt};
    auto const mesh = build_mesh(s);
    auto const rule = gauss_rule_3d(2);
    for (Index e = 0; e < mesh.element_count(); ++e)
    {
        auto const x = mesh.element_coords(e);
        for (auto const& q : rule.points)
        {
            auto const m = material_at(s, map_to_physical(x, q));
            EXPECT_EQ(m.material.relative_permittivity, mesh.element_permittivity(e)) << "element " << e;
        }
    }
}

TEST(BuildMesh, GateInteriorsAreDeactivated)
{
    auto const spec = canonical_idqd_device();
    auto const& mesh = canonical_mesh();
    for (Index e = 0; e < mesh.element_count(); ++e)
    {
        auto const m = material_at(spec, mesh.element_box(e).center());
        EXPECT_EQ(mesh.element_active(e), !m.is_conductor());
        if (mesh.element_active(e))
        {
            EXPECT_EQ(mesh.element_permittivity(e), m.material.relative_permittivity);
        }
    }
}

TEST(BuildMesh, GateAndBaseNodesOfActiveElementsAreDirichlet)
{
    auto const spec = canonical_idqd_device();
    auto const& mesh = canonical_mesh();
    auto const fixed = mesh.dirichlet_nodes();
    for (Index e = 0; e < mesh.element_count(); ++e)
    {
        if (!mesh.element_active(e)) continue;
        for (Index n : mesh.element_nodes(e))
        {
            auto const p = mesh.node_position(n);
            if (p[2] == spec.domain.lo[2])
            {
                ASSERT_TRUE(fixed.contains(n));
                EXPECT_EQ(fixed.at(n), spec.base_voltage);
            }
            for (auto const& g : spec.gates)
            {
                if (!g.box.contains(p)) continue;
                ASSERT_TRUE(fixed.contains(n));
                EXPECT_EQ(fixed.at(n), g.voltage);
            }
        }
    }
}

TEST(BuildMesh, NodeKindsPartitionNodes)
{
    auto const& mesh = canonical_mesh();
    EXPECT_EQ(mesh.count_nodes(NodeKind::free) + mesh.count_nodes(NodeKind::dirichlet)
                  + mesh.count_nodes(NodeKind::conductor),
              mesh.node_count());
    EXPECT_GT(mesh.count_nodes(NodeKind::conductor), 0u);
    EXPECT_EQ(mesh.dirichlet_nodes().size(), mesh.count_nodes(NodeKind::dirichlet));
}

TEST(BuildMesh, NeumannFacesAreExteriorAndNotFullyPrescribed)
{
    auto const& mesh = canonical_mesh();
    ASSERT_FALSE(mesh.neumann_faces().empty());
    auto const ed = mesh.element_dims();
    std::set<std::pair<Index, int>> seen;
    for (auto const& f : mesh.neumann_faces())
    {
        EXPECT_TRUE(mesh.element_active(f.element));
        EXPECT_TRUE(seen.insert({f.element, f.face}).second);
        auto const nodes = mesh.element_nodes(f.element);
        bool any_free = false;
        for (int v : kFaceNodes[f.face]) any_free = any_free || mesh.node_kind(nodes[v]) == NodeKind::free;
        EXPECT_TRUE(any_free);
        int const d = f.face / 2;
        auto ijk = mesh.element_ijk(f.element);
        bool const upper = f.face % 2 == 1;
        bool const boundary = upper ? ijk[d] + 1 == ed[d] : ijk[d] == 0;
        if (!boundary)
        {
            ijk[d] = upper ? ijk[d] + 1 : ijk[d] - 1;
            EXPECT_FALSE(mesh.element_active(mesh.element_id(ijk[0], ijk[1], ijk[2])));
        }
        EXPECT_GT(f.area, 0.0);
    }
}

TEST(BuildMesh, ConflictingVoltagesAtSharedNodeIsError)
{
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {10, 10, 10}};
    s.gates = {{"a", {{2, 2, 2}, {5, 8, 8}}, 1.0}, {"b", {{5, 2, 2}, {8, 8, 8}}, 2.0}};
    EXPECT_THROW(build_mesh(s), MeshError);
    s.gates[1].voltage = 1.0;
    auto const mesh = build_mesh(s);
    auto v = mesh.source_voltages();
    EXPECT_NO_THROW(mesh.constraints_for(v));
    v[2] = 3.0;
    EXPECT_THROW(mesh.constraints_for(v), MeshError);
}

TEST(BuildMesh, GateTouchingBaseAtDifferentVoltageIsError)
{
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {10, 10, 10}};
    s.gates = {{"a", {{2, 2, 0}, {5, 8, 3}}, 1.0}};
    EXPECT_THROW(build_mesh(s), MeshError);
}

TEST(BuildMesh, ThinBoxWarnsAndKeepsFaces)
{
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {100, 100, 100}};
    s.regions = {{"film", {{0, 0, 50}, {100, 100, 50.5}}, materials::silicon_dioxide()}};
    s.mesh = MeshHints{{5, 5, 5}, std::nullopt};
    auto const mesh = build_mesh(s);
    EXPECT_FALSE(mesh.warnings().empty());
    EXPECT_TRUE(on_axis(mesh.axes()[2], 50.0));
    EXPECT_TRUE(on_axis(mesh.axes()[2], 50.5));
}

TEST(MakeAxis, KeepsMandatoryAndReachesTarget)
{
    auto const c = make_axis(0.0, 10.0, {3.3, 7.1}, 20);
    EXPECT_GE(c.size(), 20u);
    EXPECT_TRUE(on_axis(c, 3.3));
    EXPECT_TRUE(on_axis(c, 7.1));
    EXPECT_EQ(c.front(), 0.0);
    EXPECT_EQ(c.back(), 10.0);
}

TEST(LocateElement, NodeMapsToCorner)
{
    auto const& mesh = canonical_mesh();
    auto const p = mesh.node_position(mesh.node_id(10, 10, 1));
    auto const loc = mesh.locate_element(p);
    for (int d = 0; d < 3; ++d) EXPECT_EQ(std::abs(loc.local[d]), 1.0);
    auto const q = map_to_physical(mesh.element_coords(loc.element), loc.local);
    for (int d = 0; d < 3; ++d) EXPECT_DOUBLE_EQ(q[d], p[d]);
}

TEST(LocateElement, CenterMapsToOrigin)
{
    auto const& mesh = canonical_mesh();
    for (Index e : {Index{0}, Index{1234}, mesh.element_count() - 1})
    {
        if (!mesh.element_active(e)) continue;
        auto const loc = mesh.locate_element(mesh.element_box(e).center());
        EXPECT_EQ(loc.element, e);
        for (int d = 0; d < 3; ++d) EXPECT_NEAR(loc.local[d], 0.0, 1e-12);
    }
}

TEST(LocateElement, RandomPointsRoundTrip)
{
    auto const& mesh = canonical_mesh();
    auto const spec = canonical_idqd_device();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0, 520), uy(0, 380), uz(0, 645);
    int checked = 0;
    while (checked < 500)
    {
        Vec3 const p{ux(rng), uy(rng), uz(rng)};
        if (material_at(spec, p).is_conductor()) continue;
        auto const loc = mesh.locate_element(p);
        for (int d = 0; d < 3; ++d) EXPECT_LE(std::abs(loc.local[d]), 1.0 + 1e-12);
        auto const q = map_to_physical(mesh.element_coords(loc.element), loc.local);
        for (int d = 0; d < 3; ++d) EXPECT_LE(std::abs(q[d] - p[d]), 1e-12 * std::max(1.0, std::abs(p[d])));
        ++checked;
    }
}

TEST(LocateElement, ErrorsInsideGateAndOutsideDomain)
{
    auto const& mesh = canonical_mesh();
    EXPECT_THROW(mesh.locate_element({430, 190, 420}), DomainError);
    EXPECT_THROW(mesh.locate_element({-1, 190, 420}), DomainError);
    EXPECT_THROW(mesh.locate_element({320, 190, 646}), DomainError);
}
