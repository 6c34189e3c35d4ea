#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "idqd/idqd.hpp"
#include "support.hpp"

using namespace idqd;

namespace {

std::string const kMinimalConfig = R"({
  "domain": {"min": [0, 0, 0], "max": [10, 10, 10]},
  "background": "air",
  "materials": [{"name": "air", "relative_permittivity": 1.0}],
  "regions": [],
  "gates": [{"label": "top", "min": [0, 0, 10], "max": [10, 10, 10], "voltage": 1.0}],
  "base_voltage": 0.0,
  "neumann_flux": 0.0
})";

std::string replace(std::string s, std::string const& from, std::string const& to)
{
    auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST(Material, AbsolutePermittivityUsesVacuumValue)
{
    EXPECT_DOUBLE_EQ(materials::silicon().absolute_permittivity(), 11.0 * 8.85e-12);
    EXPECT_DOUBLE_EQ(materials::silicon_dioxide().absolute_permittivity(), 4.5 * 8.85e-12);
    EXPECT_DOUBLE_EQ(materials::air().absolute_permittivity(), 8.85e-12);
}

TEST(Box, ClosedContainment)
{
    Box b{{0, 0, 0}, {1, 2, 3}};
    EXPECT_TRUE(b.contains(Vec3{0, 0, 0}));
    EXPECT_TRUE(b.contains(Vec3{1, 2, 3}));
    EXPECT_FALSE(b.contains(Vec3{1.0000001, 1, 1}));
    EXPECT_EQ(b.flat_axes(), 0);
    EXPECT_EQ((Box{{0, 0, 1}, {1, 1, 1}}.flat_axes()), 1);
}

TEST(ParseDevice, CanonicalFileMatchesBuiltIn)
{
    auto const spec = load_device_file(std::filesystem::path(IDQD_SOURCE_DIR) / "devices" / "idqd_canonical");
    EXPECT_EQ(spec, canonical_idqd_device());
    ASSERT_EQ(spec.gates.size(), 4u);
    EXPECT_EQ(spec.gates[0].label, "G1");
    EXPECT_EQ(spec.gates[3].label, "G4");
    std::size_t si = 0, ox = 0;
    for (auto const& r : spec.regions)
    {
        si += r.material.name == "Si";
        ox += r.material.name == "SiO2";
    }
    EXPECT_GE(si, 2u);
    EXPECT_GE(ox, 1u);
    EXPECT_EQ(spec.background.name, "air");
}

TEST(ParseDevice, EmptyRegionsIsAirOnly)
{
    auto const spec = parse_device(kMinimalConfig);
    EXPECT_TRUE(spec.regions.empty());
    ASSERT_EQ(spec.gates.size(), 1u);
    auto const m = material_at(spec, {5, 5, 5});
    EXPECT_EQ(m.material.name, "air");
    EXPECT_DOUBLE_EQ(m.material.relative_permittivity, 1.0);
}

TEST(ParseDevice, GatePastDomainIsValidationError)
{
    auto text = replace(kMinimalConfig, R"("max": [10, 10, 10], "voltage")", R"("max": [10, 10, 12], "voltage")");
    EXPECT_THROW(parse_device(text), ValidationError);
}

TEST(ParseDevice, RegionPastDomainIsValidationError)
{
    auto text = replace(kMinimalConfig, R"("regions": [])",
                        R"("regions": [{"name": "r", "material": "air", "min": [-1, 0, 0], "max": [1, 1, 1]}])");
    EXPECT_THROW(parse_device(text), ValidationError);
}

TEST(ParseDevice, DuplicateGateLabelIsValidationError)
{
    auto text = replace(kMinimalConfig, R"("gates": [)",
                        R"("gates": [{"label": "top", "min": [0, 0, 0], "max": [1, 1, 1], "voltage": 2.0}, )");
    EXPECT_THROW(parse_device(text), ValidationError);
}

TEST(ParseDevice, MissingKeyReportsField)
{
    auto text = replace(kMinimalConfig, R"("base_voltage": 0.0,)", "");
    try
    {
        parse_device(text);
        FAIL() << "expected ParseError";
    }
    catch (ParseError const& e)
    {
        EXPECT_EQ(e.field(), "base_voltage");
    }
}

TEST(ParseDevice, WrongTypeReportsNestedField)
{
    auto text = replace(kMinimalConfig, R"("voltage": 1.0)", R"("voltage": "high")");
    try
    {
        parse_device(text);
        FAIL() << "expected ParseError";
    }
    catch (ParseError const& e)
    {
        EXPECT_EQ(e.field(), "gates[0].voltage");
    }
}

TEST(ParseDevice, SyntaxErrorReportsLine)
{
    auto text = replace(kMinimalConfig, R"("regions": [],)", R"("regions": [,)");
    try
    {
        parse_device(text);
        FAIL() << "expected ParseError";
    }
    catch (ParseError const& e)
    {
        EXPECT_EQ(e.line(), 5u);
    }
}

TEST(ParseDevice, UnknownMaterialIsParseError)
{
    auto text = replace(kMinimalConfig, R"("background": "air")", R"("background": "vacuum")");
    EXPECT_THROW(parse_device(text), ParseError);
}

TEST(ParseDevice, NonPositivePermittivityIsValidationError)
{
    auto text = replace(kMinimalConfig, R"("relative_permittivity": 1.0)", R"("relative_permittivity": 0.0)");
    EXPECT_THROW(parse_device(text), ValidationError);
}

TEST(ParseDevice, RoundTripPreservesSpec)
{
    auto const canonical = canonical_idqd_device();
    EXPECT_EQ(parse_device(serialize_device(canonical)), canonical);
    auto const small = test::small_device(0.25, -3.5);
    EXPECT_EQ(parse_device(serialize_device(small)), small);
}

TEST(ParseDevice, MissingFileIsValidationError)
{
    EXPECT_THROW(load_device_file("/nonexistent/idqd_device"), ValidationError);
}

TEST(DeviceSpec, UnknownGateOverrideIsError)
{
    auto const spec = canonical_idqd_device();
    EXPECT_THROW((void)spec.with_gate_voltage("G9", 1.0), ValidationError);
    EXPECT_DOUBLE_EQ(spec.with_gate_voltage("G2", 5.0).gates[1].voltage, 5.0);
}

TEST(MaterialAt, CanonicalMaterials)
{
    auto const spec = canonical_idqd_device();
    auto const dot = material_at(spec, {320, 152.5, 420});
    EXPECT_EQ(dot.material.name, "Si");
    EXPECT_DOUBLE_EQ(dot.material.relative_permittivity, 11.0);
    auto const base = material_at(spec, {10, 10, 100});
    EXPECT_EQ(base.material.name, "SiO2");
    EXPECT_DOUBLE_EQ(base.material.relative_permittivity, 4.5);
    auto const air = material_at(spec, {500, 10, 600});
    EXPECT_EQ(air.material.name, "air");
    EXPECT_FALSE(air.is_conductor());
    auto const gate = material_at(spec, {430, 190, 420});
    ASSERT_TRUE(gate.is_conductor());
    EXPECT_EQ(spec.gates[*gate.gate].label, "G2");
}

TEST(MaterialAt, CladdingCrossesAirAt115And265)
{
    auto const spec = canonical_idqd_device();
    EXPECT_EQ(material_at(spec, {320, 114, 420}).material.name, "air");
    EXPECT_EQ(material_at(spec, {320, 116, 420}).material.name, "SiO2");
    EXPECT_EQ(material_at(spec, {320, 264, 420}).material.name, "SiO2");
    EXPECT_EQ(material_at(spec, {320, 266, 420}).material.name, "air");
}

TEST(MaterialAt, PaintersOrderLaterRegionWins)
{
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {10, 10, 10}};
    s.regions = {{"a", {{0, 0, 0}, {6, 10, 10}}, materials::silicon()},
                 {"b", {{4, 0, 0}, {10, 10, 10}}, materials::silicon_dioxide()}};
    validate(s);
    EXPECT_EQ(material_at(s, {2, 5, 5}).material.name, "Si");
    EXPECT_EQ(material_at(s, {5, 5, 5}).material.name, "SiO2");
    std::swap(s.regions[0], s.regions[1]);
    EXPECT_EQ(material_at(s, {5, 5, 5}).material.name, "Si");
}

TEST(MaterialAt, OutsideDomainIsDomainError)
{
    auto const spec = canonical_idqd_device();
    EXPECT_THROW(material_at(spec, {-1, 0, 0}), DomainError);
    EXPECT_THROW(material_at(spec, {0, 0, 700}), DomainError);
}

TEST(Canonical, MirrorSymmetricAboutY190)
{
    auto const spec = canonical_idqd_device();
    auto mirror = [](Box const& b) {
        return Box{{b.lo[0], 380.0 - b.hi[1], b.lo[2]}, {b.hi[0], 380.0 - b.lo[1], b.hi[2]}};
    };
    for (auto const& r : spec.regions)
    {
        auto const m = mirror(r.box);
        bool found = false;
        for (auto const& o : spec.regions) found = found || (o.box == m && o.material == r.material);
        EXPECT_TRUE(found) << r.name;
    }
    EXPECT_EQ(mirror(spec.gates[0].box), spec.gates[2].box);
    EXPECT_EQ(mirror(spec.gates[1].box), spec.gates[1].box);
    EXPECT_EQ(mirror(spec.gates[3].box), spec.gates[3].box);
}

TEST(Canonical, PillarsAre150nmTallWith20nmConstriction)
{
    auto const spec = canonical_idqd_device();
    for (auto const& r : spec.regions)
    {
        if (r.material.name == "Si")
        {
            EXPECT_DOUBLE_EQ(r.box.extent(2), 150.0) << r.name;
        }
        if (r.name == "constriction")
        {
            EXPECT_DOUBLE_EQ(r.box.extent(0), 20.0);
            EXPECT_DOUBLE_EQ(r.box.extent(1), 20.0);
        }
    }
    EXPECT_DOUBLE_EQ(spec.gates[1].box.center()[1], 190.0);
}
