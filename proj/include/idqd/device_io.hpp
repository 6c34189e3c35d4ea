#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "geometry.hpp"

namespace idqd {

/*
 * Device config files are JSON documents:
 *
 *   {
 *     "domain":       {"min": [x, y, z], "max": [x, y, z]},
 *     "background":   "air",
 *     "materials":    [{"name": "air", "relative_permittivity": 1.0}, ...],
 *     "regions":      [{"name": "...", "material": "Si", "min": [...], "max": [...]}, ...],
 *     "gates":        [{"label": "G1", "min": [...], "max": [...], "voltage": 1.0}, ...],
 *     "base_voltage": 0.0,
 *     "neumann_flux": 0.0,
 *     "mesh":   {"nodes": [nx, ny, nz], "z_grading": {"min": z0, "max": z1, "ratio": r}},
 *     "probes": {"idqd_center": [...], "dot_centers": [[...], ...],
 *                "line": {"axis": "y", "at": [a, b]},
 *                "slices": [{"normal": "z", "offset": 420.0}, ...]}
 *   }
 *
 * Lengths in nm, voltages in V, flux in C/m^2. `mesh` and `probes` are optional.
 */

namespace detail {

using nlohmann::json;

class Reader
{
  public:
    explicit Reader(std::string path) : path_(std::move(path)) {}

    [[noreturn]] void fail(std::string const& msg) const { throw ParseError(msg, 0, path_); }

    Reader at(std::string const& key) const
    {
        return Reader(path_.empty() ? key : path_ + "." + key);
    }
    Reader at(std::size_t i) const { return Reader(path_ + "[" + std::to_string(i) + "]"); }

    json const& member(json const& obj, std::string const& key) const
    {
        if (!obj.is_object()) fail("expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) at(key).fail("missing required key");
        return *it;
    }

    double number(json const& v) const
    {
        if (!v.is_number()) fail("expected a number");
        return v.get<double>();
    }

    std::string string(json const& v) const
    {
        if (!v.is_string()) fail("expected a string");
        return v.get<std::string>();
    }

    json const& array(json const& v) const
    {
        if (!v.is_array()) fail("expected an array");
        return v;
    }

    Vec3 vec3(json const& v) const
    {
        if (!v.is_array() || v.size() != 3) fail("expected an array of 3 numbers");
        Vec3 out{};
        for (std::size_t i = 0; i < 3; ++i) out[i] = at(i).number(v[i]);
        return out;
    }

    Box box(json const& obj) const
    {
        return {at("min").vec3(member(obj, "min")), at("max").vec3(member(obj, "max"))};
    }

    Axis axis(json const& v) const
    {
        auto s = string(v);
        if (s.size() != 1 || s.find_first_of("xyz") != 0) fail("expected one of \"x\", \"y\", \"z\"");
        return axis_from_char(s[0]);
    }

  private:
    std::string path_;
};

inline std::size_t line_of_offset(std::string const& text, std::size_t byte)
{
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    {
        if (text[i] == '\n') ++line;
    }
    return line;
}

inline json vec_json(Vec3 const& v) { return json::array({v[0], v[1], v[2]}); }

inline json box_json(Box const& b)
{
    return {{"min", vec_json(b.lo)}, {"max", vec_json(b.hi)}};
}

}  // namespace detail

//! Parse and validate a device config document.
inline DeviceSpec parse_device(std::string const& text)
{
    using detail::json;
    using detail::Reader;

    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        throw ParseError(e.what(), detail::line_of_offset(text, e.byte), "");
    }

    Reader root("");
    if (!doc.is_object()) root.fail("top level must be an object");

    DeviceSpec spec;
    spec.domain = root.at("domain").box(root.member(doc, "domain"));

    std::map<std::string, Material> by_name;
    {
        auto r = root.at("materials");
        auto const& arr = r.array(root.member(doc, "materials"));
        for (std::size_t i = 0; i < arr.size(); ++i)
        {
            auto ri = r.at(i);
            Material m{ri.at("name").string(ri.member(arr[i], "name")),
                       ri.at("relative_permittivity")
                           .number(ri.member(arr[i], "relative_permittivity"))};
            if (!by_name.emplace(m.name, m).second) ri.at("name").fail("duplicate material name");
            spec.materials.push_back(m);
        }
    }
    auto lookup = [&](Reader const& r, json const& v) {
        auto name = r.string(v);
        auto it = by_name.find(name);
        if (it == by_name.end()) r.fail("unknown material '" + name + "'");
        return it->second;
    };
    spec.background = lookup(root.at("background"), root.member(doc, "background"));

    {
        auto r = root.at("regions");
        auto const& arr = r.array(root.member(doc, "regions"));
        for (std::size_t i = 0; i < arr.size(); ++i)
        {
            auto ri = r.at(i);
            Region reg;
            reg.name = arr[i].contains("name") ? ri.at("name").string(arr[i]["name"])
                                               : "region_" + std::to_string(i);
            reg.material = lookup(ri.at("material"), ri.member(arr[i], "material"));
            reg.box = ri.box(arr[i]);
            spec.regions.push_back(std::move(reg));
        }
    }
    {
        auto r = root.at("gates");
        auto const& arr = r.array(root.member(doc, "gates"));
        for (std::size_t i = 0; i < arr.size(); ++i)
        {
            auto ri = r.at(i);
            Gate g;
            g.label = ri.at("label").string(ri.member(arr[i], "label"));
            g.box = ri.box(arr[i]);
            g.voltage = ri.at("voltage").number(ri.member(arr[i], "voltage"));
            spec.gates.push_back(std::move(g));
        }
    }
    spec.base_voltage = root.at("base_voltage").number(root.member(doc, "base_voltage"));
    spec.neumann_flux = root.at("neumann_flux").number(root.member(doc, "neumann_flux"));

    if (doc.contains("mesh"))
    {
        auto r = root.at("mesh");
        auto const& m = doc["mesh"];
        MeshHints hints;
        auto const& nodes = r.member(m, "nodes");
        if (!nodes.is_array() || nodes.size() != 3) r.at("nodes").fail("expected 3 integers");
        for (std::size_t i = 0; i < 3; ++i)
        {
            if (!nodes[i].is_number_integer()) r.at("nodes").at(i).fail("expected an integer");
            hints.nodes[i] = nodes[i].get<int>();
        }
        if (m.contains("z_grading"))
        {
            auto rz = r.at("z_grading");
            auto const& z = m["z_grading"];
            hints.z_grading = ZGrading{rz.at("min").number(rz.member(z, "min")),
                                       rz.at("max").number(rz.member(z, "max")),
                                       rz.at("ratio").number(rz.member(z, "ratio"))};
        }
        spec.mesh = hints;
    }
    if (doc.contains("probes"))
    {
        auto r = root.at("probes");
        auto const& p = doc["probes"];
        if (p.contains("idqd_center"))
        {
            spec.probes.idqd_center = r.at("idqd_center").vec3(p["idqd_center"]);
        }
        if (p.contains("dot_centers"))
        {
            auto rd = r.at("dot_centers");
            auto const& arr = rd.array(p["dot_centers"]);
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                spec.probes.dot_centers.push_back(rd.at(i).vec3(arr[i]));
            }
        }
        if (p.contains("line"))
        {
            auto rl = r.at("line");
            auto const& l = p["line"];
            LineProbe lp;
            lp.axis = rl.at("axis").axis(rl.member(l, "axis"));
            auto const& at = rl.member(l, "at");
            if (!at.is_array() || at.size() != 2) rl.at("at").fail("expected 2 numbers");
            lp.fixed = {rl.at("at").at(0).number(at[0]), rl.at("at").at(1).number(at[1])};
            spec.probes.line = lp;
        }
        if (p.contains("slices"))
        {
            auto rs = r.at("slices");
            auto const& arr = rs.array(p["slices"]);
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                auto ri = rs.at(i);
                spec.probes.slices.push_back(
                    {ri.at("normal").axis(ri.member(arr[i], "normal")),
                     ri.at("offset").number(ri.member(arr[i], "offset"))});
            }
        }
    }

    validate(spec);
    return spec;
}

inline std::string serialize_device(DeviceSpec const& spec)
{
    using detail::box_json;
    using detail::json;
    using detail::vec_json;

    json doc = json::object();
    doc["domain"] = box_json(spec.domain);
    doc["background"] = spec.background.name;

    std::vector<Material> mats = spec.materials;
    auto ensure = [&](Material const& m) {
        for (auto const& k : mats)
        {
            if (k.name == m.name) return;
        }
        mats.push_back(m);
    };
    ensure(spec.background);
    for (auto const& r : spec.regions) ensure(r.material);

    json jm = json::array();
    for (auto const& m : mats)
    {
        jm.push_back({{"name", m.name}, {"relative_permittivity", m.relative_permittivity}});
    }
    doc["materials"] = jm;

    json jr = json::array();
    for (auto const& r : spec.regions)
    {
        json o = box_json(r.box);
        o["name"] = r.name;
        o["material"] = r.material.name;
        jr.push_back(o);
    }
    doc["regions"] = jr;

    json jg = json::array();
    for (auto const& g : spec.gates)
    {
        json o = box_json(g.box);
        o["label"] = g.label;
        o["voltage"] = g.voltage;
        jg.push_back(o);
    }
    doc["gates"] = jg;
    doc["base_voltage"] = spec.base_voltage;
    doc["neumann_flux"] = spec.neumann_flux;

    if (spec.mesh)
    {
        json m = {{"nodes", spec.mesh->nodes}};
        if (auto const& z = spec.mesh->z_grading)
        {
            m["z_grading"] = {{"min", z->lo}, {"max", z->hi}, {"ratio", z->ratio}};
        }
        doc["mesh"] = m;
    }
    if (!spec.probes.empty())
    {
        json p = json::object();
        if (spec.probes.idqd_center) p["idqd_center"] = vec_json(*spec.probes.idqd_center);
        if (!spec.probes.dot_centers.empty())
        {
            json d = json::array();
            for (auto const& c : spec.probes.dot_centers) d.push_back(vec_json(c));
            p["dot_centers"] = d;
        }
        if (auto const& l = spec.probes.line)
        {
            p["line"] = {{"axis", std::string(1, axis_name(l->axis))},
                         {"at", {l->fixed[0], l->fixed[1]}}};
        }
        if (!spec.probes.slices.empty())
        {
            json s = json::array();
            for (auto const& pl : spec.probes.slices)
            {
                s.push_back({{"normal", std::string(1, axis_name(pl.normal))}, {"offset", pl.offset}});
            }
            p["slices"] = s;
        }
        doc["probes"] = p;
    }
    return doc.dump(2) + "\n";
}

/*!
 * Load a device config from disk. A path without extension that does not
 * exist is retried with ".json" appended.
 */
inline DeviceSpec load_device_file(std::filesystem::path const& path)
{
    auto resolved = path;
    if (!std::filesystem::exists(resolved) && !resolved.has_extension())
    {
        resolved += ".json";
    }
    std::ifstream in(resolved);
    if (!in) throw ValidationError("cannot open device config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_device(ss.str());
}

}  // namespace idqd
