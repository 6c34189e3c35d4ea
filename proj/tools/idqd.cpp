// Command-line driver for the IDQD electrostatics solver.
//
//   idqd solve CONFIG [--gate G2=2 ...] [--out DIR] [--dry-run] [--dump-system]
//   idqd sweep CONFIG --sweep-gate G2 --from -5 --to 5 --steps 11 [--mirror G3]
//   idqd probe CONFIG [--axis y --at 320,420] [--uniform N] [--with-field]
//   idqd slice CONFIG [--plane z=420] [--res 200,150]
//   idqd convergence --case quadratic-harmonic --levels 4
//   idqd mesh-info CONFIG [--vtk]
//
// Exit codes: 0 success, 1 solver non-convergence, 2 usage or config error.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "idqd/idqd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace idqd;

namespace {

constexpr char const* kVersion = "1.0.0";
constexpr char const* kOutputEnv = "IDQD_OUTPUT_DIR";

enum ExitCode : int
{
    kOk = 0,
    kNotConverged = 1,
    kUsage = 2,
};

std::string sha256_hex(std::string const& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string utc_timestamp()
{
    auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<double> parse_list(std::string const& text, std::size_t expected, char const* what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(item, &used);
        }
        catch (std::exception const&)
        {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ValidationError(std::string("bad number in ") + what);
        out.push_back(v);
    }
    if (out.size() != expected)
    {
        throw ValidationError(std::string(what) + " needs " + std::to_string(expected) + " comma-separated values");
    }
    return out;
}

//! Options shared by every device subcommand.
struct DeviceArgs
{
    std::string config;
    std::vector<std::string> gates;
    std::string out_dir;
    std::string nodes;
    double tol = 1e-8;
    std::size_t max_iter = 0;
    unsigned threads = 1;
    std::string assembly_mode = "strict";
    bool no_precond = false;

    void attach(CLI::App* app)
    {
        app->add_option("config", config, "Device config (JSON)")->required();
        app->add_option("--gate", gates, "Override a gate voltage, LABEL=VOLTS (repeatable)");
        app->add_option("--out", out_dir, std::string("Output directory (default $") + kOutputEnv + " or ./out)");
        app->add_option("--nodes", nodes, "Target node counts NX,NY,NZ");
        app->add_option("--tol", tol, "Relative residual tolerance")->check(CLI::Range(1e-16, 0.999));
        app->add_option("--max-iter", max_iter, "CG iteration cap (default ceil(10 sqrt(n)))");
        app->add_option("--threads", threads, "Assembly and mat-vec threads")->check(CLI::PositiveNumber);
        app->add_option("--assembly-mode", assembly_mode,
                        "strict: bitwise identical for any thread count; threaded: per-thread buffers")
            ->check(CLI::IsMember({"strict", "threaded"}));
        app->add_flag("--no-precond", no_precond, "Plain CG without ILU(0)");
    }

    fs::path output_dir() const
    {
        if (!out_dir.empty()) return out_dir;
        if (char const* env = std::getenv(kOutputEnv); env && *env) return env;
        return "out";
    }

    DeviceSpec load() const
    {
        auto spec = load_device_file(config);
        for (auto const& g : gates)
        {
            auto const eq = g.find('=');
            if (eq == std::string::npos || eq == 0) throw ValidationError("--gate expects LABEL=VOLTS, got '" + g + "'");
            auto const label = g.substr(0, eq);
            auto const value = parse_list(g.substr(eq + 1), 1, "--gate");
            spec = spec.with_gate_voltage(label, value[0]);
        }
        return spec;
    }

    MeshOptions mesh_options(DeviceSpec const& spec) const
    {
        auto m = MeshOptions::from_spec(spec);
        if (!nodes.empty())
        {
            auto v = parse_list(nodes, 3, "--nodes");
            for (int d = 0; d < 3; ++d)
            {
                if (v[d] < 2 || v[d] != std::floor(v[d])) throw ValidationError("--nodes values must be integers >= 2");
                m.nodes[d] = static_cast<int>(v[d]);
            }
        }
        return m;
    }

    AssemblyOptions assembly_options() const
    {
        AssemblyOptions a;
        a.threads = threads;
        a.strict = assembly_mode == "strict";
        return a;
    }

    SolverOptions solver_options() const
    {
        SolverOptions s;
        s.tolerance = tol;
        if (max_iter > 0) s.max_iter = max_iter;
        s.preconditioner = no_precond ? Preconditioner::none : Preconditioner::ilu0;
        s.threads = threads;
        return s;
    }
};

//! Collects output files and writes manifest.json.
class Manifest
{
  public:
    Manifest(fs::path dir, DeviceSpec const& spec, std::string command)
        : dir_(std::move(dir)), hash_(sha256_hex(serialize_device(spec))), command_(std::move(command))
    {
        fs::create_directories(dir_);
        doc_["artifact_version"] = kVersion;
        doc_["command"] = command_;
        doc_["config_hash"] = hash_;
        json gv = json::object();
        for (auto const& g : spec.gates) gv[g.label] = g.voltage;
        doc_["gate_voltages"] = gv;
        doc_["base_voltage"] = spec.base_voltage;
    }

    std::string const& hash() const { return hash_; }
    std::string tag() const { return "config_hash=" + hash_; }
    json& doc() { return doc_; }

    //! Open an output file and record it.
    std::ofstream open(std::string const& name)
    {
        auto const path = dir_ / name;
        std::ofstream os(path);
        if (!os) throw ValidationError("cannot write '" + path.string() + "'");
        outputs_.push_back(path.string());
        return os;
    }

    void set_mesh(Mesh const& mesh)
    {
        auto const nd = mesh.node_dims();
        doc_["mesh"] = {{"nodes", {nd[0], nd[1], nd[2]}},
                        {"node_count", mesh.node_count()},
                        {"element_count", mesh.element_count()},
                        {"active_elements", mesh.active_element_count()},
                        {"dirichlet_nodes", mesh.count_nodes(NodeKind::dirichlet)},
                        {"conductor_nodes", mesh.count_nodes(NodeKind::conductor)},
                        {"free_nodes", mesh.count_nodes(NodeKind::free)},
                        {"neumann_faces", mesh.neumann_faces().size()}};
    }

    static json report_json(SolveReport const& r)
    {
        return {{"iterations", r.iterations},
                {"final_relative_residual", r.final_relative_residual},
                {"converged", r.converged},
                {"wall_time", r.wall_time},
                {"preconditioner", r.preconditioner},
                {"warnings", r.warnings}};
    }

    void write()
    {
        doc_["outputs"] = outputs_;
        doc_["timestamp"] = utc_timestamp();
        std::ofstream os(dir_ / "manifest.json");
        os << doc_.dump(2) << "\n";
        std::cout << "manifest: " << (dir_ / "manifest.json").string() << "\n";
    }

  private:
    fs::path dir_;
    std::string hash_;
    std::string command_;
    json doc_;
    std::vector<std::string> outputs_;
};

std::string slug(double v)
{
    auto s = format_real(v);
    std::replace(s.begin(), s.end(), '-', 'm');
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

void print_mesh_stats(Mesh const& mesh)
{
    auto const nd = mesh.node_dims();
    std::cout << "nodes:           " << nd[0] << " x " << nd[1] << " x " << nd[2] << " = " << mesh.node_count() << "\n"
              << "elements:        " << mesh.element_count() << " (" << mesh.active_element_count() << " active)\n"
              << "dirichlet nodes: " << mesh.count_nodes(NodeKind::dirichlet) << "\n"
              << "conductor nodes: " << mesh.count_nodes(NodeKind::conductor) << "\n"
              << "free nodes:      " << mesh.count_nodes(NodeKind::free) << "\n"
              << "neumann faces:   " << mesh.neumann_faces().size() << "\n";
    for (auto const& w : mesh.warnings()) std::cerr << "warning: " << w << "\n";
}

void print_report(SolveReport const& r)
{
    std::cout << "solver: " << r.preconditioner << " CG, " << r.iterations << " iterations, relative residual "
              << r.final_relative_residual << (r.converged ? " (converged)" : " (NOT converged)") << ", "
              << r.wall_time << " s\n";
    for (auto const& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

//---------------------------------------------------------------------------//

int cmd_solve(DeviceArgs const& args, bool dry_run, bool dump_system)
{
    auto const spec = args.load();
    auto const mopts = args.mesh_options(spec);
    if (dry_run)
    {
        print_mesh_stats(build_mesh(spec, mopts));
        return kOk;
    }
    DeviceSolver solver(spec, mopts, args.assembly_options(), args.solver_options());
    auto const& mesh = *solver.mesh();
    print_mesh_stats(mesh);
    auto const sol = solver.solve();
    print_report(sol.report);

    Manifest man(args.output_dir(), spec, "solve");
    man.set_mesh(mesh);
    man.doc()["solver"] = Manifest::report_json(sol.report);
    std::string const title = "idqd " + man.tag();
    {
        auto os = man.open("field.vtk");
        write_field_vtk(os, sol.field, title);
    }
    for (auto const& pl : spec.probes.slices)
    {
        auto const slice = plane_slice(sol.field, pl);
        std::string const base = std::string("slice_") + axis_name(pl.normal) + slug(pl.offset);
        {
            auto os = man.open(base + ".csv");
            write_probe_csv(os, slice, man.tag() + " " + slice.description);
        }
        auto os = man.open(base + ".vtk");
        write_slice_vtk(os, slice, title + " " + slice.description);
    }
    if (auto const& line = spec.probes.line)
    {
        auto const probe = line_probe(sol.field, line->axis, line->fixed, SampleMode::nodal, 0, true);
        auto os = man.open(std::string("line_") + axis_name(line->axis) + ".csv");
        write_probe_csv(os, probe, man.tag() + " " + probe.description);
    }
    if (dump_system)
    {
        {
            auto os = man.open("K.mtx");
            write_matrix_market(os, solver.system().K, man.tag() + " reduced stiffness matrix");
        }
        auto os = man.open("F.mtx");
        auto const F = reduced_rhs(solver.global_system(), solver.system(), mesh.constraints());
        write_matrix_market(os, std::span<double const>(F), man.tag() + " reduced load vector");
    }
    man.write();
    return sol.report.converged ? kOk : kNotConverged;
}

struct SweepArgs
{
    std::string gate;
    double from = 0.0;
    double to = 0.0;
    int steps = 11;
    std::string probe;
    std::string mirror;
    unsigned jobs = 1;
};

int cmd_sweep(DeviceArgs const& args, SweepArgs const& sw)
{
    if (sw.steps < 2) throw ValidationError("--steps must be >= 2");
    if (sw.from == sw.to) throw ValidationError("sweep range is empty (--from equals --to)");
    auto const spec = args.load();
    Vec3 probe{};
    if (!sw.probe.empty())
    {
        auto v = parse_list(sw.probe, 3, "--probe");
        probe = {v[0], v[1], v[2]};
    }
    else if (spec.probes.idqd_center)
    {
        probe = *spec.probes.idqd_center;
    }
    else
    {
        throw ValidationError("no --probe given and the config has no probes.idqd_center");
    }
    bool const mirrored = !sw.mirror.empty();
    if (mirrored && spec.probes.dot_centers.size() != 2)
    {
        throw ValidationError("mirrored sweeps need two probes.dot_centers in the config");
    }

    DeviceSolver solver(spec, args.mesh_options(spec), args.assembly_options(), args.solver_options());
    auto const gi = solver.source_index(sw.gate);
    std::size_t mi = 0;
    if (mirrored) mi = solver.source_index(sw.mirror);

    std::size_t const n = static_cast<std::size_t>(sw.steps);
    std::vector<double> volts(n), phi(n), grad(n), emax(n);
    std::vector<SolveReport> reports(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        volts[i] = sw.from + (sw.to - sw.from) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    auto run = [&](std::size_t i) {
        auto v = source_voltages(spec);
        v[gi] = volts[i];
        if (mirrored) v[mi] = -volts[i];
        auto const sol = solver.solve_sources(v);
        reports[i] = sol.report;
        phi[i] = eval_potential(sol.field, probe);
        if (mirrored)
        {
            auto const g = idqd_gradient(sol.field, spec.probes.dot_centers[0], spec.probes.dot_centers[1]);
            grad[i] = g.mean_gradient;
            emax[i] = g.max_field_component;
        }
    };
    unsigned const jobs = std::max(1u, std::min<unsigned>(sw.jobs, static_cast<unsigned>(n)));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t)
        {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < n; i += jobs) run(i);
            });
        }
    }

    // Least-squares line through (V, phi); a linear problem must be affine.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sx += volts[i];
        sy += phi[i];
        sxx += volts[i] * volts[i];
        sxy += volts[i] * phi[i];
    }
    double const dn = static_cast<double>(n);
    double const slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    double const intercept = (sy - slope * sx) / dn;
    double deviation = 0.0;
    for (std::size_t i = 0; i < n; ++i) deviation = std::max(deviation, std::abs(phi[i] - (intercept + slope * volts[i])));
    bool const affine = deviation <= 1e-6;
    bool const converged = std::all_of(reports.begin(), reports.end(), [](auto const& r) { return r.converged; });

    Manifest man(args.output_dir(), spec, "sweep");
    man.set_mesh(*solver.mesh());
    auto os = man.open("sweep_" + sw.gate + (mirrored ? "_mirror_" + sw.mirror : "") + ".csv");
    os << "# " << man.tag() << " sweep " << sw.gate << (mirrored ? " with " + sw.mirror + " = -" + sw.gate : "")
       << " probe " << format_real(probe[0]) << "," << format_real(probe[1]) << "," << format_real(probe[2]) << "\n";
    os << "gate_V" << (mirrored ? ",mirror_V" : "") << ",phi_V" << (mirrored ? ",gradient_V_per_nm,max_field_V_per_nm" : "")
       << "\n";
    for (std::size_t i = 0; i < n; ++i)
    {
        os << format_real(volts[i]);
        if (mirrored) os << ',' << format_real(-volts[i]);
        os << ',' << format_real(phi[i]);
        if (mirrored) os << ',' << format_real(grad[i]) << ',' << format_real(emax[i]);
        os << "\n";
    }
    os << "# slope=" << format_real(slope) << " intercept=" << format_real(intercept)
       << " max_affine_deviation=" << format_real(deviation) << "\n";
    os.close();

    std::vector<json> rj;
    for (auto const& r : reports) rj.push_back(Manifest::report_json(r));
    man.doc()["solver"] = rj;
    man.doc()["sweep"] = {{"gate", sw.gate}, {"mirror", sw.mirror}, {"from", sw.from}, {"to", sw.to},
                          {"steps", sw.steps}, {"probe", probe}, {"slope", slope}, {"intercept", intercept},
                          {"max_affine_deviation", deviation}, {"affine", affine}};
    man.write();

    std::cout << "probe potential " << format_real(phi.front()) << " V .. " << format_real(phi.back()) << " V\n"
              << "coupling factor (fitted slope): " << format_real(slope) << "\n"
              << "max deviation from affine fit: " << format_real(deviation) << " V"
              << (affine ? "" : "  (NOT affine)") << "\n";
    if (mirrored)
    {
        std::cout << "IDQD gradient at endpoints: " << format_real(grad.front()) << " .. " << format_real(grad.back())
                  << " V/nm\n";
    }
    return converged && affine ? kOk : kNotConverged;
}

int cmd_probe(DeviceArgs const& args, std::string const& axis, std::string const& at, std::size_t uniform,
              bool with_field)
{
    auto const spec = args.load();
    LineProbe line;
    if (spec.probes.line) line = *spec.probes.line;
    if (!axis.empty()) line.axis = axis_from_char(axis.at(0));
    if (!at.empty())
    {
        auto v = parse_list(at, 2, "--at");
        line.fixed = {v[0], v[1]};
    }
    else if (!spec.probes.line)
    {
        throw ValidationError("no --at given and the config has no probes.line");
    }
    DeviceSolver solver(spec, args.mesh_options(spec), args.assembly_options(), args.solver_options());
    auto const sol = solver.solve();
    print_report(sol.report);
    auto const probe = line_probe(sol.field, line.axis, line.fixed, uniform ? SampleMode::uniform : SampleMode::nodal,
                                  uniform, with_field);
    Manifest man(args.output_dir(), spec, "probe");
    man.set_mesh(*solver.mesh());
    man.doc()["solver"] = Manifest::report_json(sol.report);
    {
        auto os = man.open(std::string("line_") + axis_name(line.axis) + "_" + slug(line.fixed[0]) + "_"
                           + slug(line.fixed[1]) + ".csv");
        write_probe_csv(os, probe, man.tag() + " " + probe.description);
    }
    man.write();
    return sol.report.converged ? kOk : kNotConverged;
}

int cmd_slice(DeviceArgs const& args, std::string const& plane_text, std::string const& res)
{
    auto const spec = args.load();
    std::vector<PlaneProbe> planes = spec.probes.slices;
    if (!plane_text.empty())
    {
        auto const eq = plane_text.find('=');
        if (eq != 1) throw ValidationError("--plane expects AXIS=OFFSET, e.g. z=420");
        planes = {PlaneProbe{axis_from_char(plane_text[0]), parse_list(plane_text.substr(2), 1, "--plane")[0]}};
    }
    if (planes.empty()) throw ValidationError("no --plane given and the config has no probes.slices");
    std::array<std::size_t, 2> resolution{0, 0};
    if (!res.empty())
    {
        auto v = parse_list(res, 2, "--res");
        resolution = {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1])};
    }
    DeviceSolver solver(spec, args.mesh_options(spec), args.assembly_options(), args.solver_options());
    auto const sol = solver.solve();
    print_report(sol.report);
    Manifest man(args.output_dir(), spec, "slice");
    man.set_mesh(*solver.mesh());
    man.doc()["solver"] = Manifest::report_json(sol.report);
    for (auto const& pl : planes)
    {
        auto const slice = plane_slice(sol.field, pl, resolution);
        std::string const base = std::string("slice_") + axis_name(pl.normal) + slug(pl.offset);
        {
            auto os = man.open(base + ".csv");
            write_probe_csv(os, slice, man.tag() + " " + slice.description);
        }
        auto os = man.open(base + ".vtk");
        write_slice_vtk(os, slice, "idqd " + man.tag() + " " + slice.description);
    }
    man.write();
    return sol.report.converged ? kOk : kNotConverged;
}

int cmd_convergence(std::string const& name, int levels, std::size_t coarsest)
{
    auto const rep = run_convergence(manufactured_case_from(name), levels, coarsest);
    std::cout << "case: " << name << "\n";
    std::cout << std::setw(8) << "cells" << std::setw(16) << "h" << std::setw(24) << "L2 error" << std::setw(24)
              << "max nodal error" << std::setw(8) << "iters" << "\n";
    for (auto const& l : rep.levels)
    {
        std::cout << std::setw(8) << l.cells << std::setw(16) << format_real(l.h) << std::setw(24)
                  << format_real(l.l2_error) << std::setw(24) << format_real(l.max_nodal_error) << std::setw(8)
                  << l.report.iterations << "\n";
    }
    if (rep.exact)
    {
        std::cout << "order: exact (errors at the solver floor on every level)\n";
    }
    else
    {
        std::cout << "order: " << format_real(rep.order) << "\n";
        if (!rep.monotone) std::cout << "warning: error does not decrease monotonically with h\n";
    }
    bool const converged = std::all_of(rep.levels.begin(), rep.levels.end(), [](auto const& l) { return l.report.converged; });
    return converged ? kOk : kNotConverged;
}

int cmd_mesh_info(DeviceArgs const& args, bool vtk)
{
    auto const spec = args.load();
    auto const mesh = build_mesh(spec, args.mesh_options(spec));
    print_mesh_stats(mesh);
    for (int d = 0; d < 3; ++d)
    {
        auto const& c = mesh.axes()[d];
        double hmin = 1e300, hmax = 0.0;
        for (std::size_t i = 1; i < c.size(); ++i)
        {
            hmin = std::min(hmin, c[i] - c[i - 1]);
            hmax = std::max(hmax, c[i] - c[i - 1]);
        }
        std::cout << axis_name(static_cast<Axis>(d)) << " spacing:       " << hmin << " .. " << hmax << " nm\n";
    }
    if (vtk)
    {
        Manifest man(args.output_dir(), spec, "mesh-info");
        man.set_mesh(mesh);
        {
            auto os = man.open("mesh.vtk");
            write_mesh_vtk(os, mesh, "idqd " + man.tag() + " mesh");
        }
        man.write();
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Finite-element electrostatics for trench-isolated double quantum dot devices"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DeviceArgs solve_args, sweep_args, probe_args, slice_args, info_args;

    auto* solve = app.add_subcommand("solve", "Solve one configuration and write fields, slices and the line probe");
    solve_args.attach(solve);
    bool dry_run = false, dump_system = false;
    solve->add_flag("--dry-run", dry_run, "Print mesh statistics only");
    solve->add_flag("--dump-system", dump_system, "Also write the reduced K and F in Matrix Market form");

    auto* sweep = app.add_subcommand("sweep", "Sweep one gate voltage and record the probe potential");
    sweep_args.attach(sweep);
    SweepArgs sw;
    sweep->add_option("--sweep-gate", sw.gate, "Gate to sweep")->required();
    sweep->add_option("--from", sw.from, "Start voltage")->required();
    sweep->add_option("--to", sw.to, "End voltage")->required();
    sweep->add_option("--steps", sw.steps, "Number of voltages (>= 2)");
    sweep->add_option("--probe", sw.probe, "Probe point X,Y,Z in nm (default probes.idqd_center)");
    sweep->add_option("--mirror", sw.mirror, "Hold this gate at minus the swept voltage");
    sweep->add_option("--jobs", sw.jobs, "Concurrent solves")->check(CLI::PositiveNumber);

    auto* probe = app.add_subcommand("probe", "Sample the potential along a line");
    probe_args.attach(probe);
    std::string axis, at;
    std::size_t uniform = 0;
    bool with_field = false;
    probe->add_option("--axis", axis, "Sampling axis")->check(CLI::IsMember({"x", "y", "z"}));
    probe->add_option("--at", at, "The two fixed coordinates A,B in increasing axis order (nm)");
    probe->add_option("--uniform", uniform, "Uniform sample count instead of mesh nodes");
    probe->add_flag("--with-field", with_field, "Add Ex,Ey,Ez columns");

    auto* slice = app.add_subcommand("slice", "Sample the potential on axis-normal planes");
    slice_args.attach(slice);
    std::string plane, res;
    slice->add_option("--plane", plane, "AXIS=OFFSET, e.g. z=420 (default probes.slices)");
    slice->add_option("--res", res, "Samples NU,NV along the in-plane axes");

    auto* conv = app.add_subcommand("convergence", "Manufactured-solution convergence study");
    std::string case_name;
    int levels = 4;
    std::size_t coarsest = 4;
    conv->add_option("--case", case_name, "quadratic-harmonic | layered-capacitor | trilinear-exact")
        ->required()
        ->check(CLI::IsMember({"quadratic-harmonic", "layered-capacitor", "trilinear-exact"}));
    conv->add_option("--levels", levels, "Refinement levels (>= 3)");
    conv->add_option("--coarsest", coarsest, "Cells per axis on the coarsest level");

    auto* info = app.add_subcommand("mesh-info", "Mesh statistics");
    info_args.attach(info);
    bool vtk = false;
    info->add_flag("--vtk", vtk, "Write mesh.vtk and a manifest");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForVersion const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return kUsage;
    }

    try
    {
        if (*solve) return cmd_solve(solve_args, dry_run, dump_system);
        if (*sweep) return cmd_sweep(sweep_args, sw);
        if (*probe) return cmd_probe(probe_args, axis, at, uniform, with_field);
        if (*slice) return cmd_slice(slice_args, plane, res);
        if (*conv) return cmd_convergence(case_name, levels, coarsest);
        if (*info) return cmd_mesh_info(info_args, vtk);
    }
    catch (SolverError const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kNotConverged;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
