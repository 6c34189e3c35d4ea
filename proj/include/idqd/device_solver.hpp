#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "mesh.hpp"
#include "solver.hpp"

namespace idqd {

//! Nodal potential bound to its mesh. Conductor nodes carry their gate voltage.
struct SolutionField
{
    std::shared_ptr<Mesh const> mesh;
    std::vector<double> values;
    //! Source voltages the field was solved for: base first, then gates.
    std::vector<double> source_voltages;
};

struct Solution
{
    SolutionField field;
    SolveReport report;
};

//! Base voltage followed by gate voltages in config order.
inline std::vector<double> source_voltages(DeviceSpec const& spec)
{
    std::vector<double> v{spec.base_voltage};
    for (auto const& g : spec.gates) v.push_back(g.voltage);
    return v;
}

//---------------------------------------------------------------------------//
/*!
 * Mesh, stiffness matrix and preconditioner for one device geometry.
 *
 * Gate voltages enter only through the right-hand side, so the factorisation
 * is reused across solves. solve() is const and safe to call concurrently.
 */
class DeviceSolver
{
  public:
    DeviceSolver(DeviceSpec spec, MeshOptions const& mesh_opts, AssemblyOptions const& asm_opts = {},
                 SolverOptions solver_opts = {})
        : spec_(std::move(spec)),
          mesh_(std::make_shared<Mesh const>(build_mesh(spec_, mesh_opts))),
          global_(assemble_global(*mesh_, asm_opts)),
          system_(eliminate_dirichlet(global_, mesh_->constraints())),
          opts_(solver_opts)
    {
        if (opts_.preconditioner == Preconditioner::ilu0 && system_.size() > 0)
        {
            ilu_ = std::make_unique<Ilu0>(system_.K);
        }
    }

    explicit DeviceSolver(DeviceSpec spec)
        : DeviceSolver(spec, MeshOptions::from_spec(spec))
    {
    }

    DeviceSpec const& spec() const noexcept { return spec_; }
    std::shared_ptr<Mesh const> const& mesh() const noexcept { return mesh_; }
    GlobalSystem const& global_system() const noexcept { return global_; }
    LinearSystem const& system() const noexcept { return system_; }
    SolverOptions const& options() const noexcept { return opts_; }
    Ilu0 const* preconditioner() const noexcept { return ilu_.get(); }

    //! Solve at the spec's own voltages.
    Solution solve() const { return solve_sources(source_voltages(spec_)); }

    Solution solve(DeviceSpec const& voltages_from) const
    {
        if (voltages_from.gates.size() != spec_.gates.size())
        {
            throw ValidationError("gate set differs from the meshed device");
        }
        return solve_sources(source_voltages(voltages_from));
    }

    //! Solve for source voltages ordered base first, then gates.
    Solution solve_sources(std::span<double const> sources, SolverOptions const* override_opts = nullptr) const
    {
        auto const constraints = mesh_->constraints_for(sources);
        std::vector<double> prescribed;
        auto F = reduced_rhs(global_, system_, constraints, &prescribed);

        auto const& opts = override_opts ? *override_opts : opts_;
        Ilu0 const* ilu = opts.preconditioner == Preconditioner::ilu0 ? ilu_.get() : nullptr;
        std::unique_ptr<Ilu0> local;
        if (opts.preconditioner == Preconditioner::ilu0 && !ilu && system_.size() > 0)
        {
            local = std::make_unique<Ilu0>(system_.K);
            ilu = local.get();
        }
        Solution out;
        auto u = pcg(system_.K, F, opts, ilu, out.report);
        out.field.mesh = mesh_;
        out.field.values = std::move(prescribed);
        for (std::size_t eq = 0; eq < system_.size(); ++eq)
        {
            out.field.values[system_.equation_node[eq]] = u[eq];
        }
        out.field.source_voltages.assign(sources.begin(), sources.end());
        return out;
    }

    //! Index of a Dirichlet source by label ("base" or a gate label).
    std::size_t source_index(std::string const& label) const
    {
        auto const& labels = mesh_->source_labels();
        for (std::size_t i = 0; i < labels.size(); ++i)
        {
            if (labels[i] == label) return i;
        }
        throw ValidationError("unknown gate label '" + label + "'");
    }

  private:
    DeviceSpec spec_;
    std::shared_ptr<Mesh const> mesh_;
    GlobalSystem global_;
    LinearSystem system_;
    SolverOptions opts_;
    std::unique_ptr<Ilu0> ilu_;
};

}  // namespace idqd
