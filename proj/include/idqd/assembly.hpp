#pragma once

#include <concepts>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "element.hpp"
#include "geometry.hpp"
#include "mesh.hpp"
#include "sparse.hpp"

namespace idqd {

//! Anything that can be assembled: 8-node bricks with per-element permittivity.
template <class M>
concept BrickMesh = requires(M const& m, Index i) {
    { m.node_count() } -> std::convertible_to<std::size_t>;
    { m.element_count() } -> std::convertible_to<std::size_t>;
    { m.element_nodes(i) } -> std::convertible_to<std::array<Index, 8>>;
    { m.element_coords(i) } -> std::convertible_to<ElementCoords>;
    { m.element_active(i) } -> std::convertible_to<bool>;
    { m.element_permittivity(i) } -> std::convertible_to<double>;
    { m.neumann_faces() };
    { m.neumann_flux() } -> std::convertible_to<double>;
};

/*!
 * Converts a flux in C/m^2 into the load units of the nm / relative
 * permittivity system: q [C/m^2] * 1e-9 [m/nm] / eps0.
 */
inline constexpr double kFluxScale = 1e-9 / kVacuumPermittivity;

struct AssemblyOptions
{
    unsigned threads = 1;
    /*!
     * Strict mode computes element matrices in parallel but scatters them
     * serially in element order, so K is bitwise independent of `threads`.
     * Otherwise each thread accumulates a private copy and the copies are
     * summed in thread order (reproducible only at a fixed thread count).
     */
    bool strict = true;
    int volume_gauss = 2;
    int face_gauss = 2;
};

//! K and F over every node, before Dirichlet elimination.
struct GlobalSystem
{
    CsrMatrix K;
    std::vector<double> F;
};

/*!
 * Reduced system K u = F over the free nodes.
 *
 * Equations keep the lexicographic node order of the mesh.
 */
struct LinearSystem
{
    CsrMatrix K;
    std::vector<double> F;
    std::vector<Index> equation_node;
    std::vector<std::ptrdiff_t> node_equation;  //!< -1 for prescribed nodes
    std::vector<double> prescribed;             //!< value at prescribed nodes, 0 elsewhere

    std::size_t size() const noexcept { return equation_node.size(); }
    std::size_t node_count() const noexcept { return node_equation.size(); }

    //! Scatter free values back into a full nodal vector.
    std::vector<double> expand(std::span<double const> u) const
    {
        std::vector<double> full = prescribed;
        for (std::size_t eq = 0; eq < equation_node.size(); ++eq) full[equation_node[eq]] = u[eq];
        return full;
    }
};

//---------------------------------------------------------------------------//
// Sparsity pattern
//---------------------------------------------------------------------------//

/*!
 * Pattern of K: (i, j) is stored when some active element holds both nodes.
 * Built in two passes over a node -> element adjacency: count, then fill.
 */
template <BrickMesh M>
CsrMatrix stiffness_pattern(M const& mesh)
{
    std::size_t const nn = mesh.node_count();
    std::size_t const ne = mesh.element_count();

    std::vector<Index> adj_ptr(nn + 1, 0);
    for (Index e = 0; e < ne; ++e)
    {
        if (!mesh.element_active(e)) continue;
        for (Index n : mesh.element_nodes(e)) ++adj_ptr[n + 1];
    }
    for (std::size_t n = 0; n < nn; ++n) adj_ptr[n + 1] += adj_ptr[n];
    std::vector<Index> adj(adj_ptr.back());
    {
        std::vector<Index> fill(adj_ptr.begin(), adj_ptr.end() - 1);
        for (Index e = 0; e < ne; ++e)
        {
            if (!mesh.element_active(e)) continue;
            for (Index n : mesh.element_nodes(e)) adj[fill[n]++] = e;
        }
    }

    std::vector<Index> scratch;
    auto gather = [&](Index n) {
        scratch.clear();
        for (Index p = adj_ptr[n]; p < adj_ptr[n + 1]; ++p)
        {
            for (Index m : mesh.element_nodes(adj[p])) scratch.push_back(m);
        }
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    };

    std::vector<Index> row_ptr(nn + 1, 0);
    for (Index n = 0; n < nn; ++n)
    {
        gather(n);
        row_ptr[n + 1] = row_ptr[n] + scratch.size();
    }
    std::vector<Index> cols(row_ptr.back());
    for (Index n = 0; n < nn; ++n)
    {
        gather(n);
        std::copy(scratch.begin(), scratch.end(), cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[n]));
    }
    return CsrMatrix(nn, nn, std::move(row_ptr), std::move(cols));
}

namespace detail {

inline void scatter(CsrMatrix const& pattern, std::span<double> values, std::array<Index, 8> const& nodes,
                    Matrix8 const& ke)
{
    for (int a = 0; a < 8; ++a)
    {
        auto const cols = pattern.row_cols(nodes[a]);
        Index const base = pattern.row_ptr()[nodes[a]];
        for (int b = 0; b < 8; ++b)
        {
            auto it = std::lower_bound(cols.begin(), cols.end(), nodes[b]);
            values[base + static_cast<Index>(it - cols.begin())] += ke[a * 8 + b];
        }
    }
}

template <class F>
void for_chunks(std::size_t n, unsigned threads, F&& body)
{
    threads = std::max(1u, threads);
    if (threads == 1)
    {
        body(0u, std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    std::size_t const chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t)
    {
        std::size_t const lo = std::min(n, t * chunk);
        std::size_t const hi = std::min(n, lo + chunk);
        pool.emplace_back([&body, t, lo, hi] { body(t, lo, hi); });
    }
}

}  // namespace detail

/*!
 * Scatter-add element stiffness matrices over active elements and consistent
 * face loads over the Neumann faces.
 */
template <BrickMesh M>
GlobalSystem assemble_global(M const& mesh, AssemblyOptions const& opts = {})
{
    GlobalSystem sys{stiffness_pattern(mesh), std::vector<double>(mesh.node_count(), 0.0)};
    auto const rule = gauss_rule_3d(opts.volume_gauss);
    std::size_t const ne = mesh.element_count();
    unsigned const threads = std::max(1u, opts.threads);
    auto values = sys.K.values();

    auto element_matrix = [&](Index e) {
        return element_stiffness(mesh.element_coords(e), mesh.element_permittivity(e), rule);
    };

    if (threads == 1)
    {
        for (Index e = 0; e < ne; ++e)
        {
            if (mesh.element_active(e))
            {
                detail::scatter(sys.K, values, mesh.element_nodes(e), element_matrix(e));
            }
        }
    }
    else if (opts.strict)
    {
        std::vector<Matrix8> ke(ne);
        detail::for_chunks(ne, threads, [&](unsigned, std::size_t lo, std::size_t hi) {
            for (Index e = lo; e < hi; ++e)
            {
                if (mesh.element_active(e)) ke[e] = element_matrix(e);
            }
        });
        for (Index e = 0; e < ne; ++e)
        {
            if (mesh.element_active(e)) detail::scatter(sys.K, values, mesh.element_nodes(e), ke[e]);
        }
    }
    else
    {
        std::vector<std::vector<double>> partial(threads, std::vector<double>(sys.K.nnz(), 0.0));
        detail::for_chunks(ne, threads, [&](unsigned t, std::size_t lo, std::size_t hi) {
            for (Index e = lo; e < hi; ++e)
            {
                if (mesh.element_active(e))
                {
                    detail::scatter(sys.K, partial[t], mesh.element_nodes(e), element_matrix(e));
                }
            }
        });
        for (unsigned t = 0; t < threads; ++t)
            for (std::size_t p = 0; p < values.size(); ++p) values[p] += partial[t][p];
    }

    double const q = mesh.neumann_flux() * kFluxScale;
    if (q != 0.0)
    {
        auto const face_rule = gauss_rule_2d(opts.face_gauss);
        for (auto const& nf : mesh.neumann_faces())
        {
            auto const x = mesh.element_coords(nf.element);
            auto const nodes = mesh.element_nodes(nf.element);
            FaceCoords fx;
            for (int i = 0; i < 4; ++i) fx[i] = x[kFaceNodes[nf.face][i]];
            auto const fe = face_load(fx, q, face_rule);
            for (int i = 0; i < 4; ++i) sys.F[nodes[kFaceNodes[nf.face][i]]] += fe[i];
        }
    }
    return sys;
}

/*!
 * Remove prescribed rows and columns symmetrically:
 * F_free <- F_free - K_free,fixed * phi_fixed.
 *
 * A free node without element support is reported as a singularity.
 */
inline LinearSystem eliminate_dirichlet(GlobalSystem const& global, NodalConstraints const& fixed)
{
    auto const& K = global.K;
    std::size_t const nn = K.rows();
    if (fixed.size() != nn) throw SolverError("constraint vector does not match the node count");

    LinearSystem sys;
    sys.node_equation.assign(nn, -1);
    sys.prescribed.assign(nn, 0.0);
    for (Index n = 0; n < nn; ++n)
    {
        if (fixed[n])
        {
            sys.prescribed[n] = *fixed[n];
            continue;
        }
        auto const p = K.position(n, n);
        if (p == K.nnz() || !(K.values()[p] > 0.0))
        {
            throw SolverError("singular system: free node " + std::to_string(n)
                              + " has no element support");
        }
        sys.node_equation[n] = static_cast<std::ptrdiff_t>(sys.equation_node.size());
        sys.equation_node.push_back(n);
    }

    std::size_t const neq = sys.equation_node.size();
    std::vector<Index> row_ptr(neq + 1, 0);
    for (std::size_t eq = 0; eq < neq; ++eq)
    {
        std::size_t count = 0;
        for (Index c : K.row_cols(sys.equation_node[eq])) count += sys.node_equation[c] >= 0;
        row_ptr[eq + 1] = row_ptr[eq] + count;
    }
    std::vector<Index> cols(row_ptr.back());
    std::vector<double> vals(row_ptr.back());
    sys.F.assign(neq, 0.0);
    for (std::size_t eq = 0; eq < neq; ++eq)
    {
        Index const n = sys.equation_node[eq];
        auto rc = K.row_cols(n);
        auto rv = K.row_values(n);
        double rhs = global.F[n];
        Index out = row_ptr[eq];
        for (std::size_t p = 0; p < rc.size(); ++p)
        {
            auto const ceq = sys.node_equation[rc[p]];
            if (ceq >= 0)
            {
                cols[out] = static_cast<Index>(ceq);
                vals[out] = rv[p];
                ++out;
            }
            else
            {
                rhs -= rv[p] * sys.prescribed[rc[p]];
            }
        }
        sys.F[eq] = rhs;
    }
    sys.K = CsrMatrix(neq, neq, std::move(row_ptr), std::move(cols));
    std::copy(vals.begin(), vals.end(), sys.K.values().begin());
    return sys;
}

/*!
 * Right-hand side of an existing reduced system for new prescribed values.
 * The set of prescribed nodes must be unchanged.
 */
inline std::vector<double> reduced_rhs(GlobalSystem const& global, LinearSystem const& sys,
                                       NodalConstraints const& fixed, std::vector<double>* prescribed = nullptr)
{
    std::vector<double> values(sys.node_count(), 0.0);
    for (Index n = 0; n < values.size(); ++n)
    {
        bool const is_free = sys.node_equation[n] >= 0;
        if (is_free == fixed[n].has_value())
        {
            throw SolverError("prescribed node set differs from the factored system");
        }
        if (fixed[n]) values[n] = *fixed[n];
    }
    std::vector<double> F(sys.size());
    for (std::size_t eq = 0; eq < sys.size(); ++eq)
    {
        Index const n = sys.equation_node[eq];
        auto rc = global.K.row_cols(n);
        auto rv = global.K.row_values(n);
        double rhs = global.F[n];
        for (std::size_t p = 0; p < rc.size(); ++p)
        {
            if (sys.node_equation[rc[p]] < 0) rhs -= rv[p] * values[rc[p]];
        }
        F[eq] = rhs;
    }
    if (prescribed) *prescribed = std::move(values);
    return F;
}

//! Assemble and eliminate with the mesh's own boundary data.
inline LinearSystem assemble(Mesh const& mesh, AssemblyOptions const& opts = {})
{
    return eliminate_dirichlet(assemble_global(mesh, opts), mesh.constraints());
}

}  // namespace idqd
