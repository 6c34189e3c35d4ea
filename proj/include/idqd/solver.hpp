#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "sparse.hpp"

namespace idqd {

enum class Preconditioner
{
    ilu0,
    none,
};

inline std::string to_string(Preconditioner p)
{
    return p == Preconditioner::ilu0 ? "ILU(0)" : "none";
}

struct SolverOptions
{
    double tolerance = 1e-8;                //!< on ||F - K u||_2 / ||F||_2
    std::optional<std::size_t> max_iter;    //!< default ceil(10 sqrt(n))
    Preconditioner preconditioner = Preconditioner::ilu0;
    unsigned threads = 1;                   //!< mat-vec rows only

    std::size_t iteration_cap(std::size_t n) const
    {
        if (max_iter) return *max_iter;
        return std::max<std::size_t>(1, static_cast<std::size_t>(
                                            std::ceil(10.0 * std::sqrt(static_cast<double>(n)))));
    }
};

struct SolveReport
{
    std::size_t iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
    double wall_time = 0.0;
    std::string preconditioner;
    std::vector<std::string> warnings;
};

//---------------------------------------------------------------------------//
/*!
 * Incomplete LU factorisation restricted to the sparsity of A (no fill).
 *
 * For symmetric A this is the incomplete LDL^T factorisation, so the
 * preconditioner is symmetric and CG theory applies. A non-positive pivot
 * restarts the factorisation with every diagonal entry scaled by (1 + s),
 * s = 1e-6, then 1e-4, then 1e-2; a failure after that is an error.
 */
class Ilu0
{
  public:
    Ilu0() = default;

    explicit Ilu0(CsrMatrix const& a) : lu_(a)
    {
        std::size_t const n = a.rows();
        diag_.resize(n);
        for (Index i = 0; i < n; ++i)
        {
            diag_[i] = a.position(i, i);
            if (diag_[i] == a.nnz()) throw SolverError("ILU(0): missing diagonal entry in row " + std::to_string(i));
        }
        double s = 0.0;
        for (int attempt = 0; attempt < 4; ++attempt)
        {
            auto bad = factor(a, s);
            if (!bad)
            {
                shift_ = s;
                return;
            }
            warnings_.push_back("ILU(0): non-positive pivot in row " + std::to_string(*bad)
                                + (attempt < 3 ? ", retrying with a diagonal shift" : ""));
            s = attempt == 0 ? 1e-6 : s * 100.0;
        }
        throw SolverError("ILU(0): factorisation failed after diagonal shifts");
    }

    //! z = (LU)^{-1} r by forward then backward substitution.
    void apply(std::span<double const> r, std::span<double> z) const
    {
        std::size_t const n = diag_.size();
        auto rp = lu_.row_ptr();
        auto ci = lu_.col_idx();
        auto v = lu_.values();
        for (Index i = 0; i < n; ++i)
        {
            double s = r[i];
            for (Index p = rp[i]; p < diag_[i]; ++p) s -= v[p] * z[ci[p]];
            z[i] = s;
        }
        for (Index i = n; i-- > 0;)
        {
            double s = z[i];
            for (Index p = diag_[i] + 1; p < rp[i + 1]; ++p) s -= v[p] * z[ci[p]];
            z[i] = s / v[diag_[i]];
        }
    }

    double shift() const noexcept { return shift_; }
    std::vector<std::string> const& warnings() const noexcept { return warnings_; }
    CsrMatrix const& factors() const noexcept { return lu_; }

  private:
    std::optional<Index> factor(CsrMatrix const& a, double s)
    {
        auto src = a.values();
        auto v = lu_.values();
        std::copy(src.begin(), src.end(), v.begin());
        if (s != 0.0)
        {
            for (auto d : diag_) v[d] *= (1.0 + s);
        }
        auto rp = lu_.row_ptr();
        auto ci = lu_.col_idx();
        std::size_t const n = diag_.size();
        std::vector<std::ptrdiff_t> where(n, -1);
        for (Index i = 0; i < n; ++i)
        {
            for (Index p = rp[i]; p < rp[i + 1]; ++p) where[ci[p]] = static_cast<std::ptrdiff_t>(p);
            for (Index p = rp[i]; p < diag_[i]; ++p)
            {
                Index const k = ci[p];
                v[p] /= v[diag_[k]];
                double const lik = v[p];
                for (Index q = diag_[k] + 1; q < rp[k + 1]; ++q)
                {
                    auto const w = where[ci[q]];
                    if (w >= 0) v[static_cast<Index>(w)] -= lik * v[q];
                }
            }
            for (Index p = rp[i]; p < rp[i + 1]; ++p) where[ci[p]] = -1;
            double const pivot = v[diag_[i]];
            if (!(pivot > 1e-14 * std::abs(src[diag_[i]]))) return i;
        }
        return std::nullopt;
    }

    CsrMatrix lu_;
    std::vector<Index> diag_;
    double shift_ = 0.0;
    std::vector<std::string> warnings_;
};

//---------------------------------------------------------------------------//
/*!
 * Preconditioned conjugate gradients on K u = F.
 *
 * Stops when the recursive residual reaches the tolerance and the true
 * residual confirms it. Non-positive curvature p^T K p or r^T z is reported
 * as a breakdown with the iteration number. Hitting the iteration cap is not
 * an error; the report is simply flagged as not converged.
 */
inline std::vector<double> pcg(CsrMatrix const& K, std::span<double const> F, SolverOptions const& opts,
                               Ilu0 const* ilu, SolveReport& report, std::span<double const> guess = {})
{
    auto const t0 = std::chrono::steady_clock::now();
    std::size_t const n = K.rows();
    report = {};
    report.preconditioner = ilu ? "ILU(0)" : "none";
    if (ilu) report.warnings = ilu->warnings();

    auto dotv = [](std::span<double const> a, std::span<double const> b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    auto finish = [&] {
        report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    std::vector<double> u(n, 0.0);
    if (!guess.empty()) std::copy(guess.begin(), guess.end(), u.begin());
    double const fnorm = std::sqrt(dotv(F, F));
    if (n == 0 || fnorm == 0.0)
    {
        if (fnorm == 0.0) std::fill(u.begin(), u.end(), 0.0);
        report.converged = true;
        finish();
        return u;
    }

    std::vector<double> r(n), z(n), p(n), Ap(n);
    auto true_residual = [&] {
        K.multiply(u, Ap, opts.threads);
        for (std::size_t i = 0; i < n; ++i) r[i] = F[i] - Ap[i];
        return std::sqrt(dotv(r, r)) / fnorm;
    };
    auto precondition = [&] {
        if (ilu)
            ilu->apply(r, z);
        else
            std::copy(r.begin(), r.end(), z.begin());
    };

    std::size_t const cap = opts.iteration_cap(n);
    double rel = true_residual();
    bool restart = true;
    double rz = 0.0;
    std::size_t it = 0;
    while (rel > opts.tolerance && it < cap)
    {
        if (restart)
        {
            precondition();
            rz = dotv(r, z);
            p = z;
            restart = false;
        }
        if (!(rz > 0.0))
        {
            throw SolverError("CG breakdown: non-positive preconditioned residual norm at iteration "
                              + std::to_string(it));
        }
        K.multiply(p, Ap, opts.threads);
        double const pAp = dotv(p, Ap);
        if (!(pAp > 0.0))
        {
            throw SolverError("CG breakdown: non-positive curvature at iteration " + std::to_string(it));
        }
        double const alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i)
        {
            u[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        ++it;
        rel = std::sqrt(dotv(r, r)) / fnorm;
        if (rel <= opts.tolerance)
        {
            rel = true_residual();
            restart = true;
            continue;
        }
        precondition();
        double const rz_new = dotv(r, z);
        double const beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (!restart) rel = true_residual();

    report.iterations = it;
    report.final_relative_residual = rel;
    report.converged = rel <= opts.tolerance;
    finish();
    return u;
}

//! Nodal values for every node plus the solve report.
struct NodalSolution
{
    std::vector<double> values;
    SolveReport report;
};

inline NodalSolution pcg_solve(LinearSystem const& sys, SolverOptions const& opts = {},
                               Ilu0 const* factored = nullptr)
{
    if (!(opts.tolerance > 0.0 && opts.tolerance < 1.0))
    {
        throw SolverError("tolerance must lie in (0, 1)");
    }
    if (opts.max_iter && *opts.max_iter < 1) throw SolverError("max_iter must be >= 1");
    std::optional<Ilu0> local;
    Ilu0 const* ilu = nullptr;
    if (opts.preconditioner == Preconditioner::ilu0 && sys.size() > 0)
    {
        if (!factored) local.emplace(sys.K);
        ilu = factored ? factored : &*local;
    }
    NodalSolution out;
    auto u = pcg(sys.K, sys.F, opts, ilu, out.report);
    out.values = sys.expand(u);
    return out;
}

//---------------------------------------------------------------------------//
// Dense direct oracle
//---------------------------------------------------------------------------//

//! Gaussian elimination with partial pivoting on a row-major n x n matrix.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b)
{
    std::size_t const n = b.size();
    if (a.size() != n * n) throw SolverError("dense_solve: matrix size mismatch");
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (std::size_t c = 0; c < n; ++c)
    {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
        {
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        }
        if (!(std::abs(a[piv * n + c]) > 1e-14 * scale))
        {
            throw SolverError("dense_solve: matrix is singular (column " + std::to_string(c) + ")");
        }
        if (piv != c)
        {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r)
        {
            double const f = a[r * n + c] / a[c * n + c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;)
    {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
        x[r] = s / a[r * n + r];
    }
    return x;
}

//! Direct solve of a reduced system; limited to `cap` unknowns.
inline std::vector<double> dense_solve(LinearSystem const& sys, std::size_t cap = 2000)
{
    if (sys.size() > cap)
    {
        throw SolverError("dense_solve: " + std::to_string(sys.size()) + " unknowns exceed the cap of "
                          + std::to_string(cap));
    }
    return sys.expand(dense_solve(sys.K.to_dense(), sys.F));
}

}  // namespace idqd
