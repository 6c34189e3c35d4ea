#pragma once

// Independent reference computations used by the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "idqd/idqd.hpp"

namespace idqd::test {

//! Exact stiffness of an axis-aligned brick from 1D stiffness and mass matrices:
//! K = eps (Sx (x) My (x) Mz + Mx (x) Sy (x) Mz + Mx (x) My (x) Sz).
inline Matrix8 kronecker_brick_stiffness(Vec3 const& h, double eps)
{
    auto S = [](double len, int a, int b) { return (a == b ? 1.0 : -1.0) / len; };
    auto M = [](double len, int a, int b) { return len * (a == b ? 2.0 : 1.0) / 6.0; };
    Matrix8 K{};
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
        {
            auto const& ci = kCorners[i];
            auto const& cj = kCorners[j];
            int const ai = ci[0] > 0, bi = ci[1] > 0, gi = ci[2] > 0;
            int const aj = cj[0] > 0, bj = cj[1] > 0, gj = cj[2] > 0;
            K[8 * i + j] = eps
                           * (S(h[0], ai, aj) * M(h[1], bi, bj) * M(h[2], gi, gj)
                              + M(h[0], ai, aj) * S(h[1], bi, bj) * M(h[2], gi, gj)
                              + M(h[0], ai, aj) * M(h[1], bi, bj) * S(h[2], gi, gj));
        }
    return K;
}

//! Eigenvalues of a symmetric dense matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n)
{
    for (int sweep = 0; sweep < 100; ++sweep)
    {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
            {
                double const apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double const theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                double const t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double const c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k)
                {
                    double const akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    double const apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double max_abs_diff(std::span<double const> a, std::span<double const> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(std::span<double const> a)
{
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

//! Unit-spaced uniform axes with n nodes per axis on [0, len]^3.
inline GridAxes cube_axes(std::size_t n, double len = 1.0)
{
    GridAxes ax;
    for (int d = 0; d < 3; ++d) ax.coords[d] = uniform_coords(0.0, len, n);
    return ax;
}

inline Mesh uniform_cube(std::size_t n, double eps = 1.0, double len = 1.0)
{
    return make_plain_mesh(cube_axes(n, len), [eps](Vec3 const&) { return eps; });
}

//! Small air box on an oxide slab with two gates; quick to solve.
inline DeviceSpec small_device(double v1 = 1.0, double v2 = -2.0)
{
    DeviceSpec s;
    s.domain = {{0, 0, 0}, {100, 80, 60}};
    s.materials = {materials::air(), materials::silicon(), materials::silicon_dioxide()};
    s.regions = {
        {"oxide", {{0, 0, 0}, {100, 80, 20}}, materials::silicon_dioxide()},
        {"pillar", {{40, 30, 20}, {60, 50, 40}}, materials::silicon()},
    };
    s.gates = {
        {"A", {{10, 30, 20}, {25, 50, 40}}, v1},
        {"B", {{75, 30, 20}, {90, 50, 40}}, v2},
    };
    s.mesh = MeshHints{{13, 11, 9}, std::nullopt};
    s.probes.idqd_center = Vec3{50, 40, 30};
    return s;
}

}  // namespace idqd::test
