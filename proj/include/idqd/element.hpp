#pragma once

#include <array>
#include <span>
#include <vector>

#include "common.hpp"

namespace idqd {

/*
 * Local node ordering of the 8-node brick, right-handed, used everywhere:
 *
 *            7 -------- 6            zeta
 *           /|         /|             |  eta
 *          4 -------- 5 |             | /
 *          | 3 -------|-2             |/
 *          |/         |/              +----- xi
 *          0 -------- 1
 *
 * Node j sits at local coordinates kCorners[j] in {-1, +1}^3. Bottom face
 * (zeta = -1) runs 0-1-2-3 counter-clockwise seen from +zeta, top face 4-7
 * likewise. This matches the VTK_HEXAHEDRON convention.
 */
inline constexpr std::array<std::array<int, 3>, 8> kCorners{{
    {-1, -1, -1}, {+1, -1, -1}, {+1, +1, -1}, {-1, +1, -1},
    {-1, -1, +1}, {+1, -1, +1}, {+1, +1, +1}, {-1, +1, +1},
}};

/*
 * Brick faces as 4-node cycles. Each cycle maps onto the reference square
 * corners (-1,-1), (+1,-1), (+1,+1), (-1,+1) of the face parametrisation.
 * Face order: x-, x+, y-, y+, z-, z+.
 */
inline constexpr std::array<std::array<int, 4>, 6> kFaceNodes{{
    {0, 3, 7, 4}, {1, 2, 6, 5}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 1, 2, 3}, {4, 5, 6, 7},
}};

inline constexpr std::array<std::array<int, 2>, 4> kFaceCorners{{
    {-1, -1}, {+1, -1}, {+1, +1}, {-1, +1},
}};

using Matrix8 = std::array<double, 64>;
using ElementCoords = std::array<Vec3, 8>;
using FaceCoords = std::array<Vec3, 4>;

//! Shape function values and reference gradients at one local point.
struct ShapeSet
{
    std::array<double, 8> values{};
    std::array<Vec3, 8> gradients{};
    //! The point lies outside [-1, 1]^3 and the values extrapolate.
    bool extrapolated = false;
};

inline ShapeSet shape(Vec3 const& local) noexcept
{
    ShapeSet s;
    for (int d = 0; d < 3; ++d)
    {
        if (local[d] < -1.0 || local[d] > 1.0) s.extrapolated = true;
    }
    for (int j = 0; j < 8; ++j)
    {
        double const a = 1.0 + kCorners[j][0] * local[0];
        double const b = 1.0 + kCorners[j][1] * local[1];
        double const c = 1.0 + kCorners[j][2] * local[2];
        s.values[j] = 0.125 * a * b * c;
        s.gradients[j] = {0.125 * kCorners[j][0] * b * c, 0.125 * kCorners[j][1] * a * c,
                          0.125 * kCorners[j][2] * a * b};
    }
    return s;
}

//---------------------------------------------------------------------------//
// Gauss-Legendre quadrature
//---------------------------------------------------------------------------//

struct QuadratureRule
{
    std::vector<Vec3> points;  //!< unused trailing components are zero for face rules
    std::vector<double> weights;
};

namespace detail {

struct GaussLine
{
    std::vector<double> x;
    std::vector<double> w;
};

inline GaussLine gauss_line(int n)
{
    switch (n)
    {
        case 1: return {{0.0}, {2.0}};
        case 2:
        {
            double const a = 0.57735026918962576451;
            return {{-a, a}, {1.0, 1.0}};
        }
        case 3:
        {
            double const a = 0.77459666924148337704;
            return {{-a, 0.0, a}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
        }
        case 4:
        {
            double const a = 0.33998104358485626480, b = 0.86113631159405257522;
            double const wa = 0.65214515486254614263, wb = 0.34785484513745385737;
            return {{-b, -a, a, b}, {wb, wa, wa, wb}};
        }
        case 5:
        {
            double const a = 0.53846931010568309104, b = 0.90617984593866399280;
            double const wa = 0.47862867049936646804, wb = 0.23692688505618908751;
            return {{-b, -a, 0.0, a, b}, {wb, wa, 0.56888888888888888889, wa, wb}};
        }
        default: break;
    }
    throw std::invalid_argument("Gauss rule order must be in 1..5");
}

}  // namespace detail

//! Tensor-product Gauss rule with n points per direction on [-1, 1]^3.
inline QuadratureRule gauss_rule_3d(int n = 2)
{
    auto g = detail::gauss_line(n);
    QuadratureRule r;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
            {
                r.points.push_back({g.x[i], g.x[j], g.x[k]});
                r.weights.push_back(g.w[i] * g.w[j] * g.w[k]);
            }
    return r;
}

//! Tensor-product Gauss rule on the reference square; third component is 0.
inline QuadratureRule gauss_rule_2d(int n = 2)
{
    auto g = detail::gauss_line(n);
    QuadratureRule r;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
        {
            r.points.push_back({g.x[i], g.x[j], 0.0});
            r.weights.push_back(g.w[i] * g.w[j]);
        }
    return r;
}

//---------------------------------------------------------------------------//
// Isoparametric mapping
//---------------------------------------------------------------------------//

//! Jacobian J[a][b] = d x_a / d xi_b at a local point, with its inverse.
struct Jacobian
{
    std::array<Vec3, 3> J{};
    std::array<Vec3, 3> inv{};
    double det = 0.0;
};

inline Jacobian jacobian(ElementCoords const& x, ShapeSet const& s) noexcept
{
    Jacobian jac;
    for (int j = 0; j < 8; ++j)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) jac.J[a][b] += x[j][a] * s.gradients[j][b];
    auto const& J = jac.J;
    jac.det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1])
              - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0])
              + J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    if (jac.det != 0.0)
    {
        double const r = 1.0 / jac.det;
        jac.inv[0] = {r * (J[1][1] * J[2][2] - J[1][2] * J[2][1]),
                      r * (J[0][2] * J[2][1] - J[0][1] * J[2][2]),
                      r * (J[0][1] * J[1][2] - J[0][2] * J[1][1])};
        jac.inv[1] = {r * (J[1][2] * J[2][0] - J[1][0] * J[2][2]),
                      r * (J[0][0] * J[2][2] - J[0][2] * J[2][0]),
                      r * (J[0][2] * J[1][0] - J[0][0] * J[1][2])};
        jac.inv[2] = {r * (J[1][0] * J[2][1] - J[1][1] * J[2][0]),
                      r * (J[0][1] * J[2][0] - J[0][0] * J[2][1]),
                      r * (J[0][0] * J[1][1] - J[0][1] * J[1][0])};
    }
    return jac;
}

//! Physical gradient: grad_x N = J^{-T} grad_xi N.
inline Vec3 physical_gradient(Jacobian const& jac, Vec3 const& ref) noexcept
{
    Vec3 g{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) g[a] += jac.inv[b][a] * ref[b];
    return g;
}

//! Map local coordinates to physical coordinates.
inline Vec3 map_to_physical(ElementCoords const& x, Vec3 const& local) noexcept
{
    auto s = shape(local);
    Vec3 p{};
    for (int j = 0; j < 8; ++j)
        for (int a = 0; a < 3; ++a) p[a] += s.values[j] * x[j][a];
    return p;
}

/*!
 * Element stiffness K_ij = sum_q w_q eps (grad N_i . grad N_j) det J.
 *
 * Only the upper triangle is integrated; the lower triangle is a bitwise copy
 * so the result is exactly symmetric.
 */
inline Matrix8 element_stiffness(ElementCoords const& x, double eps_rel, QuadratureRule const& rule)
{
    Matrix8 K{};
    for (std::size_t q = 0; q < rule.points.size(); ++q)
    {
        auto const s = shape(rule.points[q]);
        auto const jac = jacobian(x, s);
        if (!(jac.det > 0.0))
        {
            throw GeometryError("non-positive Jacobian determinant in brick element");
        }
        std::array<Vec3, 8> g;
        for (int j = 0; j < 8; ++j) g[j] = physical_gradient(jac, s.gradients[j]);
        double const f = rule.weights[q] * jac.det;
        for (int i = 0; i < 8; ++i)
            for (int j = i; j < 8; ++j) K[i * 8 + j] += f * dot(g[i], g[j]);
    }
    for (int i = 0; i < 8; ++i)
    {
        for (int j = i; j < 8; ++j) K[i * 8 + j] *= eps_rel;
        for (int j = 0; j < i; ++j) K[i * 8 + j] = K[j * 8 + i];
    }
    return K;
}

//! Axis-aligned brick spanning [lo, hi] in the standard node ordering.
inline ElementCoords brick_coords(Vec3 const& lo, Vec3 const& hi) noexcept
{
    ElementCoords x;
    for (int j = 0; j < 8; ++j)
        for (int a = 0; a < 3; ++a) x[j][a] = kCorners[j][a] < 0 ? lo[a] : hi[a];
    return x;
}

/*!
 * Consistent Neumann load on one quadrilateral face:
 * F_i = -sum_q w_q N_i q |dx/ds x dx/dt|.
 */
inline std::array<double, 4> face_load(FaceCoords const& x, double q, QuadratureRule const& rule)
{
    std::array<double, 4> F{};
    for (std::size_t p = 0; p < rule.points.size(); ++p)
    {
        double const s = rule.points[p][0];
        double const t = rule.points[p][1];
        std::array<double, 4> N;
        Vec3 ds{}, dt{};
        for (int i = 0; i < 4; ++i)
        {
            double const cs = kFaceCorners[i][0], ct = kFaceCorners[i][1];
            N[i] = 0.25 * (1.0 + cs * s) * (1.0 + ct * t);
            double const dNs = 0.25 * cs * (1.0 + ct * t);
            double const dNt = 0.25 * ct * (1.0 + cs * s);
            for (int a = 0; a < 3; ++a)
            {
                ds[a] += dNs * x[i][a];
                dt[a] += dNt * x[i][a];
            }
        }
        double const area_jac = norm(cross(ds, dt));
        if (!(area_jac > 0.0)) throw GeometryError("degenerate face with zero area");
        for (int i = 0; i < 4; ++i) F[i] -= rule.weights[p] * N[i] * q * area_jac;
    }
    return F;
}

}  // namespace idqd
