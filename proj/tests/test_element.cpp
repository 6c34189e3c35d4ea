#include <random>

#include <gtest/gtest.h>

#include "idqd/idqd.hpp"
#include "support.hpp"

using namespace idqd;

namespace {

std::vector<Vec3> random_local_points(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    return pts;
}

double matrix_norm(Matrix8 const& K)
{
    double m = 0.0;
    for (double v : K) m = std::max(m, std::abs(v));
    return m;
}

//! Mildly distorted brick: corners of [0,2]x[0,1]x[0,3] perturbed by up to `amount`.
ElementCoords distorted_brick(double amount, std::uint64_t seed)
{
    auto x = brick_coords({0, 0, 0}, {2, 1, 3});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amount, amount);
    for (auto& c : x)
        for (auto& v : c) v += u(rng);
    return x;
}

}  // namespace

TEST(Shape, PartitionOfUnityAndZeroGradientSum)
{
    for (auto const& p : random_local_points(200, 1))
    {
        auto const s = shape(p);
        double sum = 0.0;
        Vec3 g{};
        for (int j = 0; j < 8; ++j)
        {
            sum += s.values[j];
            for (int a = 0; a < 3; ++a) g[a] += s.gradients[j][a];
        }
        EXPECT_NEAR(sum, 1.0, 1e-14);
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(g[a], 0.0, 1e-14);
        EXPECT_FALSE(s.extrapolated);
    }
}

TEST(Shape, KroneckerAtCorners)
{
    for (int i = 0; i < 8; ++i)
    {
        Vec3 const c{double(kCorners[i][0]), double(kCorners[i][1]), double(kCorners[i][2])};
        auto const s = shape(c);
        for (int j = 0; j < 8; ++j) EXPECT_EQ(s.values[j], i == j ? 1.0 : 0.0);
    }
}

TEST(Shape, CentreValuesAreOneEighth)
{
    auto const s = shape({0, 0, 0});
    for (double v : s.values) EXPECT_DOUBLE_EQ(v, 0.125);
}

TEST(Shape, OutsideReferenceCubeIsFlagged)
{
    EXPECT_TRUE(shape({1.5, 0, 0}).extrapolated);
}

TEST(Shape, CornerOrderingIsRightHanded)
{
    Vec3 const e0{double(kCorners[1][0] - kCorners[0][0]), double(kCorners[1][1] - kCorners[0][1]),
                  double(kCorners[1][2] - kCorners[0][2])};
    Vec3 const e1{double(kCorners[3][0] - kCorners[0][0]), double(kCorners[3][1] - kCorners[0][1]),
                  double(kCorners[3][2] - kCorners[0][2])};
    Vec3 const e2{double(kCorners[4][0] - kCorners[0][0]), double(kCorners[4][1] - kCorners[0][1]),
                  double(kCorners[4][2] - kCorners[0][2])};
    EXPECT_GT(dot(cross(e0, e1), e2), 0.0);
}

TEST(Quadrature, WeightsSumToReferenceVolume)
{
    for (int n = 1; n <= 5; ++n)
    {
        auto const r3 = gauss_rule_3d(n);
        auto const r2 = gauss_rule_2d(n);
        double s3 = 0.0, s2 = 0.0;
        for (double w : r3.weights) s3 += w;
        for (double w : r2.weights) s2 += w;
        EXPECT_NEAR(s3, 8.0, 1e-13);
        EXPECT_NEAR(s2, 4.0, 1e-13);
        EXPECT_EQ(r3.points.size(), static_cast<std::size_t>(n * n * n));
    }
    EXPECT_THROW(gauss_rule_3d(6), std::invalid_argument);
}

TEST(Quadrature, IntegratesPolynomialsExactly)
{
    // Gauss with n points is exact for degree 2n-1 per axis: int x^4 y^2 z^0 over [-1,1]^3 = 2/5 * 2/3 * 2.
    auto const r = gauss_rule_3d(3);
    double s = 0.0;
    for (std::size_t q = 0; q < r.points.size(); ++q)
    {
        auto const& p = r.points[q];
        s += r.weights[q] * std::pow(p[0], 4) * p[1] * p[1];
    }
    EXPECT_NEAR(s, 0.4 * (2.0 / 3.0) * 2.0, 1e-14);
}

TEST(Jacobian, BrickIsDiagonalHalfExtents)
{
    auto const x = brick_coords({1, 2, 3}, {5, 4, 9});
    auto const jac = jacobian(x, shape({0.3, -0.2, 0.7}));
    EXPECT_DOUBLE_EQ(jac.det, 2.0 * 1.0 * 3.0);
    EXPECT_DOUBLE_EQ(jac.J[0][0], 2.0);
    EXPECT_DOUBLE_EQ(jac.J[1][1], 1.0);
    EXPECT_DOUBLE_EQ(jac.J[2][2], 3.0);
}

TEST(ElementStiffness, MatchesKroneckerOracleAndHighOrderRule)
{
    Vec3 const h{3.0, 0.5, 7.25};
    auto const x = brick_coords({0, 0, 0}, h);
    auto const K2 = element_stiffness(x, 1.0, gauss_rule_3d(2));
    auto const K5 = element_stiffness(x, 1.0, gauss_rule_3d(5));
    auto const Kx = test::kronecker_brick_stiffness(h, 1.0);
    double const scale = matrix_norm(Kx);
    for (int i = 0; i < 64; ++i)
    {
        EXPECT_NEAR(K2[i], Kx[i], 1e-12 * scale) << i;
        EXPECT_NEAR(K2[i], K5[i], 1e-12 * scale) << i;
    }
}

TEST(ElementStiffness, SymmetricRowSumsZeroAndPsd)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        auto const x = distorted_brick(0.2, seed);
        auto const K = element_stiffness(x, 4.5, gauss_rule_3d(2));
        double const scale = matrix_norm(K);
        for (int i = 0; i < 8; ++i)
        {
            double row = 0.0;
            for (int j = 0; j < 8; ++j)
            {
                EXPECT_LE(std::abs(K[8 * i + j] - K[8 * j + i]), 1e-14 * scale);
                row += K[8 * i + j];
            }
            EXPECT_NEAR(row, 0.0, 1e-12 * scale);
        }
        auto const ev = test::jacobi_eigenvalues(std::vector<double>(K.begin(), K.end()), 8);
        EXPECT_GE(ev.front(), -1e-12 * scale);
        // Exactly one zero mode (the constants).
        EXPECT_NEAR(ev[0], 0.0, 1e-10 * scale);
        EXPECT_GT(ev[1], 1e-6 * scale);
    }
}

TEST(ElementStiffness, ScalesLinearlyInPermittivity)
{
    auto const x = brick_coords({0, 0, 0}, {4, 4, 4});
    auto const K1 = element_stiffness(x, 1.0, gauss_rule_3d(2));
    auto const K11 = element_stiffness(x, 11.0, gauss_rule_3d(2));
    for (int i = 0; i < 64; ++i) EXPECT_EQ(K11[i], 11.0 * K1[i]);
}

TEST(ElementStiffness, ReproducesLinearFieldEnergy)
{
    // phi = a.x gives u^T K u = eps |a|^2 V on any affine brick.
    auto const x = brick_coords({0, 0, 0}, {2, 3, 5});
    Vec3 const a{0.3, -1.1, 2.0};
    auto const K = element_stiffness(x, 2.0, gauss_rule_3d(2));
    std::array<double, 8> u{};
    for (int j = 0; j < 8; ++j) u[j] = dot(a, x[j]);
    double e = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) e += u[i] * K[8 * i + j] * u[j];
    EXPECT_NEAR(e, 2.0 * dot(a, a) * 30.0, 1e-11);
}

TEST(ElementStiffness, InvertedElementIsGeometryError)
{
    auto x = brick_coords({0, 0, 0}, {1, 1, 1});
    std::swap(x[0], x[1]);
    std::swap(x[3], x[2]);
    std::swap(x[4], x[5]);
    std::swap(x[7], x[6]);
    EXPECT_THROW(element_stiffness(x, 1.0, gauss_rule_3d(2)), GeometryError);
}

TEST(FaceLoad, ZeroFluxGivesZeroLoad)
{
    FaceCoords f{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}};
    auto const F = face_load(f, 0.0, gauss_rule_2d(2));
    for (double v : F) EXPECT_EQ(v, 0.0);
}

TEST(FaceLoad, UnitSquareUnitFluxIsMinusQuarter)
{
    FaceCoords f{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}};
    auto const F = face_load(f, 1.0, gauss_rule_2d(2));
    for (double v : F) EXPECT_NEAR(v, -0.25, 1e-15);
}

TEST(FaceLoad, LinearInFluxAndAdditiveOverArea)
{
    FaceCoords f{{{0, 0, 0}, {3, 0, 0}, {3, 2, 0}, {0, 2, 0}}};
    auto const F1 = face_load(f, 1.0, gauss_rule_2d(2));
    auto const F3 = face_load(f, -3.0, gauss_rule_2d(2));
    double total = 0.0;
    for (int i = 0; i < 4; ++i)
    {
        EXPECT_NEAR(F3[i], -3.0 * F1[i], 1e-14);
        total += F1[i];
    }
    EXPECT_NEAR(total, -6.0, 1e-13);
}

TEST(FaceLoad, DegenerateFaceIsGeometryError)
{
    FaceCoords f{{{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {0, 0, 0}}};
    EXPECT_THROW(face_load(f, 1.0, gauss_rule_2d(2)), GeometryError);
}

TEST(FaceNodes, EachFaceLiesOnOneReferencePlane)
{
    for (int f = 0; f < 6; ++f)
    {
        int const d = f / 2;
        int const sign = f % 2 ? 1 : -1;
        for (int v : kFaceNodes[f]) EXPECT_EQ(kCorners[v][d], sign) << "face " << f;
    }
}
