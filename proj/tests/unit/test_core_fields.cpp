#include "stressbasis/fields.hpp"
#include "stressbasis/loading.hpp"
#include "stressbasis/oracles.hpp"
#include "stressbasis/particular.hpp"
#include "stressbasis/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sb;

namespace {

MeshPtr unit_square(int n = 8, int q = 3)
{
    return build_rectangle_mesh(Rectangle{1.0, 1.0}, n, n, {{'x', 0.25}, {'x', 0.75}}, q);
}

SymTensorField2 random_field(const MeshPtr& m, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Sym2> v(m->num_qp());
    for (auto& s : v) s = {u(rng), u(rng), u(rng)};
    return SymTensorField2(m, v, std::nullopt);
}

}  // namespace

TEST(Quadrature, GaussRuleIntegratesDeclaredDegreeExactly)
{
    for (int n = 1; n <= 12; ++n) {
        QuadratureRule r = gauss_legendre(n);
        EXPECT_EQ(r.exactness, 2 * n - 1);
        double wsum = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            wsum += w;
        }
        EXPECT_NEAR(wsum, 2.0, 1e-13);
        for (int k = 0; k <= r.exactness; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            EXPECT_NEAR(s, exact, 1e-12) << "n=" << n << " k=" << k;
        }
    }
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(Quadrature, CompositeRuleOnMeshIntegratesPolynomial)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.01}, 6, 5, {}, 3);
    // x^5 y^4 is within the per-element exactness of a 3-point rule
    double s = 0.0;
    for (std::size_t i = 0; i < m->num_qp(); ++i) {
        Point2 p = m->qp(i);
        s += m->qweight(i) * std::pow(p.x, 5) * std::pow(p.y, 4);
    }
    EXPECT_NEAR(s, (1.0 / 6.0) * std::pow(1.01, 5) / 5.0, 1e-12);
}

TEST(L2Inner, IdentityOnUnitSquareIsTwo)
{
    auto m = unit_square();
    auto I = constant_field(m, {1.0, 1.0, 0.0});
    EXPECT_NEAR(l2_inner_tensor(I, I), 2.0, 1e-13);
}

TEST(L2Inner, ShearComponentCountsTwice)
{
    auto m = unit_square();
    auto S = constant_field(m, {0.0, 0.0, 1.0});
    EXPECT_NEAR(l2_inner_tensor(S, S), 2.0, 1e-13);
}

TEST(L2Inner, BandPressureFieldSelfProductIsHalf)
{
    auto m = unit_square();
    auto p = band_pressure_particular(m, 1.0, BandProfile::Discontinuous);
    EXPECT_NEAR(l2_inner_tensor(p.field, p.field), 0.5, 1e-13);
    auto t = planar_trace(p.field);
    EXPECT_NEAR(l2_inner_scalar(t, t), 0.5, 1e-13);
}

TEST(L2Inner, ScalarOneOnUnitSquareIsOne)
{
    auto m = unit_square();
    auto f = sample_scalar([](double, double) { return 1.0; }, m);
    EXPECT_NEAR(l2_inner_scalar(f, f), 1.0, 1e-13);
}

TEST(L2Inner, BilinearSymmetricAndCauchySchwarz)
{
    auto m = unit_square(8);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto A = random_field(m, rng), B = random_field(m, rng), C = random_field(m, rng);
        const double ab = l2_inner_tensor(A, B), ba = l2_inner_tensor(B, A);
        EXPECT_NEAR(ab, ba, 1e-12 * std::abs(ab) + 1e-15);
        const double lhs = l2_inner_tensor(A.axpy(2.5, C), B);
        const double rhs = ab + 2.5 * l2_inner_tensor(C, B);
        EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1.0));
        EXPECT_LE(std::abs(ab), l2_norm(A) * l2_norm(B));
        auto ta = planar_trace(A), tb = planar_trace(B);
        EXPECT_NEAR(l2_inner_scalar(ta, tb), l2_inner_scalar(tb, ta), 1e-12);
    }
}

TEST(L2Inner, MeshAndTagMismatchRejected)
{
    auto m1 = unit_square(4), m2 = unit_square(8);
    auto A = constant_field(m1, {1, 0, 0}), B = constant_field(m2, {1, 0, 0});
    EXPECT_THROW(l2_inner_tensor(A, B), std::invalid_argument);
    auto r = build_radial_grid(Annulus{0.1, 0.3}, 8, 3);
    auto C = constant_field(r, {1, 0, 0}, AzimuthalTag{0, Parity::Cos});
    auto D = constant_field(r, {1, 0, 0}, AzimuthalTag{1, Parity::Cos});
    EXPECT_THROW(l2_inner_tensor(C, D), std::invalid_argument);
    EXPECT_THROW(constant_field(r, {1, 0, 0}), std::invalid_argument);
}

TEST(L2Inner, RadialThetaWeights)
{
    auto r = build_radial_grid(Annulus{0.1, 0.3}, 8, 3);
    auto A0 = constant_field(r, {1, 0, 0}, AzimuthalTag{0, Parity::Cos});
    auto A1 = constant_field(r, {1, 0, 0}, AzimuthalTag{1, Parity::Cos});
    const double radial = (0.3 * 0.3 - 0.1 * 0.1) / 2.0;
    EXPECT_NEAR(l2_inner_tensor(A0, A0), 2.0 * M_PI * radial, 1e-13);
    EXPECT_NEAR(l2_inner_tensor(A1, A1), M_PI * radial, 1e-13);
}

TEST(PlanarTrace, IdentityShearAndBand)
{
    auto m = unit_square();
    const auto id = planar_trace(constant_field(m, {1, 1, 0}));
    for (double v : id.values()) EXPECT_EQ(v, 2.0);
    const auto shear = planar_trace(constant_field(m, {0, 0, 3.0}));
    for (double v : shear.values()) EXPECT_EQ(v, 0.0);
    auto p = band_pressure_particular(m, 1.0, BandProfile::Discontinuous);
    auto t = planar_trace(p.field);
    for (std::size_t i = 0; i < m->num_qp(); ++i) {
        Point2 q = m->qp(i);
        EXPECT_EQ(t.values()[i], (q.x > 0.25 && q.x < 0.75) ? -1.0 : 0.0);
    }
}

TEST(PlanarTrace, Linear)
{
    auto m = unit_square(4);
    std::mt19937 rng(3);
    auto A = random_field(m, rng), B = random_field(m, rng);
    auto t = planar_trace(A.scaled(2.0).axpy(-3.0, B));
    auto ta = planar_trace(A), tb = planar_trace(B);
    for (std::size_t i = 0; i < t.values().size(); ++i)
        EXPECT_NEAR(t.values()[i], 2.0 * ta.values()[i] - 3.0 * tb.values()[i], 1e-15);
}

TEST(EquilibriumResidual, ConstantFieldWithoutLoadHasOnlyBoundaryMismatch)
{
    auto m = unit_square();
    auto A = constant_field(m, {-1.0, -1.0, 0.0});
    LoadingSpec none;
    auto r = equilibrium_residual(A, none);
    EXPECT_EQ(r.interior_norm, 0.0);
    EXPECT_NEAR(r.boundary_mismatch, 1.0, 1e-14);
}

TEST(EquilibriumResidual, LameFieldOnAnnulus)
{
    auto r = build_radial_grid(Annulus{0.1, 0.3}, 32, 4);
    auto lame = lame_oracle(0.1, 0.3, 1.0, isotropic(1.0, 0.33)).on(r);
    auto p = axisym_airy_particular(r, 1.0, 0.0);
    auto res = equilibrium_residual(lame, p.loading);
    EXPECT_LE(res.interior_norm, 1e-6 * l2_norm(lame));
    EXPECT_LE(res.boundary_mismatch, 1e-6);
}

TEST(EquilibriumResidual, BandFieldIsDivergenceFree)
{
    auto m = unit_square();
    auto p = band_pressure_particular(m, 1.0, BandProfile::Discontinuous);
    auto res = equilibrium_residual(p.field, p.loading);
    EXPECT_LE(res.interior_norm, 1e-12);
    EXPECT_LE(res.boundary_mismatch, 1e-12);
}

TEST(EquilibriumResidual, MisalignedDiscontinuityRejected)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.0}, 6, 6, {}, 3);
    auto src = std::make_shared<TensorSource>(
        TensorSource{[](double x, double) { return Jet{{0, x < 0.25 ? 0.0 : -1.0, 0}, {}, {}}; }, {{'x', 0.25}}});
    EXPECT_THROW(sample(src, m, std::nullopt), std::invalid_argument);
}

TEST(FieldCsv, HeaderAndSeventeenDigits)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.0}, 4, 4, {}, 2);
    auto A = constant_field(m, {1.0 / 3.0, 0.0, 0.0});
    std::string csv = field_csv(A, "demo");
    EXPECT_EQ(csv.rfind("# demo\nx,y,sxx,syy,sxy\n", 0), 0u);
    EXPECT_NE(csv.find("0.33333333333333331"), std::string::npos);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    EXPECT_EQ(rows, 2 + 81u);
    auto r = build_radial_grid(Annulus{0.1, 0.3}, 4, 2);
    auto B = constant_field(r, {1, 0, 0}, AzimuthalTag{1, Parity::Cos});
    EXPECT_EQ(field_csv(B).rfind("r,m,srr,stt,srt\n", 0), 0u);
}

TEST(Fields, NonFiniteValuesRejected)
{
    auto m = unit_square(4);
    std::vector<Sym2> v(m->num_qp());
    v[3].a = std::nan("");
    EXPECT_THROW(SymTensorField2(m, v, std::nullopt), std::domain_error);
}
