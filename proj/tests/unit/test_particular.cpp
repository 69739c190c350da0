#include "stressbasis/particular.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sb;

namespace {

MeshPtr band_mesh(int n = 8)
{
    return build_rectangle_mesh(Rectangle{1.0, 1.0}, n, n, {{'x', 0.25}, {'x', 0.75}}, 4);
}

MeshPtr gravity_mesh(int n = 8)
{
    return build_rectangle_mesh(Rectangle{1.0, 1.0}, n, n, {{'y', 0.5}}, 4);
}

MeshPtr annulus_grid(int nr = 32) { return build_radial_grid(Annulus{0.1, 0.3}, nr, 6); }

}  // namespace

TEST(AxisymAiry, CoefficientsAndBoundaryValues)
{
    AiryCoefficients c = axisym_airy_coefficients(0.1, 0.3, 1.0, 0.0);
    EXPECT_NEAR(c.c1, -0.15, 1e-15);
    EXPECT_NEAR(c.c2, 0.25, 1e-15);
    ParticularStress p = axisym_airy_particular(annulus_grid(), 1.0);
    const auto& src = *p.field.source();
    EXPECT_NEAR(src.fn(0.1, 0.0).v.a, -1.0, 1e-14);
    EXPECT_NEAR(src.fn(0.3, 0.0).v.a, 0.0, 1e-14);
    for (double r : {0.1, 0.17, 0.3}) {
        EXPECT_NEAR(src.fn(r, 0.0).v.b, 0.5, 1e-14);
        EXPECT_EQ(src.fn(r, 0.0).v.c, 0.0);
    }
    EXPECT_EQ(p.field.tag(), (AzimuthalTag{0, Parity::Cos}));
}

TEST(BandPressure, ProfileValues)
{
    EXPECT_EQ(band_profile_value(BandProfile::Discontinuous, 0.5), 1.0);
    EXPECT_EQ(band_profile_value(BandProfile::Discontinuous, 0.1), 0.0);
    EXPECT_NEAR(band_profile_value(BandProfile::Quartic, 0.5), 1.0, 1e-15);
    EXPECT_NEAR(band_profile_value(BandProfile::Quartic, 0.375), 0.5625, 1e-15);
    EXPECT_EQ(band_profile_value(BandProfile::Quartic, 0.1), 0.0);
    EXPECT_EQ(band_profile_value(BandProfile::Quartic, 0.25), 0.0);
    EXPECT_EQ(band_profile_from_string("quartic"), BandProfile::Quartic);
    EXPECT_THROW(band_profile_from_string("cubic"), std::invalid_argument);
}

TEST(BandPressure, FieldIsUniaxialAndEquilibrated)
{
    for (auto prof : {BandProfile::Discontinuous, BandProfile::Quartic}) {
        ParticularStress p = band_pressure_particular(band_mesh(), 2.0, prof);
        const auto& src = *p.field.source();
        EXPECT_NEAR(src.fn(0.5, 0.3).v.b, -2.0, 1e-14);
        EXPECT_EQ(src.fn(0.1, 0.3).v.b, 0.0);
        EXPECT_EQ(src.fn(0.5, 0.3).v.a, 0.0);
        EXPECT_EQ(src.fn(0.5, 0.3).v.c, 0.0);
        EquilibriumResidual r = equilibrium_residual(p.field, p.loading);
        EXPECT_LE(r.interior_norm, 1e-12);
        EXPECT_LE(r.boundary_mismatch, 1e-12);
    }
}

TEST(BandPressure, LinearInPressure)
{
    auto m = band_mesh();
    auto one = band_pressure_particular(m, 1.0, BandProfile::Quartic).field;
    auto three = band_pressure_particular(m, 3.0, BandProfile::Quartic).field;
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_NEAR(three.values()[i].b, 3.0 * one.values()[i].b, 1e-14);
}

TEST(BandPressure, MissingFeatureLineRejected)
{
    auto plain = build_rectangle_mesh(Rectangle{1.0, 1.0}, 6, 6, {}, 4);
    EXPECT_THROW(band_pressure_particular(plain, 1.0, BandProfile::Discontinuous), std::invalid_argument);
    auto no_mid = build_rectangle_mesh(Rectangle{1.0, 1.0}, 4, 5, {{'x', 0.25}, {'x', 0.75}}, 4);
    EXPECT_THROW(gravity_particular(no_mid, 1.0, 3.0, 1.0), std::invalid_argument);
    EXPECT_THROW(band_pressure_particular(annulus_grid(), 1.0, BandProfile::Quartic), std::invalid_argument);
}

TEST(Gravity, HydrostaticProfile)
{
    ParticularStress p = gravity_particular(gravity_mesh(), 1.0, 3.0, 1.0);
    const auto& src = *p.field.source();
    EXPECT_NEAR(src.fn(0.4, 0.0).v.b, -2.0, 1e-15);
    EXPECT_NEAR(src.fn(0.4, 0.5).v.b, -0.5, 1e-15);
    EXPECT_NEAR(src.fn(0.4, 0.5 + 1e-12).v.b, -0.5, 1e-11);
    EXPECT_NEAR(src.fn(0.4, 1.0).v.b, 0.0, 1e-15);
    EXPECT_NEAR(src.fn(0.4, 0.25).v.b, -1.25, 1e-15);
    ASSERT_TRUE(p.loading.body.has_value());
    EXPECT_NEAR(p.loading.body->force(0.3, 0.2).y, -3.0, 1e-15);
    EXPECT_NEAR(p.loading.body->force(0.3, 0.8).y, -1.0, 1e-15);
    // potential is continuous and its slope is the density
    EXPECT_NEAR(gravity_potential(1.0, 3.0, 1.0, 0.5 - 1e-12), gravity_potential(1.0, 3.0, 1.0, 0.5 + 1e-12), 1e-11);
    EXPECT_NEAR(gravity_potential(1.0, 3.0, 1.0, 0.9) - gravity_potential(1.0, 3.0, 1.0, 0.7), 0.2, 1e-14);
    EquilibriumResidual r = equilibrium_residual(p.field, p.loading);
    EXPECT_LE(r.interior_norm, 1e-12);
    EXPECT_LE(r.boundary_mismatch, 1e-12);
    Resultants res = compute_resultants(p.loading, *p.field.mesh());
    EXPECT_NEAR(res.total.fy, 0.0, 1e-12);
    EXPECT_THROW(gravity_particular(gravity_mesh(), -1.0, 3.0, 1.0), std::invalid_argument);
}

TEST(AnnulusM1, BoundaryValues)
{
    ParticularStress p = annulus_m1_particular(annulus_grid());
    const auto& src = *p.field.source();
    EXPECT_NEAR(src.fn(0.1, 0.0).v.a, 1.0, 1e-14);
    EXPECT_NEAR(src.fn(0.3, 0.0).v.a, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(src.fn(0.1, 0.0).v.c, 0.0, 1e-14);
    EXPECT_NEAR(src.fn(0.3, 0.0).v.c, 0.0, 1e-14);
    EXPECT_EQ(p.field.tag(), (AzimuthalTag{1, Parity::Cos}));
    EXPECT_THROW(annulus_m1_particular(build_radial_grid(Annulus{0.1, 0.4}, 16, 4)), std::invalid_argument);
}

TEST(AnnulusM1, IsNotCompatible)
{
    ParticularStress p = annulus_m1_particular(annulus_grid(64));
    // Laplacian of the trace profile is 0.325 / r^2 + 0.00225 / r^4; the value is its weighted L2 norm
    EXPECT_NEAR(trace_laplacian_norm(p.field), 5.360947212589701, 1e-4);
    // psi = c1 r + c2 r^2 is equilibrated only: its trace Laplacian is c1 / r^3
    ParticularStress airy = axisym_airy_particular(annulus_grid(64), 1.0);
    EXPECT_NEAR(trace_laplacian_norm(airy.field), 18.683304054659754, 1e-4);
}

TEST(OracleAsParticular, AcceptsMatchingRejectsWrong)
{
    auto m = band_mesh();
    auto one = band_pressure_particular(m, 1.0, BandProfile::Discontinuous);
    auto two = band_pressure_particular(m, 2.0, BandProfile::Discontinuous);
    EXPECT_NO_THROW(oracle_as_particular(one.field, one.loading));
    EXPECT_THROW(oracle_as_particular(one.field, two.loading), std::invalid_argument);
    EXPECT_NO_THROW(oracle_as_particular(one.field.scaled(0.0), LoadingSpec{}));
    auto r = annulus_grid();
    auto m1 = annulus_m1_particular(r);
    EXPECT_THROW(oracle_as_particular(m1.field, LoadingSpec{}), std::invalid_argument);
}
