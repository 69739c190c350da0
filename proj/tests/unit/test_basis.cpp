#include "stressbasis/basis.hpp"
#include "stressbasis/loading.hpp"
#include "stressbasis/util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace sb;

namespace {

MeshPtr rect_mesh(int n, int n_modes, double Ly = 1.01)
{
    const int K = default_rectangle_spectral_size(n_modes);
    return build_rectangle_mesh(Rectangle{1.0, Ly}, n, n, {}, recommended_quadrature_order(K, n));
}

MeshPtr radial_mesh(int n_modes, int nr = 64)
{
    return build_radial_grid(Annulus{0.1, 0.3}, nr,
                             recommended_quadrature_order(default_radial_spectral_size(n_modes), nr, MeshKind::Radial));
}

BasisSet small_rect(int n_modes = 8, int n = 16)
{
    EigenSolveConfig c;
    c.n_modes = n_modes;
    return solve_basis_rectangle(rect_mesh(n, n_modes), c);
}

BasisSet small_annulus(int n_modes = 10, std::vector<int> ms = {0, 1, 2, 3})
{
    EigenSolveConfig c;
    c.n_modes = n_modes;
    return solve_basis_annulus(radial_mesh(n_modes), ms, c);
}

}  // namespace

TEST(RectangleBasis, VerifiesAndIsOrdered)
{
    BasisSet b = small_rect();
    ASSERT_EQ(b.size(), 8u);
    BasisReport r = verify_basis(b);
    EXPECT_TRUE(r.pass()) << r.summary();
    EXPECT_LE(r.max_l2_offdiag, 1e-8);
    EXPECT_LE(r.max_l2_diag_error, 1e-10);
    EXPECT_LE(r.max_h1_offdiag_rel, 1e-6);
    EXPECT_LE(r.max_rayleigh_rel, 1e-6);
    EXPECT_LE(r.max_traction, 1e-8);
    EXPECT_LE(r.max_trace_gram_diff, 1e-6);
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LE(b.modes[i - 1].lambda, b.modes[i].lambda);
    EXPECT_GT(b.modes[0].lambda, 0.0);
}

TEST(RectangleBasis, BoundaryTractionVanishesPointwise)
{
    BasisSet b = small_rect(4);
    auto pts = boundary_points(*b.mesh, 4);
    for (const auto& m : b.modes) {
        auto src = m.generator->source(m.coeffs);
        double sup = 0.0, worst = 0.0;
        for (const auto& v : m.field.values()) sup = std::max({sup, std::abs(v.a), std::abs(v.b), std::abs(v.c)});
        for (const auto& bp : pts) {
            Sym2 s = src->fn(bp.p.x, bp.p.y).v;
            worst = std::max(worst, std::hypot(s.a * bp.n.x + s.c * bp.n.y, s.c * bp.n.x + s.b * bp.n.y));
        }
        EXPECT_LE(worst, 1e-8 * sup);
    }
}

TEST(RectangleBasis, SignConventionLargestComponentPositive)
{
    BasisSet b = small_rect(6);
    for (const auto& m : b.modes) {
        double best = 0.0;
        for (const auto& v : m.field.values())
            for (double c : {v.a, v.b, v.c})
                if (std::abs(c) > std::abs(best)) best = c;
        EXPECT_GT(best, 0.0);
    }
}

TEST(RectangleBasis, EigenvaluesStableUnderRefinement)
{
    EigenSolveConfig c;
    c.n_modes = 6;
    BasisSet coarse = solve_basis_rectangle(rect_mesh(24, 6), c);
    BasisSet fine = solve_basis_rectangle(rect_mesh(48, 6), c);
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_LE(std::abs(coarse.modes[i].lambda - fine.modes[i].lambda), 1e-3 * fine.modes[i].lambda);
}

TEST(RectangleBasis, SquareSymmetryGivesDegeneratePairOrthogonalised)
{
    EigenSolveConfig c;
    c.n_modes = 4;
    BasisSet b = solve_basis_rectangle(rect_mesh(16, 4, 1.0), c);
    // lambda_2 = lambda_3 on the exact square; the pass leaves them orthogonal
    EXPECT_NEAR(b.modes[1].lambda, b.modes[2].lambda, 1e-6 * b.modes[1].lambda);
    EXPECT_LE(std::abs(l2_inner_tensor(b.modes[1].field, b.modes[2].field)), 1e-10);
}

TEST(RectangleBasis, TooManyModesRejected)
{
    EigenSolveConfig c;
    c.n_modes = 10;
    c.spectral_size = 4;
    EXPECT_THROW(solve_basis_rectangle(rect_mesh(16, 10), c), std::invalid_argument);
    EXPECT_THROW(solve_basis_rectangle(radial_mesh(4), c), std::invalid_argument);
}

TEST(Verify, CorruptedModeFailsL2Check)
{
    BasisSet b = small_rect(4);
    b.modes[0].field = b.modes[0].field.axpy(1e-3, b.modes[1].field);
    BasisReport r = verify_basis(b);
    EXPECT_FALSE(r.pass_l2);
    EXPECT_FALSE(r.pass());
}

TEST(AnnulusBasis, VerifiesWithDegeneratePairs)
{
    BasisSet b = small_annulus();
    BasisReport r = verify_basis(b);
    EXPECT_TRUE(r.pass()) << r.summary();
    EXPECT_LE(r.max_trace_gram_diff, 1e-6);
    int pairs = 0;
    for (std::size_t i = 1; i < b.size(); ++i) {
        const auto& t0 = *b.modes[i - 1].field.tag();
        const auto& t1 = *b.modes[i].field.tag();
        if (t0.m == t1.m && t0.m > 0 && t0.parity == Parity::Cos && t1.parity == Parity::Sin) {
            ++pairs;
            EXPECT_LE(std::abs(b.modes[i].lambda - b.modes[i - 1].lambda), 1e-6 * b.modes[i].lambda);
        }
    }
    EXPECT_GT(pairs, 0);
}

TEST(AnnulusBasis, AxisymmetricModesDecouple)
{
    BasisSet b = small_annulus(6, {0});
    for (const auto& m : b.modes) {
        double shear = 0.0, normal = 0.0;
        for (const auto& v : m.field.values()) {
            shear = std::max(shear, std::abs(v.c));
            normal = std::max({normal, std::abs(v.a), std::abs(v.b)});
        }
        EXPECT_TRUE(shear <= 1e-12 * normal || normal <= 1e-12 * shear) << shear << " " << normal;
    }
}

TEST(AnnulusBasis, MergeOrderIsLambdaThenWavenumberThenParity)
{
    BasisSet b = small_annulus(12, {3, 1, 0, 2});
    for (std::size_t i = 1; i < b.size(); ++i) {
        const auto& x = b.modes[i - 1];
        const auto& y = b.modes[i];
        EXPECT_LE(x.lambda, y.lambda);
        if (x.lambda == y.lambda) {
            EXPECT_LE(x.field.tag()->m, y.field.tag()->m);
        }
    }
}

TEST(BumpBasis, SingleModeIsProductOfClampedQuartics)
{
    auto mesh = build_rectangle_mesh(Rectangle{1.0, 1.0}, 8, 8, {}, 4);
    BasisSet b = airy_bump_basis(mesh, 1);
    ASSERT_EQ(b.size(), 1u);
    auto src = b.modes[0].generator->source(b.modes[0].coeffs);
    EXPECT_NEAR(src->fn(0.5, 0.5).v.c, 0.0, 1e-14);
    // psi = x^2 (1-x)^2 y^2 (1-y)^2, sigma = (psi_yy, psi_xx, -psi_xy) up to one scale factor
    auto q = [](double t) { return t * t * (1 - t) * (1 - t); };
    auto q1 = [](double t) { return 2 * t * (1 - t) * (1 - 2 * t); };
    auto q2 = [](double t) { return 2 - 12 * t + 12 * t * t; };
    double scale = 0.0;
    for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.1, 0.2}, std::pair{0.7, 0.45}}) {
        Sym2 s = src->fn(x, y).v;
        Sym2 e{q(x) * q2(y), q2(x) * q(y), -q1(x) * q1(y)};
        if (scale == 0.0) scale = s.a / e.a;
        EXPECT_NEAR(s.a, scale * e.a, 1e-10 * std::abs(scale));
        EXPECT_NEAR(s.b, scale * e.b, 1e-10 * std::abs(scale));
        EXPECT_NEAR(s.c, scale * e.c, 1e-10 * std::abs(scale));
    }
}

TEST(BumpBasis, ModesAreEquilibratedTractionFreeOrthonormal)
{
    auto mesh = build_rectangle_mesh(Rectangle{1.0, 1.0}, 16, 16, {}, 4);
    BasisSet b = airy_bump_basis(mesh, 36);
    EXPECT_EQ(b.size(), 36u);
    BasisReport r = verify_basis(b);
    EXPECT_TRUE(r.pass()) << r.summary();
    EXPECT_LE(r.max_traction, 1e-10);
    EXPECT_LE(r.max_equilibrium, 1e-8);
}

TEST(BumpBasis, ProjectionResidualOfFirstEigenmodeDecreases)
{
    EigenSolveConfig c;
    c.n_modes = 1;
    auto mesh = build_rectangle_mesh(Rectangle{1.0, 1.01}, 16, 16, {}, 6);
    BasisSet eig = solve_basis_rectangle(mesh, c);
    const auto& phi = eig.modes[0].field;
    double prev = 2.0;
    for (int n : {4, 16, 36}) {
        BasisSet bump = airy_bump_basis(mesh, n);
        double proj = 0.0;
        for (const auto& m : bump.modes) proj += std::pow(l2_inner_tensor(phi, m.field), 2);
        const double res = std::sqrt(std::max(0.0, 1.0 - proj));
        EXPECT_LT(res, prev) << "n=" << n;
        prev = res;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(BasisCache, RoundTripPreservesModesAndProvenance)
{
    BasisSet b = small_annulus(6, {0, 2});
    const auto path = (std::filesystem::temp_directory_path() / "sb_basis_test.sbb").string();
    save_basis(b, path, true);
    std::string text = read_file(path);
    EXPECT_EQ(text.rfind("SBBASIS 1\n", 0), 0u);
    BasisSet back = load_basis(path);
    ASSERT_EQ(back.size(), b.size());
    EXPECT_EQ(back.provenance.hash(), b.provenance.hash());
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_EQ(back.modes[i].lambda, b.modes[i].lambda);
        EXPECT_EQ(back.modes[i].field.tag(), b.modes[i].field.tag());
        for (std::size_t k = 0; k < b.modes[i].field.size(); k += 17)
            EXPECT_NEAR(back.modes[i].field.values()[k].a, b.modes[i].field.values()[k].a, 1e-13);
    }
    EXPECT_TRUE(verify_basis(back).pass());
    EXPECT_THROW(basis_from_string("SBBASIS 9\n"), std::runtime_error);
}

TEST(BasisSet, TruncatedAndCombination)
{
    BasisSet b = small_rect(5);
    BasisSet t = b.truncated(3);
    EXPECT_EQ(t.size(), 3u);
    Eigen::VectorXd a(2);
    a << 0.5, -2.0;
    auto c = b.combination(a);
    auto expect = b.modes[0].field.scaled(0.5).axpy(-2.0, b.modes[1].field);
    for (std::size_t i = 0; i < c.size(); i += 11) {
        EXPECT_NEAR(c.values()[i].a, expect.values()[i].a, 1e-12);
        EXPECT_NEAR(c.values()[i].c, expect.values()[i].c, 1e-12);
    }
    Point2 p{0.37, 0.61};
    EXPECT_NEAR(c.evaluate(p.x, p.y).v.b,
                0.5 * b.modes[0].generator->evaluate(b.modes[0].coeffs, p.x, p.y).v.b -
                    2.0 * b.modes[1].generator->evaluate(b.modes[1].coeffs, p.x, p.y).v.b,
                1e-12);
}
