#include "stressbasis/particular.hpp"

#include "stressbasis/util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sb {

namespace {

double field_sup(const SymTensorField2& f)
{
    double s = 0.0;
    for (const auto& v : f.values()) s = std::max({s, std::abs(v.a), std::abs(v.b), std::abs(v.c)});
    return s;
}

const Rectangle& unit_square(const MeshPtr& mesh, const char* what)
{
    if (!mesh || mesh->kind != MeshKind::Rectangle) throw std::invalid_argument(std::string(what) + " needs a rectangle mesh");
    const auto& r = std::get<Rectangle>(mesh->domain);
    if (std::abs(r.Lx - 1.0) > 1e-12 || std::abs(r.Ly - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(what) + " is defined on the unit square");
    return r;
}

void require_line(const MeshPtr& mesh, char axis, double v, const char* what)
{
    if (!mesh->has_line(axis, v))
        throw std::invalid_argument(std::string(what) + " needs a mesh line at " + axis + "=" + fmt17(v));
}

ParticularStress finish(SourcePtr src, const MeshPtr& mesh, std::optional<AzimuthalTag> tag, LoadingSpec loading,
                        std::string construction)
{
    ParticularStress p{sample(src, mesh, tag, true), std::move(loading), std::move(construction)};
    check_particular(p.field, p.loading);
    return p;
}

}  // namespace

void check_particular(const SymTensorField2& field, const LoadingSpec& loading, double tol)
{
    EquilibriumResidual r = equilibrium_residual(field, loading);
    const double scale = std::max(1.0, field_sup(field));
    if (!(r.interior_norm <= tol * std::max(r.field_norm, 1e-300)) && r.interior_norm > tol)
        throw std::invalid_argument("particular stress is not in equilibrium: interior residual " +
                                    fmt17(r.interior_norm) + " (field norm " + fmt17(r.field_norm) + ")");
    if (!(r.boundary_mismatch <= tol * scale))
        throw std::invalid_argument("particular stress does not match the loading: boundary mismatch " +
                                    fmt17(r.boundary_mismatch));
}

AiryCoefficients axisym_airy_coefficients(double ra, double rb, double p_in, double p_out)
{
    if (!(ra > 0.0 && rb > ra)) throw std::invalid_argument("annulus radii must satisfy 0 < r_a < r_b");
    AiryCoefficients c;
    c.c1 = (p_out - p_in) * ra * rb / (rb - ra);
    c.c2 = 0.5 * (-p_out - c.c1 / rb);
    return c;
}

ParticularStress axisym_airy_particular(const MeshPtr& mesh, double p_in, double p_out)
{
    if (!mesh || mesh->kind != MeshKind::Radial) throw std::invalid_argument("axisym_airy_particular needs a radial grid");
    const auto& ann = std::get<Annulus>(mesh->domain);
    const AiryCoefficients c = axisym_airy_coefficients(ann.ra, ann.rb, p_in, p_out);
    auto src = std::make_shared<TensorSource>(TensorSource{
        [c](double r, double) {
            Jet j;
            j.v = {c.c1 / r + 2.0 * c.c2, 2.0 * c.c2, 0.0};
            j.d1 = {-c.c1 / (r * r), 0.0, 0.0};
            return j;
        },
        {}});
    LoadingSpec L;
    L.tag = AzimuthalTag{0, Parity::Cos};
    L.tractions.push_back({"inner", [p_in](double, double) { return Vec2{p_in, 0.0}; }, "pressure " + fmt17(p_in)});
    L.tractions.push_back({"outer", [p_out](double, double) { return Vec2{-p_out, 0.0}; }, "pressure " + fmt17(p_out)});
    L.description = "axisymmetric pressure p_in=" + fmt17(p_in) + " p_out=" + fmt17(p_out);
    return finish(src, mesh, L.tag, L, "axisym_airy c1=" + fmt17(c.c1) + " c2=" + fmt17(c.c2));
}

BandProfile band_profile_from_string(const std::string& s)
{
    if (s == "discontinuous") return BandProfile::Discontinuous;
    if (s == "quartic") return BandProfile::Quartic;
    throw std::invalid_argument("unknown band profile '" + s + "' (expected discontinuous or quartic)");
}

double band_profile_value(BandProfile profile, double x)
{
    if (x < 0.25 || x > 0.75) return 0.0;
    if (profile == BandProfile::Discontinuous) return 1.0;
    const double u = (x - 0.25) * (x - 0.75);
    return 256.0 * u * u;
}

namespace {

double band_profile_slope(BandProfile profile, double x)
{
    if (profile == BandProfile::Discontinuous || x < 0.25 || x > 0.75) return 0.0;
    const double u = (x - 0.25) * (x - 0.75);
    return 512.0 * u * (2.0 * x - 1.0);
}

}  // namespace

ParticularStress band_pressure_particular(const MeshPtr& mesh, double p, BandProfile profile)
{
    unit_square(mesh, "band_pressure_particular");
    require_line(mesh, 'x', 0.25, "band_pressure_particular");
    require_line(mesh, 'x', 0.75, "band_pressure_particular");
    std::vector<FeatureLine> jumps = {{'x', 0.25}, {'x', 0.75}};
    auto src = std::make_shared<TensorSource>(TensorSource{
        [p, profile](double x, double) {
            Jet j;
            j.v = {0.0, -p * band_profile_value(profile, x), 0.0};
            j.d1 = {0.0, -p * band_profile_slope(profile, x), 0.0};
            return j;
        },
        jumps});
    LoadingSpec L;
    L.tractions.push_back(
        {"top", [p, profile](double x, double) { return Vec2{0.0, -p * band_profile_value(profile, x)}; }, "band pressure"});
    L.tractions.push_back(
        {"bottom", [p, profile](double x, double) { return Vec2{0.0, p * band_profile_value(profile, x)}; }, "band pressure"});
    const std::string name = profile == BandProfile::Discontinuous ? "discontinuous" : "quartic";
    L.description = "band pressure p=" + fmt17(p) + " profile=" + name;
    return finish(src, mesh, std::nullopt, L, "band " + name);
}

double gravity_potential(double rho1, double rho2, double g, double y)
{
    return y < 0.5 ? rho2 * g * y : 0.5 * (rho2 - rho1) * g + rho1 * g * y;
}

ParticularStress gravity_particular(const MeshPtr& mesh, double rho1, double rho2, double g)
{
    unit_square(mesh, "gravity_particular");
    require_line(mesh, 'y', 0.5, "gravity_particular");
    if (!(rho1 > 0.0 && rho2 > 0.0)) throw std::invalid_argument("densities must be positive");
    std::vector<FeatureLine> jumps = {{'y', 0.5}};
    auto src = std::make_shared<TensorSource>(TensorSource{
        [=](double, double y) {
            Jet j;
            if (y <= 0.5) {
                j.v = {0.0, g * (rho2 * y - 0.5 * (rho1 + rho2)), 0.0};
                j.d2 = {0.0, g * rho2, 0.0};
            } else {
                j.v = {0.0, g * rho1 * (y - 1.0), 0.0};
                j.d2 = {0.0, g * rho1, 0.0};
            }
            return j;
        },
        jumps});
    LoadingSpec L;
    const double reaction = 0.5 * (rho1 + rho2) * g;
    L.tractions.push_back({"bottom", [reaction](double, double) { return Vec2{0.0, reaction}; }, "uniform table reaction"});
    BodyForce b;
    b.potential = [=](double, double y) { return gravity_potential(rho1, rho2, g, y); };
    b.force = [=](double, double y) { return Vec2{0.0, -(y < 0.5 ? rho2 : rho1) * g}; };
    b.jumps = jumps;
    b.description = "gravity g=" + fmt17(g) + " rho1=" + fmt17(rho1) + " rho2=" + fmt17(rho2);
    L.body = b;
    L.description = "two-density block on a table";
    return finish(src, mesh, std::nullopt, L, "gravity");
}

ParticularStress annulus_m1_particular(const MeshPtr& mesh)
{
    if (!mesh || mesh->kind != MeshKind::Radial) throw std::invalid_argument("annulus_m1_particular needs a radial grid");
    const auto& ann = std::get<Annulus>(mesh->domain);
    if (std::abs(ann.ra - 0.1) > 1e-12 || std::abs(ann.rb - 0.3) > 1e-12)
        throw std::invalid_argument("annulus_m1_particular coefficients are fixed for r_a = 0.1, r_b = 0.3");
    auto src = std::make_shared<TensorSource>(TensorSource{
        [](double r, double) {
            const double s = r / 3.0 - 13.0 / 120.0 + 0.00075 / (r * r);
            const double ds = 1.0 / 3.0 - 0.0015 / (r * r * r);
            Jet j;
            j.v = {s + 0.1 / r, r - 13.0 / 60.0, s};
            j.d1 = {ds - 0.1 / (r * r), 1.0, ds};
            return j;
        },
        {}});
    LoadingSpec L;
    L.tag = AzimuthalTag{1, Parity::Cos};
    L.tractions.push_back({"inner", [](double, double) { return Vec2{-1.0, 0.0}; }, "sigma_rr = cos(theta)"});
    L.tractions.push_back({"outer", [](double, double) { return Vec2{1.0 / 3.0, 0.0}; }, "sigma_rr = cos(theta)/3"});
    L.description = "hole with net force, sigma_rr = cos(theta) at r_a and cos(theta)/3 at r_b";
    return finish(src, mesh, L.tag, L, "annulus_m1");
}

ParticularStress oracle_as_particular(const SymTensorField2& field, const LoadingSpec& loading,
                                      const std::string& construction)
{
    if (field.tag() != loading.tag) throw std::invalid_argument("field and loading carry different wavenumber tags");
    ParticularStress p{field, loading, construction};
    check_particular(p.field, p.loading);
    return p;
}

double trace_laplacian_norm(const SymTensorField2& field, double h)
{
    const auto& src = field.source();
    if (!src) throw std::invalid_argument("trace_laplacian_norm needs a field evaluator");
    const Mesh& mesh = *field.mesh();
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.num_qp(); ++i) {
        Point2 p = mesh.qp(i);
        double lap;
        if (mesh.kind == MeshKind::Radial) {
            const double m = field.tag()->m;
            Jet j = src->fn(p.x, 0.0);
            double t2 = (src->fn(p.x + h, 0.0).d1.trace() - src->fn(p.x - h, 0.0).d1.trace()) / (2.0 * h);
            lap = t2 + j.d1.trace() / p.x - m * m * j.v.trace() / (p.x * p.x);
        } else {
            double txx = (src->fn(p.x + h, p.y).d1.trace() - src->fn(p.x - h, p.y).d1.trace()) / (2.0 * h);
            double tyy = (src->fn(p.x, p.y + h).d2.trace() - src->fn(p.x, p.y - h).d2.trace()) / (2.0 * h);
            lap = txx + tyy;
        }
        s += mesh.qweight(i) * lap * lap;
    }
    if (field.tag()) s *= theta_weight(*field.tag());
    return std::sqrt(s);
}

}  // namespace sb
