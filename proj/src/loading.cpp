#include "stressbasis/loading.hpp"

#include "stressbasis/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sb {

Vec2 LoadingSpec::traction(const std::string& boundary_tag, double x, double y) const
{
    Vec2 t;
    for (const auto& b : tractions)
        if (b.tag == boundary_tag) {
            Vec2 v = b.traction(x, y);
            t.x += v.x;
            t.y += v.y;
        }
    return t;
}

std::vector<BoundaryPoint> boundary_points(const Mesh& mesh, int order)
{
    std::vector<BoundaryPoint> out;
    if (mesh.kind == MeshKind::Radial) {
        out.push_back({"inner", {mesh.xlines.front(), 0.0}, {-1.0, 0.0}, 1.0});
        out.push_back({"outer", {mesh.xlines.back(), 0.0}, {1.0, 0.0}, 1.0});
        return out;
    }
    QuadratureRule g = gauss_legendre(order);
    const auto& r = std::get<Rectangle>(mesh.domain);
    for (const auto& e : mesh.boundary) {
        Point2 a = mesh.nodes[e.n1], b = mesh.nodes[e.n2];
        Vec2 n;
        if (e.tag == "bottom") n = {0, -1};
        else if (e.tag == "top") n = {0, 1};
        else if (e.tag == "left") n = {-1, 0};
        else if (e.tag == "right") n = {1, 0};
        else throw std::invalid_argument("unknown rectangle boundary tag " + e.tag);
        double len = std::hypot(b.x - a.x, b.y - a.y);
        for (std::size_t k = 0; k < g.points.size(); ++k) {
            double s = 0.5 * (1.0 + g.points[k]);
            Point2 p{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
            // keep boundary points exactly on the side
            if (e.tag == "bottom") p.y = 0.0;
            if (e.tag == "top") p.y = r.Ly;
            if (e.tag == "left") p.x = 0.0;
            if (e.tag == "right") p.x = r.Lx;
            out.push_back({e.tag, p, n, 0.5 * len * g.weights[k]});
        }
    }
    return out;
}

namespace {

std::pair<double, double> angular(const AzimuthalTag& tag, double theta)
{
    if (tag.m == 0) return {1.0, 1.0};
    if (tag.parity == Parity::Cos) return {std::cos(tag.m * theta), std::sin(tag.m * theta)};
    return {std::sin(tag.m * theta), -std::cos(tag.m * theta)};
}

}  // namespace

Resultants compute_resultants(const LoadingSpec& loading, const Mesh& mesh)
{
    Resultants res;
    if (mesh.kind == MeshKind::Radial) {
        if (!loading.tag) throw std::invalid_argument("radial loading requires a wavenumber tag");
        if (loading.body) throw std::invalid_argument("body forces are not supported on radial grids");
        const int nt = 256;
        for (const auto& bp : boundary_points(mesh, 1)) {
            Resultant r{bp.tag};
            double rad = bp.p.x;
            Vec2 amp = loading.traction(bp.tag, rad, 0.0);
            for (int k = 0; k < nt; ++k) {
                double th = 2.0 * std::numbers::pi * k / nt;
                auto [cm, sm] = angular(*loading.tag, th);
                double tr = amp.x * cm, tt = amp.y * sm;
                double tx = tr * std::cos(th) - tt * std::sin(th);
                double ty = tr * std::sin(th) + tt * std::cos(th);
                double ds = rad * 2.0 * std::numbers::pi / nt;
                r.fx += tx * ds;
                r.fy += ty * ds;
                r.moment += rad * tt * ds;
            }
            res.boundaries.push_back(r);
        }
    } else {
        const auto& rect = std::get<Rectangle>(mesh.domain);
        const double xc = 0.5 * rect.Lx, yc = 0.5 * rect.Ly;
        for (std::string tag : {"bottom", "right", "top", "left"}) res.boundaries.push_back({tag});
        for (const auto& bp : boundary_points(mesh, std::max(mesh.quad_order, 6))) {
            Vec2 t = loading.traction(bp.tag, bp.p.x, bp.p.y);
            for (auto& r : res.boundaries)
                if (r.tag == bp.tag) {
                    r.fx += bp.w * t.x;
                    r.fy += bp.w * t.y;
                    r.moment += bp.w * ((bp.p.x - xc) * t.y - (bp.p.y - yc) * t.x);
                }
        }
        if (loading.body) {
            res.body.tag = "body";
            for (std::size_t i = 0; i < mesh.num_qp(); ++i) {
                Point2 p = mesh.qp(i);
                Vec2 b = loading.body->force(p.x, p.y);
                double w = mesh.qweight(i);
                res.body.fx += w * b.x;
                res.body.fy += w * b.y;
                res.body.moment += w * ((p.x - xc) * b.y - (p.y - yc) * b.x);
            }
        }
    }
    res.total = res.body;
    res.total.tag = "total";
    for (const auto& r : res.boundaries) {
        res.total.fx += r.fx;
        res.total.fy += r.fy;
        res.total.moment += r.moment;
    }
    return res;
}

void check_self_equilibrated(const LoadingSpec& loading, const Mesh& mesh, double tol)
{
    Resultants r = compute_resultants(loading, mesh);
    double worst = std::max({std::abs(r.total.fx), std::abs(r.total.fy), std::abs(r.total.moment)});
    if (!(worst <= tol))
        throw std::invalid_argument("loading is not self-equilibrated (net force/moment " + std::to_string(worst) + ")");
}

EquilibriumResidual equilibrium_residual(const SymTensorField2& A, const LoadingSpec& loading)
{
    const Mesh& mesh = *A.mesh();
    if (!A.has_gradient() && !A.source()) throw std::invalid_argument("equilibrium_residual needs field derivatives");
    if (loading.body)
        for (const auto& j : loading.body->jumps)
            if (!mesh.has_line(j.axis, j.value))
                throw std::invalid_argument("body-force discontinuity not aligned with mesh lines");
    if (A.source())
        for (const auto& j : A.source()->jumps)
            if (!mesh.has_line(j.axis, j.value))
                throw std::invalid_argument("field discontinuity not aligned with mesh lines");

    EquilibriumResidual out;
    out.field_norm = l2_norm(A);
    double interior = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        Point2 p = mesh.qp(i);
        Sym2 v = A.values()[i], g1, g2;
        if (A.has_gradient()) {
            g1 = A.d1()[i];
            g2 = A.d2()[i];
        } else {
            Jet j = A.evaluate(p.x, p.y);
            g1 = j.d1;
            g2 = j.d2;
        }
        double rx, ry;
        if (mesh.kind == MeshKind::Radial) {
            const double m = A.tag()->m, r = p.x;
            rx = g1.a + (v.a - v.b + m * v.c) / r;
            ry = g1.c + (2.0 * v.c - m * v.b) / r;
        } else {
            rx = g1.a + g2.c;
            ry = g1.c + g2.b;
            if (loading.body) {
                Vec2 b = loading.body->force(p.x, p.y);
                rx += b.x;
                ry += b.y;
            }
        }
        interior += mesh.qweight(i) * (rx * rx + ry * ry);
    }
    if (A.tag()) interior *= theta_weight(*A.tag());
    out.interior_norm = std::sqrt(interior);

    if (A.source()) {
        for (const auto& bp : boundary_points(mesh, mesh.quad_order)) {
            Sym2 s = A.evaluate(bp.p.x, bp.p.y).v;
            Vec2 t = loading.traction(bp.tag, bp.p.x, bp.p.y);
            double ex, ey;
            if (mesh.kind == MeshKind::Radial) {
                ex = bp.n.x * s.a - t.x;  // radial amplitude
                ey = bp.n.x * s.c - t.y;  // shear amplitude
            } else {
                ex = s.a * bp.n.x + s.c * bp.n.y - t.x;
                ey = s.c * bp.n.x + s.b * bp.n.y - t.y;
            }
            out.boundary_mismatch = std::max(out.boundary_mismatch, std::hypot(ex, ey));
        }
    } else {
        throw std::invalid_argument("equilibrium_residual needs a pointwise evaluator for boundary traction");
    }
    return out;
}

}  // namespace sb
