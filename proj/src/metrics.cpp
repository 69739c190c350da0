#include "stressbasis/metrics.hpp"

#include "stressbasis/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sb {

double approximation_error(const SymTensorField2& sigma_true, const SymTensorField2& sigma_N, const Material& m)
{
    require_compatible(sigma_true, sigma_N);
    const double den = strain_energy(m, sigma_true);
    if (!(den > 0.0)) throw std::invalid_argument("approximation_error: reference stress has zero energy");
    return std::sqrt(std::max(0.0, strain_energy(m, sigma_true - sigma_N)) / den);
}

double trace_energy(const SymTensorField2& s)
{
    ScalarField t = planar_trace(s);
    return l2_inner_scalar(t, t);
}

CesaroLoop circle_loop(double radius, int segments, Point2 X)
{
    if (segments < 3) throw std::invalid_argument("a loop needs at least three segments");
    CesaroLoop l;
    l.X = X;
    for (int k = 0; k < segments; ++k) {
        const double t = 2.0 * std::numbers::pi * k / segments;
        l.points.push_back({radius * std::cos(t), radius * std::sin(t)});
    }
    return l;
}

void validate_loop(const CesaroLoop& loop, const Annulus& ann)
{
    const auto& p = loop.points;
    if (p.size() < 3) throw std::invalid_argument("loop needs at least three vertices");
    double area = 0.0, winding = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Point2& a = p[k];
        const Point2& b = p[(k + 1) % p.size()];
        area += a.x * b.y - b.x * a.y;
        winding += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
        // the segment must stay inside the material: check its closest approach to the centre
        const double dx = b.x - a.x, dy = b.y - a.y;
        const double t = std::clamp(-(a.x * dx + a.y * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        const double rmin = std::hypot(a.x + t * dx, a.y + t * dy);
        const double rmax = std::max(std::hypot(a.x, a.y), std::hypot(b.x, b.y));
        if (rmin <= ann.ra || rmax >= ann.rb) throw std::invalid_argument("loop leaves the annulus");
    }
    if (!(area > 0.0)) throw std::invalid_argument("loop must be positively oriented");
    if (std::abs(winding / (2.0 * std::numbers::pi) - 1.0) > 1e-6) throw std::invalid_argument("loop must wind once around the hole");
}

namespace {

/// Tensor strain and its gradient at a Cartesian point; g[l] is the derivative along x_l.
void strain_jet(const SymTensorField2& s, const Material& m, double x, double y, double e[2][2], double g[2][2][2])
{
    Jet j;
    if (s.mesh()->kind == MeshKind::Radial) {
        const double r = std::hypot(x, y), th = std::atan2(y, x);
        j = polar_to_cartesian(s.source()->fn(r, 0.0), *s.tag(), r, th);
    } else {
        j = s.source()->fn(x, y);
    }
    Sym2 ev = m.strain(j.v, x, y), ex = m.strain(j.d1, x, y), ey = m.strain(j.d2, x, y);
    auto fill = [](const Sym2& v, double t[2][2]) {
        t[0][0] = v.a;
        t[1][1] = v.b;
        t[0][1] = t[1][0] = v.c;
    };
    fill(ev, e);
    double tx[2][2], ty[2][2];
    fill(ex, tx);
    fill(ey, ty);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            g[i][k][0] = tx[i][k];
            g[i][k][1] = ty[i][k];
        }
}

}  // namespace

std::array<double, 2> cesaro_diagnostic(const SymTensorField2& s, const CesaroLoop& loop, const Material& m,
                                        int gauss_per_segment)
{
    if (!s.source()) throw std::invalid_argument("cesaro_diagnostic needs a field evaluator");
    if (!m.homogeneous()) throw std::invalid_argument("cesaro_diagnostic needs a homogeneous material");
    if (s.mesh()->kind == MeshKind::Radial) validate_loop(loop, std::get<Annulus>(s.mesh()->domain));
    const QuadratureRule q = gauss_legendre(gauss_per_segment);
    std::array<double, 2> F{0.0, 0.0};
    const auto& p = loop.points;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Point2& a = p[k];
        const Point2& b = p[(k + 1) % p.size()];
        const double dx[2] = {b.x - a.x, b.y - a.y};
        for (std::size_t qi = 0; qi < q.points.size(); ++qi) {
            const double t = 0.5 * (q.points[qi] + 1.0), w = 0.5 * q.weights[qi];
            const double x[2] = {a.x + t * dx[0], a.y + t * dx[1]};
            double e[2][2], g[2][2][2];
            strain_jet(s, m, x[0], x[1], e, g);
            const double X[2] = {loop.X.x, loop.X.y};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double U = e[i][j];
                    for (int l = 0; l < 2; ++l) U += (X[l] - x[l]) * (g[i][j][l] - g[l][j][i]);
                    F[static_cast<std::size_t>(i)] += w * U * dx[j];
                }
        }
    }
    return F;
}

}  // namespace sb
