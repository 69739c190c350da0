#include "stressbasis/oracles.hpp"

#include "stressbasis/quadrature.hpp"
#include "stressbasis/util.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace sb {

SymTensorField2 OracleSolution::on(const MeshPtr& mesh, bool with_gradient) const
{
    return sample(source, mesh, tag, with_gradient);
}

LameCoefficients lame_coefficients(double ra, double rb, double p)
{
    if (!(ra > 0.0 && rb > ra)) throw std::invalid_argument("annulus radii must satisfy 0 < r_a < r_b");
    LameCoefficients c;
    c.B = -p * ra * ra * rb * rb / (rb * rb - ra * ra);
    c.A = -c.B / (rb * rb);
    return c;
}

OracleSolution lame_oracle(double ra, double rb, double p, const Material& m)
{
    if (!(m.kind == Material::Kind::Isotropic && m.homogeneous()))
        throw std::invalid_argument("lame_oracle needs a homogeneous isotropic material");
    const LameCoefficients c = lame_coefficients(ra, rb, p);
    OracleSolution o;
    o.source = std::make_shared<TensorSource>(TensorSource{
        [c](double r, double) {
            Jet j;
            const double r2 = r * r, r3 = r2 * r;
            j.v = {c.A + c.B / r2, c.A - c.B / r2, 0.0};
            j.d1 = {-2.0 * c.B / r3, 2.0 * c.B / r3, 0.0};
            return j;
        },
        {}});
    o.tag = AzimuthalTag{0, Parity::Cos};
    o.method = "analytic";
    o.resolution = "closed form A=" + fmt17(c.A) + " B=" + fmt17(c.B);
    return o;
}

namespace {

using State = std::array<double, 4>;  // (sigma_rr, sigma_rt, sigma_tt, sigma_tt') profiles

/// Radial equilibrium plus the trace-harmonic condition for m = 1.
State m1_rhs(const State& y, double r)
{
    const double A = y[0], S = y[1], B = y[2], q = y[3];
    const double dA = -(S + A - B) / r;
    const double dS = -(2.0 * S - B) / r;
    const double ddA = -(dS + dA - q) / r + (S + A - B) / (r * r);
    const double dq = -ddA - (dA + q) / r + (A + B) / (r * r);
    return {dA, dS, q, dq};
}

struct M1Path {
    double ra = 0.0, h = 0.0;
    std::vector<State> y, dy;

    State at(double r) const
    {
        const int n = static_cast<int>(y.size()) - 1;
        int k = std::clamp(static_cast<int>((r - ra) / h), 0, n - 1);
        const double t = (r - (ra + k * h)) / h;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        State s;
        for (int c = 0; c < 4; ++c)
            s[static_cast<std::size_t>(c)] = h00 * y[k][c] + h10 * h * dy[k][c] + h01 * y[k + 1][c] + h11 * h * dy[k + 1][c];
        return s;
    }
};

M1Path shoot(const State& y0, double ra, double rb, int steps)
{
    namespace ode = boost::numeric::odeint;
    M1Path p;
    p.ra = ra;
    p.h = (rb - ra) / steps;
    State y = y0;
    ode::runge_kutta4<State> stepper;
    auto sys = [](const State& s, State& ds, double r) { ds = m1_rhs(s, r); };
    p.y.push_back(y);
    for (int k = 0; k < steps; ++k) {
        stepper.do_step(sys, y, ra + k * p.h, p.h);
        p.y.push_back(y);
    }
    for (int k = 0; k <= steps; ++k) p.dy.push_back(m1_rhs(p.y[static_cast<std::size_t>(k)], ra + k * p.h));
    return p;
}

}  // namespace

OracleSolution annulus_m1_oracle(double ra, double rb, double nu, double Y, M1OracleReport* report)
{
    if (!(ra > 0.0 && rb > ra)) throw std::invalid_argument("annulus radii must satisfy 0 < r_a < r_b");
    if (!(nu >= 0.0 && nu <= 0.49) || !(Y > 0.0)) throw std::invalid_argument("invalid material constants");
    const int steps = 4000;
    // fundamental solutions from unit initial states
    std::array<M1Path, 4> basis;
    for (int c = 0; c < 4; ++c) {
        State e{0, 0, 0, 0};
        e[static_cast<std::size_t>(c)] = 1.0;
        basis[static_cast<std::size_t>(c)] = shoot(e, ra, rb, steps);
    }
    // conditions on the initial state z: A(ra)=1, S(ra)=0, A(rb)=ra/rb, S(rb)=0, compatibility at ra
    Eigen::Matrix<double, 5, 4> C = Eigen::Matrix<double, 5, 4>::Zero();
    Eigen::Matrix<double, 5, 1> rhs;
    rhs << 1.0, 0.0, ra / rb, 0.0, 0.0;
    C(0, 0) = 1.0;
    C(1, 1) = 1.0;
    for (int c = 0; c < 4; ++c) {
        const State& end = basis[static_cast<std::size_t>(c)].y.back();
        C(2, c) = end[0];
        C(3, c) = end[1];
        State e{0, 0, 0, 0};
        e[static_cast<std::size_t>(c)] = 1.0;
        State d = m1_rhs(e, ra);
        const double k = (1.0 + nu) / Y;
        const double err = k * ((1.0 - nu) * e[0] - nu * e[2]);
        const double ert = k * e[1];
        const double ett_p = k * ((1.0 - nu) * d[2] - nu * d[0]);
        C(4, c) = 2.0 * ert + err - ra * ett_p;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    if (rank != 4) throw std::runtime_error("m=1 boundary-value problem is rank deficient (rank " + std::to_string(rank) + ")");
    // solve with the outer shear condition dropped; it follows from the net-force balance
    Eigen::Matrix4d C4;
    Eigen::Vector4d r4;
    C4 << C.row(0), C.row(1), C.row(2), C.row(4);
    r4 << rhs(0), rhs(1), rhs(2), rhs(4);
    Eigen::Vector4d z = C4.fullPivLu().solve(r4);
    const double dropped = (C.row(3) * z)(0);
    const double residual = (C * z - rhs).norm();
    if (!(std::abs(dropped) < 1e-8)) throw std::runtime_error("m=1 solution violates the outer shear condition");
    if (report) *report = {rank, residual, dropped};

    auto path = std::make_shared<M1Path>(shoot({z(0), z(1), z(2), z(3)}, ra, rb, steps));
    OracleSolution o;
    o.source = std::make_shared<TensorSource>(TensorSource{
        [path](double r, double) {
            State s = path->at(r);
            State d = m1_rhs(s, r);
            Jet j;
            j.v = {s[0], s[2], s[1]};
            j.d1 = {d[0], d[2], d[1]};
            return j;
        },
        {}});
    o.tag = AzimuthalTag{1, Parity::Cos};
    o.method = "ode-bvp";
    o.resolution = "shooting rk4 steps=" + std::to_string(steps) + " rank=" + std::to_string(rank) +
                   " dropped=outer-shear residual=" + fmt17(residual);
    return o;
}

namespace {

struct Lagrange1D {
    // quadratic Lagrange functions on [-1, 1] at nodes -1, 0, 1
    static void eval(double t, double v[3], double d[3], double dd[3])
    {
        v[0] = 0.5 * t * (t - 1.0);
        v[1] = 1.0 - t * t;
        v[2] = 0.5 * t * (t + 1.0);
        d[0] = t - 0.5;
        d[1] = -2.0 * t;
        d[2] = t + 0.5;
        dd[0] = 1.0;
        dd[1] = -2.0;
        dd[2] = 1.0;
    }
};

Eigen::Matrix3d stiffness_matrix(const Material& m, double x, double y)
{
    auto K = m.energy_matrix(x, y);
    Eigen::Matrix3d C = Eigen::Map<const Eigen::Matrix3d>(K.data());
    return C.inverse();
}

class FemSolution {
public:
    std::vector<double> xl, yl;  // element lines
    Eigen::VectorXd u;           // 2 dofs per node, node index j * cols + i
    Material mat;
    int cols = 0;

    int locate(const std::vector<double>& lines, double v, std::vector<int>& out) const
    {
        out.clear();
        const int n = static_cast<int>(lines.size()) - 1;
        auto it = std::upper_bound(lines.begin(), lines.end(), v);
        int e = std::clamp(static_cast<int>(it - lines.begin()) - 1, 0, n - 1);
        out.push_back(e);
        const double tol = 1e-12 * (lines.back() - lines.front());
        if (e > 0 && std::abs(v - lines[static_cast<std::size_t>(e)]) <= tol) out.push_back(e - 1);
        if (e < n - 1 && std::abs(v - lines[static_cast<std::size_t>(e + 1)]) <= tol) out.push_back(e + 1);
        return static_cast<int>(out.size());
    }

    Jet element_jet(int ex, int ey, double x, double y) const
    {
        const double x0 = xl[static_cast<std::size_t>(ex)], x1 = xl[static_cast<std::size_t>(ex + 1)];
        const double y0 = yl[static_cast<std::size_t>(ey)], y1 = yl[static_cast<std::size_t>(ey + 1)];
        const double hx = x1 - x0, hy = y1 - y0;
        const double xi = 2.0 * (x - x0) / hx - 1.0, eta = 2.0 * (y - y0) / hy - 1.0;
        double vx[3], dx[3], ddx[3], vy[3], dy[3], ddy[3];
        Lagrange1D::eval(xi, vx, dx, ddx);
        Lagrange1D::eval(eta, vy, dy, ddy);
        const double sx = 2.0 / hx, sy = 2.0 / hy;
        // engineering strain and its x/y derivatives
        Eigen::Vector3d e = Eigen::Vector3d::Zero(), ex_ = Eigen::Vector3d::Zero(), ey_ = Eigen::Vector3d::Zero();
        for (int b = 0; b < 3; ++b)
            for (int a = 0; a < 3; ++a) {
                const int node = (2 * ey + b) * cols + 2 * ex + a;
                const double ux = u[2 * node], uy = u[2 * node + 1];
                const double Nx = dx[a] * vy[b] * sx, Ny = vx[a] * dy[b] * sy;
                const double Nxx = ddx[a] * vy[b] * sx * sx, Nyy = vx[a] * ddy[b] * sy * sy;
                const double Nxy = dx[a] * dy[b] * sx * sy;
                e += Eigen::Vector3d(Nx * ux, Ny * uy, Ny * ux + Nx * uy);
                ex_ += Eigen::Vector3d(Nxx * ux, Nxy * uy, Nxy * ux + Nxx * uy);
                ey_ += Eigen::Vector3d(Nxy * ux, Nyy * uy, Nyy * ux + Nxy * uy);
            }
        const Eigen::Matrix3d D = stiffness_matrix(mat, x, y);
        Eigen::Vector3d s = D * e, sxd = D * ex_, syd = D * ey_;
        return Jet{{s(0), s(1), s(2)}, {sxd(0), sxd(1), sxd(2)}, {syd(0), syd(1), syd(2)}};
    }

    Jet eval(double x, double y) const
    {
        thread_local std::vector<int> ix, iy;
        locate(xl, x, ix);
        locate(yl, y, iy);
        Jet acc;
        int count = 0;
        for (int a : ix)
            for (int b : iy) {
                Jet j = element_jet(a, b, x, y);
                acc.v += j.v;
                acc.d1 += j.d1;
                acc.d2 += j.d2;
                ++count;
            }
        const double w = 1.0 / count;
        acc.v *= w;
        acc.d1 *= w;
        acc.d2 *= w;
        return acc;
    }
};

}  // namespace

OracleSolution displacement_fem_oracle(const Mesh& mesh, const LoadingSpec& loading, const Material& m,
                                       const FemOptions& opt)
{
    if (mesh.kind != MeshKind::Rectangle) throw std::invalid_argument("displacement_fem_oracle needs a rectangle mesh");
    if (loading.tag) throw std::invalid_argument("displacement_fem_oracle takes planar loadings only");
    check_self_equilibrated(loading, mesh, 1e-9);
    MeshPtr fine = refine(mesh, opt.refine, opt.quad_order);
    for (const auto& j : m.jumps)
        if (!fine->has_line(j.axis, j.value)) throw std::invalid_argument("material discontinuity not aligned with mesh lines");
    auto sol = std::make_shared<FemSolution>();
    sol->xl = fine->xlines;
    sol->yl = fine->ylines;
    sol->mat = m;
    const int nx = static_cast<int>(sol->xl.size()) - 1, ny = static_cast<int>(sol->yl.size()) - 1;
    const int cols = 2 * nx + 1, rows = 2 * ny + 1;
    sol->cols = cols;
    const int ndof = 2 * cols * rows;

    // constrained dofs: both at node (0,0), y at node (cols-1, 0)
    std::vector<int> eq(static_cast<std::size_t>(ndof));
    std::vector<bool> fixed(static_cast<std::size_t>(ndof), false);
    fixed[0] = fixed[1] = true;
    fixed[static_cast<std::size_t>(2 * (cols - 1) + 1)] = true;
    int neq = 0;
    for (int d = 0; d < ndof; ++d) eq[static_cast<std::size_t>(d)] = fixed[static_cast<std::size_t>(d)] ? -1 : neq++;

    const QuadratureRule g = gauss_legendre(opt.quad_order);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nx) * ny * 18 * 18);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(ndof);
    for (int ey = 0; ey < ny; ++ey)
        for (int ex = 0; ex < nx; ++ex) {
            const double x0 = sol->xl[static_cast<std::size_t>(ex)], hx = sol->xl[static_cast<std::size_t>(ex + 1)] - x0;
            const double y0 = sol->yl[static_cast<std::size_t>(ey)], hy = sol->yl[static_cast<std::size_t>(ey + 1)] - y0;
            Eigen::Matrix<double, 18, 18> Ke = Eigen::Matrix<double, 18, 18>::Zero();
            Eigen::Matrix<double, 18, 1> Fe = Eigen::Matrix<double, 18, 1>::Zero();
            for (std::size_t qi = 0; qi < g.points.size(); ++qi)
                for (std::size_t qj = 0; qj < g.points.size(); ++qj) {
                    const double xi = g.points[qi], eta = g.points[qj];
                    const double x = x0 + 0.5 * (xi + 1.0) * hx, y = y0 + 0.5 * (eta + 1.0) * hy;
                    const double w = g.weights[qi] * g.weights[qj] * 0.25 * hx * hy;
                    double vx[3], dx[3], ddx[3], vy[3], dy[3], ddy[3];
                    Lagrange1D::eval(xi, vx, dx, ddx);
                    Lagrange1D::eval(eta, vy, dy, ddy);
                    Eigen::Matrix<double, 3, 18> B = Eigen::Matrix<double, 3, 18>::Zero();
                    Eigen::Matrix<double, 9, 1> N;
                    for (int b = 0; b < 3; ++b)
                        for (int a = 0; a < 3; ++a) {
                            const int k = 3 * b + a;
                            const double Nx = dx[a] * vy[b] * 2.0 / hx, Ny = vx[a] * dy[b] * 2.0 / hy;
                            N(k) = vx[a] * vy[b];
                            B(0, 2 * k) = Nx;
                            B(1, 2 * k + 1) = Ny;
                            B(2, 2 * k) = Ny;
                            B(2, 2 * k + 1) = Nx;
                        }
                    Ke.noalias() += w * B.transpose() * stiffness_matrix(m, x, y) * B;
                    if (loading.body) {
                        // evaluate inside the element so discontinuous densities pick the right side
                        Vec2 b = loading.body->force(x, y);
                        for (int k = 0; k < 9; ++k) {
                            Fe(2 * k) += w * N(k) * b.x;
                            Fe(2 * k + 1) += w * N(k) * b.y;
                        }
                    }
                }
            int dofs[18];
            for (int b = 0; b < 3; ++b)
                for (int a = 0; a < 3; ++a) {
                    const int node = (2 * ey + b) * cols + 2 * ex + a;
                    dofs[2 * (3 * b + a)] = 2 * node;
                    dofs[2 * (3 * b + a) + 1] = 2 * node + 1;
                }
            for (int i = 0; i < 18; ++i) {
                F(dofs[i]) += Fe(i);
                const int ei = eq[static_cast<std::size_t>(dofs[i])];
                if (ei < 0) continue;
                for (int j = 0; j < 18; ++j) {
                    const int ej = eq[static_cast<std::size_t>(dofs[j])];
                    if (ej >= 0 && Ke(i, j) != 0.0) trip.emplace_back(ei, ej, Ke(i, j));
                }
            }
        }
    // boundary tractions, edge by edge
    const QuadratureRule gb = gauss_legendre(std::max(opt.quad_order, 6));
    auto edge = [&](const std::string& tag, int n0, int stride, Point2 p0, Point2 p1) {
        const double len = std::hypot(p1.x - p0.x, p1.y - p0.y);
        for (std::size_t k = 0; k < gb.points.size(); ++k) {
            const double t = gb.points[k];
            // interior points keep discontinuous tractions on the correct side
            Point2 p{p0.x + 0.5 * (t + 1.0) * (p1.x - p0.x), p0.y + 0.5 * (t + 1.0) * (p1.y - p0.y)};
            Vec2 tr = loading.traction(tag, p.x, p.y);
            double v[3], d[3], dd[3];
            Lagrange1D::eval(t, v, d, dd);
            for (int a = 0; a < 3; ++a) {
                const int node = n0 + a * stride;
                F(2 * node) += 0.5 * len * gb.weights[k] * v[a] * tr.x;
                F(2 * node + 1) += 0.5 * len * gb.weights[k] * v[a] * tr.y;
            }
        }
    };
    const auto& xl = sol->xl;
    const auto& yl = sol->yl;
    for (int ex = 0; ex < nx; ++ex) {
        edge("bottom", 2 * ex, 1, {xl[static_cast<std::size_t>(ex)], yl.front()}, {xl[static_cast<std::size_t>(ex + 1)], yl.front()});
        edge("top", (rows - 1) * cols + 2 * ex, 1, {xl[static_cast<std::size_t>(ex)], yl.back()},
             {xl[static_cast<std::size_t>(ex + 1)], yl.back()});
    }
    for (int ey = 0; ey < ny; ++ey) {
        edge("left", 2 * ey * cols, cols, {xl.front(), yl[static_cast<std::size_t>(ey)]}, {xl.front(), yl[static_cast<std::size_t>(ey + 1)]});
        edge("right", 2 * ey * cols + cols - 1, cols, {xl.back(), yl[static_cast<std::size_t>(ey)]},
             {xl.back(), yl[static_cast<std::size_t>(ey + 1)]});
    }

    Eigen::SparseMatrix<double> K(neq, neq);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd Fr(neq);
    for (int d = 0; d < ndof; ++d)
        if (eq[static_cast<std::size_t>(d)] >= 0) Fr(eq[static_cast<std::size_t>(d)]) = F(d);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("FEM stiffness factorization failed");
    if (ldlt.vectorD().minCoeff() <= 0.0) throw std::runtime_error("FEM stiffness is singular (unconstrained rigid modes)");
    Eigen::VectorXd ur = ldlt.solve(Fr);
    sol->u = Eigen::VectorXd::Zero(ndof);
    for (int d = 0; d < ndof; ++d)
        if (eq[static_cast<std::size_t>(d)] >= 0) sol->u(d) = ur(eq[static_cast<std::size_t>(d)]);

    OracleSolution o;
    o.source = std::make_shared<TensorSource>(TensorSource{[sol](double x, double y) { return sol->eval(x, y); }, {}});
    o.method = "displacement-fem";
    o.resolution = "Q2 " + std::to_string(nx) + "x" + std::to_string(ny) + " gauss=" + std::to_string(opt.quad_order) +
                   " dofs=" + std::to_string(neq);
    o.energy = F.dot(sol->u);
    return o;
}

}  // namespace sb
