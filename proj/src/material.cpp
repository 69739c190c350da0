#include "stressbasis/material.hpp"

#include "stressbasis/util.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace sb {

Sym2 Material::strain(const Sym2& s, double x, double y) const
{
    if (kind == Kind::Isotropic) {
        const double E = young(x, y);
        return {((1 - nu * nu) * s.a - nu * (1 + nu) * s.b) / E, ((1 - nu * nu) * s.b - nu * (1 + nu) * s.a) / E,
                (1 + nu) * s.c / E};
    }
    return {(1 - nuxy * nuxy) * s.a / Yx - nuxy * (1 + nuxy) * s.b / Yy,
            -nuxy * (1 + nuxy) * s.a / Yx + (1 - nuxy * nuxy) * s.b / Yy, s.c / (2.0 * Gxy)};
}

std::array<double, 9> Material::energy_matrix(double x, double y) const
{
    if (kind == Kind::Isotropic) {
        const double E = young(x, y);
        const double d = (1 - nu * nu) / E, o = -nu * (1 + nu) / E, g = 2.0 * (1 + nu) / E;
        return {d, o, 0, o, d, 0, 0, 0, g};
    }
    const double o = -0.5 * nuxy * (1 + nuxy) * (1.0 / Yx + 1.0 / Yy);
    return {(1 - nuxy * nuxy) / Yx, o, 0, o, (1 - nuxy * nuxy) / Yy, 0, 0, 0, 1.0 / Gxy};
}

std::string Material::describe() const
{
    if (kind == Kind::Orthotropic)
        return "orthotropic Yx=" + fmt17(Yx) + " Yy=" + fmt17(Yy) + " nuxy=" + fmt17(nuxy) + " Gxy=" + fmt17(Gxy);
    return "isotropic Y=" + (Yfield ? profile : fmt17(Y)) + " nu=" + fmt17(nu);
}

namespace {

void check_nu(double nu)
{
    if (!(nu >= 0.0 && nu <= 0.49)) throw std::invalid_argument("Poisson's ratio must lie in [0, 0.49]");
}

}  // namespace

Material isotropic(double Y, double nu)
{
    Material m;
    m.kind = Material::Kind::Isotropic;
    m.Y = Y;
    m.nu = nu;
    validate(m);
    return m;
}

Material isotropic_profile(const std::string& profile, double Y_low, double Y_high, double nu, double y0, double zeta)
{
    Material m;
    m.kind = Material::Kind::Isotropic;
    m.nu = nu;
    m.Y = Y_low;
    m.profile = profile;
    if (profile == "constant") {
        m.profile = "constant";
    } else if (profile == "discontinuous") {
        m.Yfield = [=](double, double y) { return y < y0 ? Y_low : Y_high; };
        m.jumps = {{'y', y0}};
    } else if (profile == "ramp") {
        if (!(zeta > 0.0)) throw std::invalid_argument("ramp profile needs zeta > 0");
        m.Yfield = [=](double, double y) {
            if (y <= y0 - zeta) return Y_low;
            if (y >= y0 + zeta) return Y_high;
            return (Y_high - Y_low) / (2.0 * zeta) * (y - y0) + 0.5 * (Y_low + Y_high);
        };
        m.profile = "ramp zeta=" + fmt17(zeta);
    } else {
        throw std::invalid_argument("unknown Young's modulus profile '" + profile + "'");
    }
    validate(m);
    return m;
}

Material orthotropic(double Yx, double Yy, double nuxy, double Gxy)
{
    Material m;
    m.kind = Material::Kind::Orthotropic;
    m.Yx = Yx;
    m.Yy = Yy;
    m.nuxy = nuxy;
    m.Gxy = Gxy;
    validate(m);
    return m;
}

void validate(const Material& m)
{
    if (m.kind == Material::Kind::Isotropic) {
        check_nu(m.nu);
        if (!(m.Y > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
    } else {
        check_nu(m.nuxy);
        if (!(m.Yx > 0.0 && m.Yy > 0.0 && m.Gxy > 0.0))
            throw std::invalid_argument("orthotropic moduli must be positive");
    }
    // probe positive definiteness on a grid of points in [0,1]^2
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
            double x = i / 10.0, y = j / 10.0;
            if (m.Yfield && !(m.Yfield(x, y) > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
            auto K = m.energy_matrix(x, y);
            Eigen::Matrix3d M = Eigen::Map<const Eigen::Matrix3d>(K.data());
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
            if (!(es.eigenvalues().minCoeff() > 0.0))
                throw std::invalid_argument("compliance is not positive definite");
        }
}

SymTensorField2 compliance_apply(const Material& m, const SymTensorField2& s)
{
    const Mesh& mesh = *s.mesh();
    if (mesh.kind == MeshKind::Radial && !(m.kind == Material::Kind::Isotropic && !m.Yfield))
        throw std::invalid_argument("radial fields require a homogeneous isotropic material");
    std::vector<Sym2> e(s.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        Point2 p = mesh.qp(i);
        e[i] = m.strain(s.values()[i], p.x, p.y);
    }
    return SymTensorField2(s.mesh(), std::move(e), s.tag());
}

EnergyWeights energy_weights(const Material& m, const Mesh& mesh, const std::optional<AzimuthalTag>& tag)
{
    if (mesh.kind == MeshKind::Radial && !(m.kind == Material::Kind::Isotropic && !m.Yfield))
        throw std::invalid_argument("radial fields require a homogeneous isotropic material");
    for (const auto& j : m.jumps)
        if (!mesh.has_line(j.axis, j.value))
            throw std::invalid_argument("material discontinuity not aligned with mesh lines");
    EnergyWeights out;
    out.K.resize(mesh.num_qp());
    const double tw = tag ? theta_weight(*tag) : 1.0;
    for (std::size_t i = 0; i < out.K.size(); ++i) {
        Point2 p = mesh.qp(i);
        auto K = m.energy_matrix(p.x, p.y);
        double w = tw * mesh.qweight(i);
        for (auto& k : K) k *= w;
        out.K[i] = K;
    }
    return out;
}

double energy_inner(const Material& m, const SymTensorField2& A, const SymTensorField2& B)
{
    require_compatible(A, B);
    EnergyWeights ew = energy_weights(m, *A.mesh(), A.tag());
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const auto& K = ew.K[i];
        const Sym2& a = A.values()[i];
        const Sym2& b = B.values()[i];
        s += a.a * (K[0] * b.a + K[1] * b.b + K[2] * b.c) + a.b * (K[3] * b.a + K[4] * b.b + K[5] * b.c) +
             a.c * (K[6] * b.a + K[7] * b.b + K[8] * b.c);
    }
    return s;
}

double strain_energy(const Material& m, const SymTensorField2& s)
{
    return energy_inner(m, s, s);
}

}  // namespace sb
