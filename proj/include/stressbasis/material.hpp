#pragma once

#include "stressbasis/fields.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace sb {

/// \brief Plane-strain material: isotropic with Y(x, y) or homogeneous orthotropic.
struct Material {
    enum class Kind { Isotropic, Orthotropic };
    Kind kind = Kind::Isotropic;

    // isotropic
    double Y = 1.0;
    double nu = 0.3;
    std::function<double(double, double)> Yfield;  // empty for constant Y
    std::string profile = "constant";
    std::vector<FeatureLine> jumps;

    // orthotropic
    double Yx = 1.0, Yy = 1.0, nuxy = 0.3, Gxy = 1.0;

    double young(double x, double y) const { return Yfield ? Yfield(x, y) : Y; }
    bool homogeneous() const { return kind == Kind::Orthotropic || !Yfield; }

    /// Strain of a stress at (x, y), componentwise as the constitutive law is written.
    Sym2 strain(const Sym2& s, double x, double y) const;
    /// Symmetric 3x3 matrix K with energy density s^T K s for s = (xx, yy, xy), shear factor included.
    std::array<double, 9> energy_matrix(double x, double y) const;
    std::string describe() const;
};

Material isotropic(double Y, double nu);
/// Two-phase Y along y: Y_low for y < y0 and Y_high above, with "discontinuous" jump or linear
/// "ramp" over [y0 - zeta, y0 + zeta].
Material isotropic_profile(const std::string& profile, double Y_low, double Y_high, double nu, double y0 = 0.5,
                           double zeta = 0.05);
Material orthotropic(double Yx, double Yy, double nuxy, double Gxy);

/// Throws if the compliance is not positive definite on a probe set.
void validate(const Material& m);

SymTensorField2 compliance_apply(const Material& m, const SymTensorField2& s);
/// Symmetric energy form <C^-1 A, B> (symmetric part of the compliance).
double energy_inner(const Material& m, const SymTensorField2& A, const SymTensorField2& B);
double strain_energy(const Material& m, const SymTensorField2& s);

/// Precomputed energy matrices at each quadrature point of a mesh.
struct EnergyWeights {
    std::vector<std::array<double, 9>> K;  // already multiplied by the quadrature weight (and theta weight)
};
EnergyWeights energy_weights(const Material& m, const Mesh& mesh, const std::optional<AzimuthalTag>& tag);

}  // namespace sb
