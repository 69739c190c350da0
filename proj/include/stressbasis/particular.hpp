#pragma once

#include "stressbasis/fields.hpp"
#include "stressbasis/loading.hpp"

#include <string>

namespace sb {

/// \brief Equilibrated stress matching a loading; built by one of the recipes below.
struct ParticularStress {
    SymTensorField2 field;
    LoadingSpec loading;
    std::string construction;
};

/// Throws with the residual values unless the field is in equilibrium with the loading
/// (interior residual <= tol * ||field||, boundary mismatch <= tol * max(1, sup |field|)).
void check_particular(const SymTensorField2& field, const LoadingSpec& loading, double tol = 1e-8);

struct AiryCoefficients {
    double c1 = 0.0;
    double c2 = 0.0;
};
/// psi = c1 r + c2 r^2 with sigma_rr(r_a) = -p_in and sigma_rr(r_b) = -p_out.
AiryCoefficients axisym_airy_coefficients(double ra, double rb, double p_in, double p_out);

ParticularStress axisym_airy_particular(const MeshPtr& mesh, double p_in, double p_out = 0.0);

enum class BandProfile { Discontinuous, Quartic };
BandProfile band_profile_from_string(const std::string& s);
double band_profile_value(BandProfile profile, double x);
/// sigma_yy = -p * profile(x) on 1/4 <= x <= 3/4, zero elsewhere; unit square with lines x = 1/4, 3/4.
ParticularStress band_pressure_particular(const MeshPtr& mesh, double p, BandProfile profile);

/// Two-density block under gravity -g e_y: rho2 below y = 1/2, rho1 above.
ParticularStress gravity_particular(const MeshPtr& mesh, double rho1, double rho2, double g);
/// Potential V with b = -grad V for the two-density block.
double gravity_potential(double rho1, double rho2, double g, double y);

/// m = 1 cos-family field for the hole loaded by sigma_rr = cos(theta) (r_a = 0.1, r_b = 0.3 only).
ParticularStress annulus_m1_particular(const MeshPtr& mesh);

/// Wraps an externally computed equilibrated field.
ParticularStress oracle_as_particular(const SymTensorField2& field, const LoadingSpec& loading,
                                      const std::string& construction = "oracle");

/// L2 norm of the Laplacian of the planar trace (local compatibility residual), by central
/// differences of the field's evaluator.
double trace_laplacian_norm(const SymTensorField2& field, double h = 1e-5);

}  // namespace sb
